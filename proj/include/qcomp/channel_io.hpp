#pragma once

// Channel specifications: builtin names such as "phase_flip(0.1)" and the
// JSON Kraus format {"in_dim": d, "out_dim": d', "kraus": [[[re, im], ...], ...]}.

#include <string>

#include "qcomp/channels.hpp"

namespace qcomp {

/// Builtins: identity[(d)], useless[(d[, d'])], phase_flip(p), bit_flip(p),
/// depolarizing(p), amplitude_damping(γ). Throws InvalidInput otherwise.
KrausChannel parse_builtin_channel(const std::string& spec);

/// Accepts either a builtin name or a JSON document in the Kraus format.
KrausChannel parse_channel(const std::string& text);

std::string channel_to_json(const KrausChannel& ch);

/// Reads a JSON channel file.
KrausChannel load_channel_file(const std::string& path);

}  // namespace qcomp
