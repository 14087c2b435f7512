#include "qcomp/channel_io.hpp"

#include <fstream>
#include <regex>
#include <sstream>

#include <json.hpp>

#include "qcomp/errors.hpp"
#include "qcomp/tolerances.hpp"

namespace qcomp {

namespace {

using nlohmann::json;

std::vector<double> parse_args(const std::string& args) {
  std::vector<double> out;
  std::stringstream ss(args);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw InvalidInput("bad number");
    } catch (const std::logic_error&) {
      throw InvalidInput("channel spec: cannot parse argument '" + item + "'");
    }
  }
  return out;
}

std::size_t as_dim(double v) {
  if (v < 1 || v != static_cast<double>(static_cast<std::size_t>(v))) throw InvalidInput("channel spec: bad dimension");
  return static_cast<std::size_t>(v);
}

KrausChannel from_json(const json& j) {
  if (!j.is_object() || !j.contains("in_dim") || !j.contains("out_dim") || !j.contains("kraus")) {
    throw InvalidInput("channel JSON needs in_dim, out_dim and kraus");
  }
  const auto in = j.at("in_dim").get<std::size_t>();
  const auto out = j.at("out_dim").get<std::size_t>();
  std::vector<CMatrix> ks;
  for (const auto& mat : j.at("kraus")) {
    if (mat.size() != out) throw InvalidInput("channel JSON: Kraus operator must have out_dim rows");
    CMatrix a(static_cast<Eigen::Index>(out), static_cast<Eigen::Index>(in));
    for (std::size_t r = 0; r < out; ++r) {
      if (mat[r].size() != in) throw InvalidInput("channel JSON: Kraus row must have in_dim entries");
      for (std::size_t c = 0; c < in; ++c) {
        const auto& z = mat[r][c];
        if (z.is_number()) a(r, c) = z.get<double>();
        else if (z.is_array() && z.size() == 2) a(r, c) = Complex(z[0].get<double>(), z[1].get<double>());
        else throw InvalidInput("channel JSON: entries are numbers or [re, im] pairs");
      }
    }
    ks.push_back(std::move(a));
  }
  if (ks.empty()) throw InvalidInput("channel JSON: no Kraus operators");
  const bool tp = !j.contains("trace_preserving") || j.at("trace_preserving").get<bool>();
  return KrausChannel(std::move(ks), tp ? KrausChannel::Kind::TracePreserving : KrausChannel::Kind::TraceDecreasing);
}

}  // namespace

KrausChannel parse_builtin_channel(const std::string& spec) {
  static const std::regex pattern(R"(\s*([a-z_]+)\s*(?:\(([^)]*)\))?\s*)");
  std::smatch m;
  if (!std::regex_match(spec, m, pattern)) throw InvalidInput("unknown channel spec '" + spec + "'");
  const std::string name = m[1];
  const std::vector<double> args = m[2].matched ? parse_args(m[2]) : std::vector<double>{};
  auto need = [&](std::size_t lo, std::size_t hi) {
    if (args.size() < lo || args.size() > hi) throw InvalidInput("wrong number of arguments for '" + name + "'");
  };
  if (name == "identity") {
    need(0, 1);
    return KrausChannel::identity(args.empty() ? 2 : as_dim(args[0]));
  }
  if (name == "useless") {
    need(0, 2);
    const std::size_t d = args.empty() ? 2 : as_dim(args[0]);
    return KrausChannel::useless(d, args.size() == 2 ? as_dim(args[1]) : d);
  }
  if (name == "phase_flip") return need(1, 1), KrausChannel::phase_flip(args[0]);
  if (name == "bit_flip") return need(1, 1), KrausChannel::bit_flip(args[0]);
  if (name == "depolarizing") return need(1, 1), KrausChannel::depolarizing(args[0]);
  if (name == "amplitude_damping") return need(1, 1), KrausChannel::amplitude_damping(args[0]);
  throw InvalidInput("unknown builtin channel '" + name + "'");
}

KrausChannel parse_channel(const std::string& text) {
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    try {
      return from_json(json::parse(text));
    } catch (const json::exception& e) {
      throw InvalidInput(std::string("channel JSON: ") + e.what());
    }
  }
  return parse_builtin_channel(text);
}

std::string channel_to_json(const KrausChannel& ch) {
  json j;
  j["in_dim"] = ch.in_dim();
  j["out_dim"] = ch.out_dim();
  j["trace_preserving"] = ch.trace_preserving();
  j["kraus"] = json::array();
  for (const auto& a : ch.kraus()) {
    json mat = json::array();
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      json row = json::array();
      for (Eigen::Index c = 0; c < a.cols(); ++c) row.push_back({a(r, c).real(), a(r, c).imag()});
      mat.push_back(row);
    }
    j["kraus"].push_back(mat);
  }
  return j.dump();
}

KrausChannel load_channel_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open channel file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_channel(ss.str());
}

}  // namespace qcomp
