#pragma once

// Plain-text key=value configuration: one pair per line, '#' starts a
// comment. Atlas parameters use the keys depth, g (comma-separated drifts,
// top rank first) or simple_g (growth rate of a simple model), and sigma2.

#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "atlasid/error.hpp"
#include "atlasid/model.hpp"

namespace atlasid {

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view key, std::string_view text) {
  text = trim(text);
  double v = 0.0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc{} || res.ptr != text.data() + text.size()) {
    throw Error(Errc::parse, "key '" + std::string(key) +
                                 "': cannot parse number '" +
                                 std::string(text) + "'");
  }
  return v;
}

/// Accepts plain integers and integral scientific forms such as 1e7.
inline std::uint64_t parse_count(std::string_view key, std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec == std::errc{} && res.ptr == text.data() + text.size()) return v;
  const double d = parse_double(key, text);
  if (!(d >= 0.0) || d > 1.8e19 || d != static_cast<double>(
                                                static_cast<std::uint64_t>(d))) {
    throw Error(Errc::parse, "key '" + std::string(key) +
                                 "': expected a non-negative integer, got '" +
                                 std::string(text) + "'");
  }
  return static_cast<std::uint64_t>(d);
}

inline std::vector<double> parse_double_list(std::string_view key,
                                             std::string_view text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto next = text.find(',', pos);
    if (next == std::string_view::npos) next = text.size();
    out.push_back(parse_double(key, text.substr(pos, next - pos)));
    pos = next + 1;
  }
  return out;
}

class KeyValueConfig {
 public:
  static KeyValueConfig parse(std::istream& in) {
    KeyValueConfig cfg;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      std::string_view sv = line;
      if (auto hash = sv.find('#'); hash != std::string_view::npos) {
        sv = sv.substr(0, hash);
      }
      sv = trim(sv);
      if (sv.empty()) continue;
      const auto eq = sv.find('=');
      if (eq == std::string_view::npos) {
        throw Error(Errc::parse,
                    "line " + std::to_string(lineno) + ": expected key=value",
                    lineno);
      }
      cfg.set(std::string(trim(sv.substr(0, eq))),
              std::string(trim(sv.substr(eq + 1))));
    }
    return cfg;
  }

  static KeyValueConfig parse(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  void set(std::string key, std::string value) {
    values_[std::move(key)] = std::move(value);
  }
  bool has(const std::string& key) const { return values_.count(key) != 0; }
  const std::string* find(const std::string& key) const {
    auto it = values_.find(key);
    return it == values_.end() ? nullptr : &it->second;
  }
  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Ordered key=value pairs describing p.
inline std::vector<std::pair<std::string, std::string>> params_to_kv(
    const AtlasParams& p) {
  std::string g;
  for (std::size_t k = 0; k < p.n(); ++k) {
    if (k) g += ',';
    g += format_double(p.g(k));
  }
  return {{"depth", std::to_string(p.n())},
          {"g", g},
          {"sigma2", format_double(p.sigma2())}};
}

/// Single-line echo used in CSV headers and for matching pooled inputs.
inline std::string params_echo(const AtlasParams& p) {
  std::string out;
  for (const auto& [k, v] : params_to_kv(p)) {
    if (!out.empty()) out += ' ';
    out += k + '=' + v;
  }
  return out;
}

/// Reads depth/g/simple_g/sigma2. Either g or (depth, simple_g) is required.
inline AtlasParams params_from_config(const KeyValueConfig& cfg) {
  const std::string* sigma2 = cfg.find("sigma2");
  if (!sigma2) throw Error(Errc::parse, "missing key 'sigma2'");
  const double s2 = parse_double("sigma2", *sigma2);

  if (const std::string* g = cfg.find("g")) {
    auto drifts = parse_double_list("g", *g);
    if (const std::string* depth = cfg.find("depth")) {
      if (parse_count("depth", *depth) != drifts.size()) {
        throw Error(Errc::parse, "key 'depth' does not match length of 'g'");
      }
    }
    return make_atlas_params(std::move(drifts), s2);
  }
  const std::string* depth = cfg.find("depth");
  if (!depth) throw Error(Errc::parse, "missing key 'depth' (or 'g')");
  SimpleAtlasSpec spec;
  spec.n = parse_count("depth", *depth);
  spec.sigma2 = s2;
  if (spec.n > 1) {
    const std::string* sg = cfg.find("simple_g");
    if (!sg) throw Error(Errc::parse, "missing key 'simple_g' (or 'g')");
    spec.g = parse_double("simple_g", *sg);
  }
  return make_simple(spec);
}

/// Parses a params echo line ("depth=.. g=.. sigma2=..").
inline AtlasParams params_from_echo(std::string_view echo) {
  KeyValueConfig cfg;
  std::size_t pos = 0;
  while (pos < echo.size()) {
    auto sp = echo.find(' ', pos);
    if (sp == std::string_view::npos) sp = echo.size();
    auto tok = echo.substr(pos, sp - pos);
    if (!tok.empty()) {
      auto eq = tok.find('=');
      if (eq == std::string_view::npos) {
        throw Error(Errc::parse, "malformed params echo");
      }
      cfg.set(std::string(tok.substr(0, eq)), std::string(tok.substr(eq + 1)));
    }
    pos = sp + 1;
  }
  return params_from_config(cfg);
}

}  // namespace atlasid
