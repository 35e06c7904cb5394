#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "quadmanip/core/errors.hpp"
#include "quadmanip/geometry/geometry.hpp"

namespace quadmanip::yaml {

/// 1-based source line of a node, 0 when unknown.
inline int line_of(const YAML::Node& n) {
  const int l = n.Mark().line;
  return l >= 0 ? l + 1 : 0;
}

inline std::string where(const YAML::Node& n, const std::string& field) {
  const int l = line_of(n);
  return l > 0 ? fmt::format("line {}: '{}'", l, field) : fmt::format("'{}'", field);
}

inline std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline YAML::Node parse(const std::string& text, const std::string& source = "<string>") {
  try {
    return YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ParseError(fmt::format("{}: line {}: {}", source, e.mark.line + 1, e.msg), e.mark.line + 1);
  }
}

inline YAML::Node load_file(const std::filesystem::path& path) {
  return parse(read_text_file(path), path.string());
}

/// Reals may be written plainly or as multiples of pi ("0.5pi", "-0.17pi", "pi").
inline double as_double(const YAML::Node& n, const std::string& field) {
  if (!n || !n.IsScalar()) throw ParseError(where(n, field) + " must be a number", line_of(n));
  const std::string s = n.Scalar();
  try {
    if (s.size() >= 2 && s.compare(s.size() - 2, 2, "pi") == 0) {
      const std::string head = s.substr(0, s.size() - 2);
      double k = 1.0;
      if (head == "-") k = -1.0;
      else if (!head.empty() && head != "+") k = std::stod(head);
      return k * kPi;
    }
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParseError(where(n, field) + " must be a number, got '" + s + "'", line_of(n));
  }
}

inline long long as_int(const YAML::Node& n, const std::string& field) {
  if (!n || !n.IsScalar()) throw ParseError(where(n, field) + " must be an integer", line_of(n));
  try {
    std::size_t used = 0;
    const long long v = std::stoll(n.Scalar(), &used);
    if (used != n.Scalar().size()) throw std::invalid_argument(n.Scalar());
    return v;
  } catch (const std::exception&) {
    throw ParseError(where(n, field) + " must be an integer", line_of(n));
  }
}

inline std::string as_string(const YAML::Node& n, const std::string& field) {
  if (!n || !n.IsScalar()) throw ParseError(where(n, field) + " must be a string", line_of(n));
  return n.Scalar();
}

inline bool as_bool(const YAML::Node& n, const std::string& field) {
  try {
    return n.as<bool>();
  } catch (const YAML::Exception&) {
    throw ParseError(where(n, field) + " must be true or false", line_of(n));
  }
}

inline std::vector<double> as_doubles(const YAML::Node& n, const std::string& field) {
  if (!n || !n.IsSequence()) throw ParseError(where(n, field) + " must be a list of numbers", line_of(n));
  std::vector<double> out;
  out.reserve(n.size());
  for (const auto& e : n) out.push_back(as_double(e, field));
  return out;
}

inline Vec3 as_vec3(const YAML::Node& n, const std::string& field) {
  const auto v = as_doubles(n, field);
  if (v.size() != 3) throw ParseError(where(n, field) + " must have 3 components", line_of(n));
  return {v[0], v[1], v[2]};
}

inline Vec2 as_vec2(const YAML::Node& n, const std::string& field) {
  const auto v = as_doubles(n, field);
  if (v.size() != 2) throw ParseError(where(n, field) + " must have 2 components", line_of(n));
  return {v[0], v[1]};
}

/// Child lookup that reports the parent location when the key is missing.
inline YAML::Node require(const YAML::Node& parent, const std::string& key) {
  if (!parent.IsMap()) throw ParseError(where(parent, key) + ": expected a mapping", line_of(parent));
  YAML::Node child = parent[key];
  if (!child) throw ParseError(where(parent, key) + " is required", line_of(parent));
  return child;
}

inline std::optional<YAML::Node> optional(const YAML::Node& parent, const std::string& key) {
  if (!parent.IsMap()) return std::nullopt;
  YAML::Node child = parent[key];
  if (!child || child.IsNull()) return std::nullopt;
  return child;
}

/// Shortest text that parses back to the same double.
/// Rejects keys outside `allowed`.
inline void check_keys(const YAML::Node& map, std::initializer_list<std::string_view> allowed, const std::string& section) {
  if (!map.IsMap()) throw ParseError(where(map, section) + " must be a mapping", line_of(map));
  for (const auto& kv : map) {
    const std::string k = kv.first.Scalar();
    if (std::find(allowed.begin(), allowed.end(), k) == allowed.end())
      throw ValidationError(where(kv.first, section + "." + k) + ": unknown key", line_of(kv.first));
  }
}

inline std::string num(double v) { return fmt::format("{}", v); }

inline std::string vec(const Vec3& v) { return fmt::format("[{}, {}, {}]", num(v.x()), num(v.y()), num(v.z())); }

inline std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

}  // namespace quadmanip::yaml
