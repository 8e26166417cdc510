#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "holocycles/base_path.hpp"
#include "holocycles/core.hpp"

namespace holocycles::json_io {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Reading. Errors name the offending JSON path.
// ---------------------------------------------------------------------------

[[noreturn]] inline void bad(const std::string& path, const std::string& what) {
  fail(ErrorCode::InvalidArgument, "at " + path + ": " + what);
}

inline const Json& member(const Json& j, const std::string& path, const char* key) {
  if (!j.is_object()) bad(path, "expected an object");
  auto it = j.find(key);
  if (it == j.end()) bad(path, std::string("missing key \"") + key + "\"");
  return *it;
}

inline double get_double(const Json& j, const std::string& path) {
  if (!j.is_number()) bad(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) bad(path, "expected a finite number");
  return v;
}

inline int get_int(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) bad(path, "expected an integer");
  return j.get<int>();
}

/// A number or [re, im].
inline Complex get_complex(const Json& j, const std::string& path) {
  if (j.is_number()) return get_double(j, path);
  if (!j.is_array() || j.size() != 2) bad(path, "expected a number or [re, im]");
  return {get_double(j[0], path + "[0]"), get_double(j[1], path + "[1]")};
}

inline std::vector<Monomial> get_monomials(const Json& j, const std::string& path) {
  if (!j.is_array()) bad(path, "expected an array of monomials");
  std::vector<Monomial> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const std::string p = path + "[" + std::to_string(k) + "]";
    const int i = get_int(member(j[k], p, "i"), p + ".i");
    const int e = get_int(member(j[k], p, "j"), p + ".j");
    if (i < 0 || e < 0) bad(p, "exponents must be non-negative");
    out.push_back({i, e, get_complex(member(j[k], p, "c"), p + ".c")});
  }
  return out;
}

/// {"p": [{"i":..,"j":..,"c":..}, ...], "q": [...]}
inline PolynomialVectorField get_field(const Json& j, const std::string& path) {
  const auto p = get_monomials(member(j, path, "p"), path + ".p");
  const auto q = get_monomials(member(j, path, "q"), path + ".q");
  try {
    return PolynomialVectorField::from_monomials(p, q);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::InvalidArgument) bad(path, e.what());
    throw;
  }
}

/// Accepted base path forms:
///   [[t, [re, im]], ...]                                   piecewise-linear control points
///   {"kind": "circle", "turns": k, "radius": r, "center": c}
///   {"kind": "loop", "center": c, "start": s, "turns": k}   circle about c through s
///   {"kind": "segments", "segments": [{"kind": "line" | "arc" | "exp", ...}, ...]}
inline BasePath get_path(const Json& j, const std::string& path) {
  if (j.is_array()) {
    std::vector<std::pair<double, Complex>> controls;
    for (std::size_t k = 0; k < j.size(); ++k) {
      const std::string p = path + "[" + std::to_string(k) + "]";
      if (!j[k].is_array() || j[k].size() != 2) bad(p, "expected [t, [re, im]]");
      controls.emplace_back(get_double(j[k][0], p + "[0]"), get_complex(j[k][1], p + "[1]"));
    }
    try {
      return BasePath::polyline(controls);
    } catch (const Error& e) {
      bad(path, e.what());
    }
  }
  const auto& kind_json = member(j, path, "kind");
  if (!kind_json.is_string()) bad(path + ".kind", "expected a string");
  const auto kind = kind_json.get<std::string>();
  auto turns = [&]() { return j.contains("turns") ? get_int(j["turns"], path + ".turns") : 1; };
  if (kind == "circle") {
    const double radius = j.contains("radius") ? get_double(j["radius"], path + ".radius") : 1.0;
    const Complex center = j.contains("center") ? get_complex(j["center"], path + ".center") : Complex{};
    if (!(radius > 0)) bad(path + ".radius", "must be positive");
    return BasePath::circle(turns(), radius, center);
  }
  if (kind == "loop") {
    return BasePath::loop_around(get_complex(member(j, path, "center"), path + ".center"),
                                 get_complex(member(j, path, "start"), path + ".start"), turns());
  }
  if (kind != "segments") bad(path + ".kind", "unknown path kind \"" + kind + "\"");
  const auto& segs = member(j, path, "segments");
  if (!segs.is_array() || segs.empty()) bad(path + ".segments", "expected a non-empty array");
  std::vector<SegmentShape> shapes;
  for (std::size_t k = 0; k < segs.size(); ++k) {
    const std::string p = path + ".segments[" + std::to_string(k) + "]";
    const auto& s = segs[k];
    const auto& sk = member(s, p, "kind");
    if (!sk.is_string()) bad(p + ".kind", "expected a string");
    const auto name = sk.get<std::string>();
    if (name == "line") {
      shapes.push_back(LineSegment{get_complex(member(s, p, "from"), p + ".from"), get_complex(member(s, p, "to"), p + ".to")});
    } else if (name == "arc") {
      shapes.push_back(ArcSegment{get_complex(member(s, p, "center"), p + ".center"),
                                  get_double(member(s, p, "radius"), p + ".radius"),
                                  get_double(member(s, p, "theta0"), p + ".theta0"),
                                  get_double(member(s, p, "theta1"), p + ".theta1")});
    } else if (name == "exp") {
      shapes.push_back(ExpSegment{get_complex(member(s, p, "origin"), p + ".origin"),
                                  get_complex(member(s, p, "kappa"), p + ".kappa")});
    } else {
      bad(p + ".kind", "unknown segment kind \"" + name + "\"");
    }
  }
  std::vector<PathSegment> out;
  const double n = double(shapes.size());
  for (std::size_t k = 0; k < shapes.size(); ++k)
    out.push_back({shapes[k], double(k) / n, k + 1 == shapes.size() ? 1.0 : double(k + 1) / n});
  return BasePath(std::move(out));
}

inline Json parse(const std::string& text, const std::string& source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    fail(ErrorCode::InvalidArgument, source + ": malformed JSON: " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Writing. Doubles always carry 17 significant digits, so output is lossless and
// byte-identical across runs.
// ---------------------------------------------------------------------------

inline Json complex_json(Complex c) { return Json::array({c.real(), c.imag()}); }

namespace detail {

inline void write_string(std::ostream& os, const std::string& s) { os << Json(s).dump(); }

inline void write_double(std::ostream& os, double v) {
  if (!std::isfinite(v)) {
    os << "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  os << buf;
}

inline void write(std::ostream& os, const Json& j, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close(static_cast<std::size_t>(indent * depth), ' ');
  const char* nl = indent > 0 ? "\n" : "";
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        os << "{}";
        return;
      }
      os << '{' << nl;
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) os << ',' << nl;
        first = false;
        os << pad;
        write_string(os, it.key());
        os << (indent > 0 ? ": " : ":");
        write(os, it.value(), indent, depth + 1);
      }
      os << nl << close << '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        os << "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      const bool flat = std::none_of(j.begin(), j.end(), [](const Json& e) { return e.is_structured(); });
      os << '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) os << ',';
        if (!flat) os << nl << pad;
        else if (!first && indent > 0) os << ' ';
        first = false;
        write(os, e, indent, depth + 1);
      }
      if (!flat) os << nl << close;
      os << ']';
      return;
    }
    case Json::value_t::number_float:
      write_double(os, j.get<double>());
      return;
    default:
      os << j.dump();
  }
}

}  // namespace detail

inline void write(std::ostream& os, const Json& j, int indent = 2) {
  detail::write(os, j, indent, 0);
  os << '\n';
}

inline std::string to_text(const Json& j, int indent = 2) {
  std::ostringstream os;
  write(os, j, indent);
  return os.str();
}

}  // namespace holocycles::json_io
