#pragma once

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hcx/common.hpp"
#include "hcx/geometry.hpp"

namespace hcx {

/// Named right-hand-side / boundary-data catalog. "polynomial" holds
/// (coefficient, x1 exponent, x2 exponent) triples; the other names are
/// shorthands for fixed polynomials.
struct FunctionSpec {
  std::string name = "zero";
  double value = 0;  // "constant" only
  std::vector<std::array<double, 3>> terms;  // "polynomial" only

  bool is_zero() const { return name == "zero" || (name == "constant" && value == 0); }
};

inline ScalarFn to_scalar_fn(const FunctionSpec& s) {
  if (s.name == "zero") return [](const Vec2&) { return 0.0; };
  if (s.name == "one") return [](const Vec2&) { return 1.0; };
  if (s.name == "constant") {
    double v = s.value;
    return [v](const Vec2&) { return v; };
  }
  if (s.name == "linear_x1") return [](const Vec2& p) { return p.x(); };
  if (s.name == "quadratic") return [](const Vec2& p) { return p.x() + p.y() * p.y(); };
  if (s.name == "polynomial") {
    auto terms = s.terms;
    return [terms](const Vec2& p) {
      double v = 0;
      for (const auto& t : terms) v += t[0] * std::pow(p.x(), t[1]) * std::pow(p.y(), t[2]);
      return v;
    };
  }
  throw ConfigError("unknown function name '" + s.name + "'");
}

/// Two-component data for elasticity, one scalar catalog entry per component.
struct VectorFunctionSpec {
  FunctionSpec x, y;

  bool is_zero() const { return x.is_zero() && y.is_zero(); }
};

inline VectorFn to_vector_fn(const VectorFunctionSpec& s) {
  ScalarFn fx = to_scalar_fn(s.x), fy = to_scalar_fn(s.y);
  return [fx, fy](const Vec2& p) { return Vec2(fx(p), fy(p)); };
}

/// Everything one run needs. Defaults mirror the reference experiments:
/// f = 1, g = 0, tol = 1e-8, J_max = 25.
struct ExperimentConfig {
  std::string problem = "pressure";  // pressure | elastic
  std::string mode = "stiff";       // elastic only: stiff | soft

  GeometrySpec geometry;      // used when mesh_path is empty
  std::string mesh_path;      // pre-generated mesh JSON, overrides geometry
  int refine = 0;

  std::vector<double> contrast = {10.0, 100.0};
  FunctionSpec f{"one", 0, {}};
  FunctionSpec g{"zero", 0, {}};
  VectorFunctionSpec fv{{"one", 0, {}}, {"zero", 0, {}}};
  VectorFunctionSpec gv{{"zero", 0, {}}, {"zero", 0, {}}};

  double nu = 0.3;
  int j_max = 25;
  double tol = 1e-8;         // truncation / report tolerance
  double solver_tol = 1e-8;  // linear-solver residual check
  std::vector<double> deltas = {0.001, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};

  std::string out = "out";
  int threads = 0;  // 0 = hardware concurrency
  std::string cache_dir;

  bool elastic() const { return problem == "elastic"; }
  bool soft() const { return mode == "soft"; }
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void config_fail(const std::string& path, const std::string& what) {
  throw ConfigError(path + ": " + what);
}

inline void expect_keys(const json& obj, const std::string& path,
                        const std::set<std::string>& allowed) {
  for (const auto& [k, v] : obj.items())
    if (!allowed.count(k)) config_fail(path + "/" + k, "unknown key");
}

inline double as_number(const json& v, const std::string& path) {
  if (!v.is_number()) config_fail(path, "expected a number");
  return v.get<double>();
}

inline int as_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) config_fail(path, "expected an integer");
  return v.get<int>();
}

inline std::string as_string(const json& v, const std::string& path) {
  if (!v.is_string()) config_fail(path, "expected a string");
  return v.get<std::string>();
}

inline std::vector<double> as_number_list(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) config_fail(path, "expected a non-empty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(as_number(v[i], path + "/" + std::to_string(i)));
  return out;
}

inline Vec2 as_point(const json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2) config_fail(path, "expected [x, y]");
  return Vec2(as_number(v[0], path + "/0"), as_number(v[1], path + "/1"));
}

inline FunctionSpec parse_function(const json& v, const std::string& path) {
  if (!v.is_object()) config_fail(path, "expected an object with a \"name\"");
  expect_keys(v, path, {"name", "value", "terms"});
  FunctionSpec s;
  if (!v.contains("name")) config_fail(path, "missing \"name\"");
  s.name = as_string(v["name"], path + "/name");
  static const std::set<std::string> names = {"zero",      "one",       "constant",
                                              "linear_x1", "quadratic", "polynomial"};
  if (!names.count(s.name)) config_fail(path + "/name", "unknown function '" + s.name + "'");
  if (v.contains("value")) {
    if (s.name != "constant") config_fail(path + "/value", "only valid for \"constant\"");
    s.value = as_number(v["value"], path + "/value");
  } else if (s.name == "constant") {
    config_fail(path, "\"constant\" requires \"value\"");
  }
  if (v.contains("terms")) {
    if (s.name != "polynomial") config_fail(path + "/terms", "only valid for \"polynomial\"");
    const json& terms = v["terms"];
    if (!terms.is_array() || terms.empty())
      config_fail(path + "/terms", "expected a non-empty array of [coef, px1, px2]");
    for (std::size_t i = 0; i < terms.size(); ++i) {
      std::string tp = path + "/terms/" + std::to_string(i);
      if (!terms[i].is_array() || terms[i].size() != 3) config_fail(tp, "expected [coef, px1, px2]");
      std::array<double, 3> t{as_number(terms[i][0], tp + "/0"), as_number(terms[i][1], tp + "/1"),
                              as_number(terms[i][2], tp + "/2")};
      if (t[1] < 0 || t[2] < 0 || t[1] != std::floor(t[1]) || t[2] != std::floor(t[2]))
        config_fail(tp, "exponents must be non-negative integers");
      s.terms.push_back(t);
    }
  } else if (s.name == "polynomial") {
    config_fail(path, "\"polynomial\" requires \"terms\"");
  }
  return s;
}

inline VectorFunctionSpec parse_vector_function(const json& v, const std::string& path) {
  if (!v.is_object()) config_fail(path, "expected an object");
  VectorFunctionSpec s;
  if (v.contains("name")) {
    // Shorthand: a scalar entry applied to the first component, zero second.
    FunctionSpec fs = parse_function(v, path);
    if (fs.name == "zero") return {fs, fs};
    s.x = fs;
    s.y = FunctionSpec{};
    return s;
  }
  expect_keys(v, path, {"x", "y"});
  if (!v.contains("x") || !v.contains("y")) config_fail(path, "expected \"x\" and \"y\" entries");
  s.x = parse_function(v["x"], path + "/x");
  s.y = parse_function(v["y"], path + "/y");
  return s;
}

inline InclusionShape parse_inclusion(const json& v, const std::string& path) {
  if (!v.is_object()) config_fail(path, "expected a shape object");
  if (!v.contains("type")) config_fail(path, "missing \"type\"");
  std::string type = as_string(v["type"], path + "/type");
  if (type == "disk") {
    expect_keys(v, path, {"type", "cx", "cy", "r"});
    for (const char* k : {"cx", "cy", "r"})
      if (!v.contains(k)) config_fail(path, std::string("missing \"") + k + "\"");
    return Disk{Vec2(as_number(v["cx"], path + "/cx"), as_number(v["cy"], path + "/cy")),
                as_number(v["r"], path + "/r")};
  }
  if (type == "polygon") {
    expect_keys(v, path, {"type", "points"});
    if (!v.contains("points")) config_fail(path, "missing \"points\"");
    const json& pts = v["points"];
    if (!pts.is_array() || pts.size() < 3) config_fail(path + "/points", "need at least 3 points");
    Polygon poly;
    for (std::size_t i = 0; i < pts.size(); ++i)
      poly.vertices.push_back(as_point(pts[i], path + "/points/" + std::to_string(i)));
    return poly;
  }
  config_fail(path + "/type", "expected \"disk\" or \"polygon\"");
}

inline OuterShape parse_outer(const json& v, const std::string& path) {
  if (!v.is_object()) config_fail(path, "expected a shape object");
  if (!v.contains("type")) config_fail(path, "missing \"type\"");
  std::string type = as_string(v["type"], path + "/type");
  if (type == "rect") {
    expect_keys(v, path, {"type", "xmin", "ymin", "xmax", "ymax"});
    for (const char* k : {"xmin", "ymin", "xmax", "ymax"})
      if (!v.contains(k)) config_fail(path, std::string("missing \"") + k + "\"");
    return Rect{as_number(v["xmin"], path + "/xmin"), as_number(v["ymin"], path + "/ymin"),
                as_number(v["xmax"], path + "/xmax"), as_number(v["ymax"], path + "/ymax")};
  }
  if (type == "disk") {
    expect_keys(v, path, {"type", "cx", "cy", "r"});
    for (const char* k : {"cx", "cy", "r"})
      if (!v.contains(k)) config_fail(path, std::string("missing \"") + k + "\"");
    return Disk{Vec2(as_number(v["cx"], path + "/cx"), as_number(v["cy"], path + "/cy")),
                as_number(v["r"], path + "/r")};
  }
  config_fail(path + "/type", "outer shape must be \"rect\" or \"disk\"");
}

inline GeometrySpec parse_geometry(const json& v, const std::string& path) {
  if (!v.is_object()) config_fail(path, "expected an object");
  if (v.contains("preset")) {
    expect_keys(v, path, {"preset", "target_h"});
    std::string preset = as_string(v["preset"], path + "/preset");
    GeometrySpec spec;
    if (preset == "disk36")
      spec = preset_disk36();
    else if (preset == "disk60")
      spec = preset_disk60();
    else if (preset == "square_polygon")
      spec = preset_square_polygon();
    else
      config_fail(path + "/preset", "unknown preset '" + preset + "'");
    if (v.contains("target_h")) spec.target_h = as_number(v["target_h"], path + "/target_h");
    return spec;
  }
  expect_keys(v, path, {"outer", "inclusions", "target_h"});
  for (const char* k : {"outer", "inclusions", "target_h"})
    if (!v.contains(k)) config_fail(path, std::string("missing \"") + k + "\"");
  GeometrySpec spec;
  spec.outer = parse_outer(v["outer"], path + "/outer");
  const json& inc = v["inclusions"];
  if (!inc.is_array() || inc.empty()) config_fail(path + "/inclusions", "expected a non-empty array");
  for (std::size_t i = 0; i < inc.size(); ++i)
    spec.inclusions.push_back(parse_inclusion(inc[i], path + "/inclusions/" + std::to_string(i)));
  spec.target_h = as_number(v["target_h"], path + "/target_h");
  return spec;
}

}  // namespace detail

/// Strict parse: unknown keys, type mismatches, and constraint violations all
/// fail with the offending JSON path.
inline ExperimentConfig parse_config_json(const nlohmann::json& root) {
  using detail::as_int;
  using detail::as_number;
  using detail::as_number_list;
  using detail::as_string;
  using detail::config_fail;

  if (!root.is_object()) config_fail("", "config root must be an object");
  detail::expect_keys(root, "", {"problem", "mode", "geometry", "mesh_path", "refine", "contrast",
                                 "f", "g", "nu", "j_max", "tol", "solver_tol", "deltas", "out",
                                 "threads", "cache_dir"});

  ExperimentConfig c;
  if (root.contains("problem")) {
    c.problem = as_string(root["problem"], "/problem");
    if (c.problem != "pressure" && c.problem != "elastic")
      config_fail("/problem", "expected \"pressure\" or \"elastic\"");
  }
  if (root.contains("mode")) {
    c.mode = as_string(root["mode"], "/mode");
    if (c.mode != "stiff" && c.mode != "soft")
      config_fail("/mode", "expected \"stiff\" or \"soft\"");
    if (!c.elastic() && c.mode == "soft")
      config_fail("/mode", "soft mode applies to the elastic problem only");
  }

  bool has_geom = root.contains("geometry");
  bool has_mesh = root.contains("mesh_path");
  if (has_geom == has_mesh)
    config_fail("", "exactly one of \"geometry\" and \"mesh_path\" is required");
  if (has_geom) c.geometry = detail::parse_geometry(root["geometry"], "/geometry");
  if (has_mesh) {
    c.mesh_path = as_string(root["mesh_path"], "/mesh_path");
    if (c.mesh_path.empty()) config_fail("/mesh_path", "empty path");
  }

  if (root.contains("refine")) {
    c.refine = as_int(root["refine"], "/refine");
    if (c.refine < 0 || c.refine > 6) config_fail("/refine", "expected 0..6");
  }
  if (root.contains("contrast")) c.contrast = as_number_list(root["contrast"], "/contrast");
  for (std::size_t i = 0; i < c.contrast.size(); ++i) {
    double v = c.contrast[i];
    std::string p = "/contrast/" + std::to_string(i);
    if (c.elastic() && c.soft()) {
      if (!(v > 0 && v < 1)) config_fail(p, "soft contrast must lie in (0, 1)");
    } else if (!(v > 1)) {
      config_fail(p, "contrast must exceed 1");
    }
  }

  if (root.contains("f")) {
    if (c.elastic())
      c.fv = detail::parse_vector_function(root["f"], "/f");
    else
      c.f = detail::parse_function(root["f"], "/f");
  }
  if (root.contains("g")) {
    if (c.elastic())
      c.gv = detail::parse_vector_function(root["g"], "/g");
    else
      c.g = detail::parse_function(root["g"], "/g");
  }

  if (root.contains("nu")) {
    c.nu = as_number(root["nu"], "/nu");
    if (!(c.nu > 0 && c.nu < 0.5)) config_fail("/nu", "expected 0 < nu < 0.5");
  }
  if (root.contains("j_max")) {
    c.j_max = as_int(root["j_max"], "/j_max");
    if (c.j_max < 0 || c.j_max > 200) config_fail("/j_max", "expected 0..200");
  }
  if (root.contains("tol")) {
    c.tol = as_number(root["tol"], "/tol");
    if (!(c.tol > 0)) config_fail("/tol", "must be positive");
  }
  if (root.contains("solver_tol")) {
    c.solver_tol = as_number(root["solver_tol"], "/solver_tol");
    if (!(c.solver_tol > 0)) config_fail("/solver_tol", "must be positive");
  }
  if (root.contains("deltas")) {
    c.deltas = as_number_list(root["deltas"], "/deltas");
    for (std::size_t i = 0; i < c.deltas.size(); ++i)
      if (!(c.deltas[i] > 0)) config_fail("/deltas/" + std::to_string(i), "must be positive");
  }
  if (root.contains("out")) c.out = as_string(root["out"], "/out");
  if (root.contains("threads")) {
    c.threads = as_int(root["threads"], "/threads");
    if (c.threads < 0) config_fail("/threads", "expected 0 (all cores) or a positive count");
  }
  if (root.contains("cache_dir")) c.cache_dir = as_string(root["cache_dir"], "/cache_dir");
  return c;
}

inline ExperimentConfig parse_config_text(const std::string& text) {
  nlohmann::json root;
  try {
    root = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  return parse_config_json(root);
}

inline ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

/// Stable fingerprint of the parsed configuration; artifacts carry it in the
/// run manifest. Geometry, data, and numeric settings all contribute.
inline std::string config_hash(const ExperimentConfig& c) {
  std::string s = c.problem + "|" + c.mode + "|" + c.mesh_path + "|";
  auto add_num = [&s](double v) {
    s += format_double(v);
    s += ',';
  };
  if (c.mesh_path.empty()) s += geometry_fingerprint(c.geometry);
  s += "|refine=" + std::to_string(c.refine) + "|contrast=";
  for (double v : c.contrast) add_num(v);
  auto add_fn = [&s, &add_num](const FunctionSpec& f) {
    s += f.name + ":";
    add_num(f.value);
    for (const auto& t : f.terms) {
      add_num(t[0]);
      add_num(t[1]);
      add_num(t[2]);
    }
  };
  s += "|f=";
  if (c.elastic()) {
    add_fn(c.fv.x);
    add_fn(c.fv.y);
  } else {
    add_fn(c.f);
  }
  s += "|g=";
  if (c.elastic()) {
    add_fn(c.gv.x);
    add_fn(c.gv.y);
  } else {
    add_fn(c.g);
  }
  s += "|nu=";
  add_num(c.nu);
  s += "|jmax=" + std::to_string(c.j_max) + "|tol=";
  add_num(c.tol);
  add_num(c.solver_tol);
  s += "|deltas=";
  for (double v : c.deltas) add_num(v);
  return hex64(fnv1a(s));
}

}  // namespace hcx
