#pragma once

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "hcx/expansion.hpp"
#include "hcx/mesh_generate.hpp"
#include "hcx/mesh_io.hpp"

namespace hcx {

/// Content-addressed on-disk cache for meshes and characteristic fields.
/// Files are named by the hash of their inputs and carry the full pre-hash
/// fingerprint; a stored fingerprint that disagrees with the request means a
/// stale or colliding entry, which is recomputed with a warning.

inline std::string mesh_fingerprint(const GeometrySpec& spec, int refine) {
  return geometry_fingerprint(spec) + ";refine=" + std::to_string(refine);
}

/// Fingerprint for characteristic fields on a concrete mesh. `kind`
/// distinguishes variants sharing a mesh ("chi", "chi-delta=0.2", ...); the
/// contrast is deliberately absent because the fields do not depend on it.
inline std::string chi_fingerprint(const Mesh& mesh, double tol, const std::string& kind) {
  std::string bytes = mesh_to_json(mesh);
  return kind + ";tol=" + format_double(tol) + ";mesh=" + hex64(fnv1a(bytes));
}

namespace detail {

inline std::filesystem::path cache_file(const std::filesystem::path& dir, const std::string& stem,
                                        const std::string& fingerprint) {
  return dir / (stem + "-" + hex64(fnv1a(fingerprint)) + ".json");
}

inline bool read_text(const std::filesystem::path& p, std::string& out) {
  std::ifstream in(p, std::ios::binary);
  if (!in) return false;
  std::ostringstream ss;
  ss << in.rdbuf();
  out = ss.str();
  return true;
}

}  // namespace detail

/// Loads the mesh for (spec, refine) from the cache, generating and storing it
/// on a miss. The cache file wraps the mesh JSON with its fingerprint.
inline Mesh cached_mesh(const std::filesystem::path& dir, const GeometrySpec& spec, int refine,
                        int threads = 1) {
  std::string fp = mesh_fingerprint(spec, refine);
  std::filesystem::path file = detail::cache_file(dir, "mesh", fp);

  std::string text;
  if (detail::read_text(file, text)) {
    try {
      nlohmann::json root = nlohmann::json::parse(text);
      if (root.at("fingerprint").get<std::string>() != fp)
        throw ConfigError("fingerprint mismatch");
      return mesh_from_json(root.at("mesh").dump());
    } catch (const std::exception& e) {
      std::cerr << "warning: mesh cache entry " << file.string() << " rejected (" << e.what()
                << "); regenerating\n";
    }
  }

  Mesh mesh = generate_mesh(spec);
  for (int r = 0; r < refine; ++r) mesh = refine_uniform(mesh);
  (void)threads;

  std::filesystem::create_directories(dir);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write cache file " + file.string());
  out << "{\"fingerprint\": " << nlohmann::json(fp).dump() << ", \"mesh\": " << mesh_to_json(mesh)
      << "}\n";
  return mesh;
}

inline void save_chi_cache(const std::filesystem::path& dir, const std::string& fingerprint,
                           const std::vector<VecX>& chi) {
  std::filesystem::create_directories(dir);
  std::filesystem::path file = detail::cache_file(dir, "chi", fingerprint);
  std::ofstream out(file, std::ios::binary);
  if (!out) throw Error("cannot write cache file " + file.string());
  out << "{\"fingerprint\": " << nlohmann::json(fingerprint).dump() << ", \"chi\": [";
  for (std::size_t m = 0; m < chi.size(); ++m) {
    out << (m ? ", [" : "[");
    for (int i = 0; i < chi[m].size(); ++i) {
      if (i) out << ", ";
      out << format_double(chi[m][i]);
    }
    out << "]";
  }
  out << "]}\n";
}

/// Loads characteristic fields for the fingerprint; empty on miss. A present
/// but mismatching or unreadable entry warns and counts as a miss.
inline std::vector<VecX> load_chi_cache(const std::filesystem::path& dir,
                                        const std::string& fingerprint) {
  std::filesystem::path file = detail::cache_file(dir, "chi", fingerprint);
  std::string text;
  if (!detail::read_text(file, text)) return {};
  try {
    nlohmann::json root = nlohmann::json::parse(text);
    if (root.at("fingerprint").get<std::string>() != fingerprint)
      throw ConfigError("fingerprint mismatch");
    const nlohmann::json& arr = root.at("chi");
    std::vector<VecX> chi;
    for (const auto& row : arr) {
      VecX v(int(row.size()));
      for (int i = 0; i < v.size(); ++i) v[i] = row[std::size_t(i)].get<double>();
      chi.push_back(std::move(v));
    }
    return chi;
  } catch (const std::exception& e) {
    std::cerr << "warning: basis cache entry " << file.string() << " rejected (" << e.what()
              << "); recomputing\n";
    return {};
  }
}

/// compute_characteristics with a cache in front of the chi solves. The
/// operators are always rebuilt (factorizations are not portable artifacts);
/// only the solved fields and their Gram matrix are reused.
inline InclusionBasis cached_characteristics(const std::filesystem::path& dir, const Mesh& mesh,
                                             double tol, int threads = 1) {
  std::string fp = chi_fingerprint(mesh, tol, "chi");
  std::vector<VecX> chi = load_chi_cache(dir, fp);
  if (!chi.empty()) {
    InclusionBasis basis = build_inclusion_operators(mesh, threads);
    set_characteristics(basis, std::move(chi));
    return basis;
  }
  InclusionBasis basis = compute_characteristics(mesh, tol, threads);
  save_chi_cache(dir, fp, basis.chi);
  return basis;
}

}  // namespace hcx
