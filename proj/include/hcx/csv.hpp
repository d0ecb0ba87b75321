#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "hcx/common.hpp"
#include "hcx/elasticity.hpp"
#include "hcx/expansion.hpp"
#include "hcx/localized.hpp"
#include "hcx/mesh.hpp"
#include "hcx/oned.hpp"

namespace hcx {

/// RFC-4180 table writer with LF line endings and '.' decimals. Doubles go
/// through the shortest round-trip formatter so artifacts are byte-stable.
class CsvWriter {
 public:
  explicit CsvWriter(const std::vector<std::string>& header) : width_(header.size()) {
    for (const auto& h : header) cell(h);
    end_row();
  }

  void cell(const std::string& v) { cells_.push_back(quote(v)); }
  void cell(double v) { cells_.push_back(format_double(v)); }
  void cell(int v) { cells_.push_back(std::to_string(v)); }

  void end_row() {
    if (cells_.size() != width_)
      throw Error("csv row has " + std::to_string(cells_.size()) + " cells, expected " +
                  std::to_string(width_));
    for (std::size_t i = 0; i < cells_.size(); ++i) {
      if (i) body_ += ',';
      body_ += cells_[i];
    }
    body_ += '\n';
    cells_.clear();
  }

  template <class... Ts>
  void row(Ts&&... vs) {
    (cell(std::forward<Ts>(vs)), ...);
    end_row();
  }

  const std::string& str() const { return body_; }

  void save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << body_;
    if (!out) throw Error("write to " + path.string() + " failed");
  }

 private:
  static std::string quote(const std::string& v) {
    if (v.find_first_of(",\"\r\n") == std::string::npos) return v;
    std::string q = "\"";
    for (char c : v) {
      if (c == '"') q += '"';
      q += c;
    }
    q += '"';
    return q;
  }

  std::size_t width_;
  std::vector<std::string> cells_;
  std::string body_;
};

inline void write_field_csv(const std::filesystem::path& path, const Mesh& mesh, const VecX& u) {
  if (u.size() != int(mesh.nodes.size())) throw Error("field length does not match mesh");
  CsvWriter csv({"node_id", "x", "y", "value"});
  for (int i = 0; i < u.size(); ++i)
    csv.row(i, mesh.nodes[std::size_t(i)].x(), mesh.nodes[std::size_t(i)].y(), u[i]);
  csv.save(path);
}

inline void write_vector_field_csv(const std::filesystem::path& path, const Mesh& mesh,
                                   const VecX& u) {
  if (u.size() != 2 * int(mesh.nodes.size())) throw Error("vector field length does not match mesh");
  CsvWriter csv({"node_id", "x", "y", "ux", "uy"});
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i)
    csv.row(int(i), mesh.nodes[i].x(), mesh.nodes[i].y(), u[2 * int(i)], u[2 * int(i) + 1]);
  csv.save(path);
}

/// Balancing constants, one row per (term, inclusion). `block` is the number
/// of constants per inclusion (1 for pressure, 3 for elasticity).
inline void write_constants_csv(const std::filesystem::path& path,
                                const std::vector<VecX>& constants, int block = 1,
                                int j_first = 0) {
  CsvWriter csv(block == 1 ? std::vector<std::string>{"j", "m", "c"}
                           : std::vector<std::string>{"j", "m", "k", "c"});
  for (std::size_t j = 0; j < constants.size(); ++j) {
    const VecX& c = constants[j];
    for (int i = 0; i < c.size(); ++i) {
      csv.cell(int(j) + j_first);
      csv.cell(i / block + 1);
      if (block > 1) csv.cell(i % block);
      csv.cell(c[i]);
      csv.end_row();
    }
  }
  csv.save(path);
}

inline void write_truncation_csv(const std::filesystem::path& path,
                                 const std::vector<TruncationRow>& rows) {
  CsvWriter csv({"J", "eta", "rel_err_H1"});
  for (const auto& r : rows) csv.row(r.J, r.eta, r.rel_err_h1);
  csv.save(path);
}

inline void write_truncation_elastic_csv(const std::filesystem::path& path,
                                         const std::vector<ElasticTruncationRow>& rows,
                                         bool soft) {
  CsvWriter csv({"J", "contrast", "rel_err_H1", "mode"});
  for (const auto& r : rows)
    csv.row(r.J, r.contrast, r.rel_err_h1, std::string(soft ? "soft" : "stiff"));
  csv.save(path);
}

inline void write_terms_needed_csv(const std::filesystem::path& path,
                                   const std::vector<std::pair<double, int>>& rows) {
  CsvWriter csv({"eta", "terms"});
  for (const auto& [eta, terms] : rows) csv.row(eta, terms);
  csv.save(path);
}

inline void write_energy_csv(const std::filesystem::path& path, const EnergyReport& report) {
  CsvWriter csv({"eta", "direct_energy", "E0", "E1_over_eta", "remainder"});
  for (const auto& r : report.rows)
    csv.row(r.eta, r.direct, report.E0, report.E1 / r.eta, r.remainder);
  csv.save(path);
}

inline void write_delta_sweep_csv(const std::filesystem::path& path,
                                  const std::vector<DeltaSweepRow>& rows) {
  CsvWriter csv({"delta", "err_u0", "err_u00", "err_uc"});
  for (const auto& r : rows) csv.row(r.delta, r.err_u0, r.err_u00, r.err_uc);
  csv.save(path);
}

/// 1D expansion terms sampled at the grid nodes, one column per term.
inline void write_series_1d_csv(const std::filesystem::path& path, const Series1D& s) {
  std::vector<std::string> header{"x"};
  for (std::size_t j = 0; j < s.terms.size(); ++j) header.push_back("u" + std::to_string(j));
  CsvWriter csv(header);
  for (int i = 0; i < s.grid.size(); ++i) {
    csv.cell(s.grid[i]);
    for (const auto& t : s.terms) csv.cell(t.y[i]);
    csv.end_row();
  }
  csv.save(path);
}

inline void write_compare_1d_csv(const std::filesystem::path& path,
                                 const std::vector<Compare1DRow>& rows) {
  CsvWriter csv({"J", "eta", "max_err", "h1_err"});
  for (const auto& r : rows) csv.row(r.J, r.eta, r.max_err, r.h1_err);
  csv.save(path);
}

/// Run manifest: config hash, artifact list, library versions, wall timings.
/// Timings vary run to run; determinism guarantees cover the CSVs only.
struct Manifest {
  std::string config_hash;
  std::vector<std::string> artifacts;
  std::map<std::string, double> timings_ms;

  void add(const std::filesystem::path& p) { artifacts.push_back(p.filename().string()); }

  void save(const std::filesystem::path& path) const {
    std::string j = "{\n  \"config_hash\": \"" + config_hash + "\",\n  \"artifacts\": [";
    for (std::size_t i = 0; i < artifacts.size(); ++i) {
      if (i) j += ",";
      j += "\n    {\"file\": \"" + artifacts[i] + "\", \"config_hash\": \"" + config_hash + "\"}";
    }
    j += artifacts.empty() ? "],\n" : "\n  ],\n";
    j += "  \"versions\": {\"hcx\": \"0.1.0\", \"eigen\": \"" +
         std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
         std::to_string(EIGEN_MINOR_VERSION) + "\"},\n";
    j += "  \"timings_ms\": {";
    bool first = true;
    for (const auto& [k, v] : timings_ms) {
      if (!first) j += ", ";
      first = false;
      j += "\"" + k + "\": " + format_double(v);
    }
    j += "}\n}\n";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << j;
  }
};

/// Millisecond stopwatch for manifest timings.
class Stopwatch {
 public:
  Stopwatch() : t0_(std::chrono::steady_clock::now()) {}
  double ms() const {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point t0_;
};

}  // namespace hcx
