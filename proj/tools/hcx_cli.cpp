// Command-line front end: mesh generation, direct solves, series expansion,
// localization sweeps, and report emission. Every run drops deterministic CSV
// artifacts plus a manifest naming the producing config hash.

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <thread>

#include <CLI11.hpp>

#include "hcx/hcx.hpp"

namespace fs = std::filesystem;
using namespace hcx;

namespace {

struct CommonOpts {
  std::string config;
  std::string out;
  int threads = -1;
  double tol = -1;
  int jmax = -1;
};

void add_common(CLI::App* sub, CommonOpts& o) {
  sub->add_option("--config", o.config, "experiment config (JSON)");
  sub->add_option("--out", o.out, "output directory (overrides config)");
  sub->add_option("--threads", o.threads, "worker threads, 0 = all cores");
  sub->add_option("--tol", o.tol, "solver and report tolerance override");
  sub->add_option("--jmax", o.jmax, "number of correction terms override");
}

ExperimentConfig load_config(const CommonOpts& o, bool config_required) {
  ExperimentConfig cfg;
  if (!o.config.empty())
    cfg = parse_config(o.config);
  else if (config_required)
    throw ConfigError("--config is required for this command");
  if (!o.out.empty()) cfg.out = o.out;
  if (o.threads >= 0) cfg.threads = o.threads;
  if (o.tol > 0) {
    cfg.tol = o.tol;
    cfg.solver_tol = o.tol;
  }
  if (o.jmax >= 0) cfg.j_max = o.jmax;
  return cfg;
}

int resolve_threads(int t) {
  if (t > 0) return t;
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? int(hw) : 1;
}

/// Collects artifacts in the output directory; on failure every file written
/// by this run is removed so reruns never see partial output.
struct Sink {
  fs::path dir;
  Manifest manifest;
  std::vector<fs::path> written;
  Stopwatch total;
  bool finished = false;

  explicit Sink(const ExperimentConfig& cfg) : dir(cfg.out) {
    manifest.config_hash = config_hash(cfg);
    fs::create_directories(dir);
  }

  ~Sink() {
    if (finished) return;
    for (const fs::path& p : written) {
      std::error_code ec;
      fs::remove(p, ec);
    }
  }

  fs::path note(const std::string& name) {
    fs::path p = dir / name;
    manifest.add(p);
    written.push_back(p);
    return p;
  }

  void finish() {
    manifest.timings_ms["total"] = total.ms();
    manifest.save(dir / "manifest.json");
    for (const fs::path& p : written) std::cout << "wrote " << p.string() << "\n";
    std::cout << "wrote " << (dir / "manifest.json").string() << "\n";
    finished = true;
  }
};

Mesh obtain_mesh(const ExperimentConfig& cfg, int threads, Sink* sink = nullptr) {
  Stopwatch sw;
  Mesh mesh;
  if (!cfg.mesh_path.empty()) {
    mesh = read_mesh_json(cfg.mesh_path);
    for (int r = 0; r < cfg.refine; ++r) mesh = refine_uniform(mesh);
  } else if (!cfg.cache_dir.empty()) {
    mesh = cached_mesh(cfg.cache_dir, cfg.geometry, cfg.refine, threads);
  } else {
    mesh = generate_mesh(cfg.geometry);
    for (int r = 0; r < cfg.refine; ++r) mesh = refine_uniform(mesh);
  }
  if (sink) sink->manifest.timings_ms["mesh"] = sw.ms();
  return mesh;
}

InclusionBasis obtain_basis(const ExperimentConfig& cfg, const Mesh& mesh, int threads,
                            Sink* sink = nullptr) {
  Stopwatch sw;
  InclusionBasis basis = cfg.cache_dir.empty()
                             ? compute_characteristics(mesh, cfg.solver_tol, threads)
                             : cached_characteristics(cfg.cache_dir, mesh, cfg.solver_tol, threads);
  if (sink) sink->manifest.timings_ms["basis"] = sw.ms();
  return basis;
}

PressureProblem make_pressure(const ExperimentConfig& cfg, const Mesh& mesh, double eta) {
  PressureProblem p;
  p.mesh = &mesh;
  p.eta = eta;
  p.f = to_scalar_fn(cfg.f);
  p.g = to_scalar_fn(cfg.g);
  return p;
}

ElasticProblem make_elastic(const ExperimentConfig& cfg, const Mesh& mesh, double contrast) {
  ElasticProblem p;
  p.mesh = &mesh;
  p.nu = cfg.nu;
  p.contrast = contrast;
  p.mode = cfg.soft() ? ElasticProblem::Mode::soft : ElasticProblem::Mode::stiff;
  p.f = to_vector_fn(cfg.fv);
  p.g = to_vector_fn(cfg.gv);
  return p;
}

void cmd_mesh_gen(const ExperimentConfig& cfg) {
  Sink sink(cfg);
  int threads = resolve_threads(cfg.threads);
  Mesh mesh = obtain_mesh(cfg, threads, &sink);
  write_mesh_json(mesh, sink.note("mesh.json").string());
  QualityReport q = mesh_quality(mesh);
  std::cout << mesh.nodes.size() << " nodes, " << mesh.triangles.size() << " triangles, "
            << mesh.num_inclusions << " inclusions, h = " << format_double(q.h) << "\n";
  sink.finish();
}

void cmd_mesh_refine(const ExperimentConfig& cfg) {
  Sink sink(cfg);
  int threads = resolve_threads(cfg.threads);
  Mesh mesh = refine_uniform(obtain_mesh(cfg, threads, &sink));
  write_mesh_json(mesh, sink.note("mesh.json").string());
  sink.finish();
}

void cmd_mesh_check(const ExperimentConfig& cfg) {
  int threads = resolve_threads(cfg.threads);
  Mesh mesh = obtain_mesh(cfg, threads);
  validate_mesh(mesh);
  QualityReport q = mesh_quality(mesh);
  std::cout << "mesh ok: " << mesh.nodes.size() << " nodes, " << mesh.triangles.size()
            << " triangles, " << mesh.num_inclusions << " inclusions\n"
            << "h = " << format_double(q.h) << ", min angle = " << format_double(q.min_angle_deg)
            << " deg, max aspect ratio = " << format_double(q.max_aspect_ratio) << " (element "
            << q.worst_element << ")\n";
}

void cmd_solve_direct(const ExperimentConfig& cfg) {
  Sink sink(cfg);
  int threads = resolve_threads(cfg.threads);
  Mesh mesh = obtain_mesh(cfg, threads, &sink);
  Stopwatch sw;
  for (double contrast : cfg.contrast) {
    std::string name = "direct_" + std::string(cfg.elastic() && cfg.soft() ? "eps" : "eta") +
                       format_double(contrast) + ".csv";
    if (cfg.elastic()) {
      VecX u = solve_direct_elastic(make_elastic(cfg, mesh, contrast), cfg.solver_tol);
      write_vector_field_csv(sink.note(name), mesh, u);
    } else {
      VecX u = solve_direct(make_pressure(cfg, mesh, contrast), cfg.solver_tol);
      write_field_csv(sink.note(name), mesh, u);
    }
  }
  sink.manifest.timings_ms["solve"] = sw.ms();
  sink.finish();
}

void cmd_expand_pressure(const ExperimentConfig& cfg) {
  Sink sink(cfg);
  int threads = resolve_threads(cfg.threads);
  Mesh mesh = obtain_mesh(cfg, threads, &sink);
  InclusionBasis basis = obtain_basis(cfg, mesh, threads, &sink);
  Stopwatch sw;
  PressureProblem p = make_pressure(cfg, mesh, cfg.contrast.front());
  ExpansionSeries series = expand(p, basis, cfg.j_max, cfg.solver_tol, threads);
  sink.manifest.timings_ms["series"] = sw.ms();
  for (std::size_t j = 0; j < series.terms.size(); ++j)
    write_field_csv(sink.note("term_" + std::to_string(j) + ".csv"), mesh, series.terms[j]);
  write_constants_csv(sink.note("constants.csv"), series.constants);
  std::cout << series.terms.size() << " terms, max flux imbalance "
            << format_double(series.max_flux_imbalance) << ", max constraint violation "
            << format_double(series.max_constraint_violation) << "\n";
  sink.finish();
}

void cmd_expand_elastic(const ExperimentConfig& cfg) {
  Sink sink(cfg);
  int threads = resolve_threads(cfg.threads);
  Mesh mesh = obtain_mesh(cfg, threads, &sink);
  Stopwatch sw;
  ElasticBasis basis = compute_elastic_basis(mesh, cfg.nu, cfg.solver_tol, threads);
  sink.manifest.timings_ms["basis"] = sw.ms();
  ElasticProblem p = make_elastic(cfg, mesh, cfg.contrast.front());
  Stopwatch sw2;
  ElasticSeries series = expand_elastic(p, basis, cfg.j_max, cfg.solver_tol, threads);
  sink.manifest.timings_ms["series"] = sw2.ms();
  for (std::size_t i = 0; i < series.terms.size(); ++i) {
    int j = series.j_min + int(i);
    write_vector_field_csv(sink.note("term_" + std::to_string(j) + ".csv"), mesh,
                           series.terms[i]);
  }
  if (!series.constants.empty())
    write_constants_csv(sink.note("constants.csv"), series.constants, 3, series.j_min);
  std::cout << series.terms.size() << " terms starting at j = " << series.j_min
            << ", max constraint violation " << format_double(series.max_constraint_violation)
            << "\n";
  sink.finish();
}

void cmd_sweep_delta(const ExperimentConfig& cfg) {
  if (cfg.elastic()) throw ConfigError("sweep delta applies to the pressure problem");
  Sink sink(cfg);
  int threads = resolve_threads(cfg.threads);
  Mesh mesh = obtain_mesh(cfg, threads, &sink);
  InclusionBasis basis = obtain_basis(cfg, mesh, threads, &sink);
  Stopwatch sw;
  PressureProblem p = make_pressure(cfg, mesh, cfg.contrast.front());
  std::vector<DeltaSweepRow> rows = delta_error_sweep(p, basis, cfg.deltas, cfg.solver_tol, threads);
  sink.manifest.timings_ms["sweep"] = sw.ms();
  write_delta_sweep_csv(sink.note("delta_sweep.csv"), rows);
  sink.finish();
}

void cmd_report_error(const ExperimentConfig& cfg) {
  Sink sink(cfg);
  int threads = resolve_threads(cfg.threads);
  Mesh mesh = obtain_mesh(cfg, threads, &sink);
  Stopwatch sw;
  if (cfg.elastic()) {
    ElasticBasis basis = compute_elastic_basis(mesh, cfg.nu, cfg.solver_tol, threads);
    ElasticProblem p = make_elastic(cfg, mesh, cfg.contrast.front());
    ElasticSeries series = expand_elastic(p, basis, cfg.j_max, cfg.solver_tol, threads);
    std::vector<ElasticTruncationRow> rows =
        truncation_report_elastic(p, basis, series, cfg.contrast, cfg.j_max, cfg.solver_tol);
    write_truncation_elastic_csv(sink.note("error_report.csv"), rows, cfg.soft());
  } else {
    InclusionBasis basis = obtain_basis(cfg, mesh, threads, &sink);
    PressureProblem p = make_pressure(cfg, mesh, cfg.contrast.front());
    ExpansionSeries series = expand(p, basis, cfg.j_max, cfg.solver_tol, threads);
    std::vector<TruncationRow> rows =
        truncation_report(p, basis, series, cfg.contrast, cfg.j_max);
    write_truncation_csv(sink.note("error_report.csv"), rows);
  }
  sink.manifest.timings_ms["report"] = sw.ms();
  sink.finish();
}

void cmd_report_energy(const ExperimentConfig& cfg) {
  if (cfg.elastic()) throw ConfigError("report energy applies to the pressure problem");
  Sink sink(cfg);
  int threads = resolve_threads(cfg.threads);
  Mesh mesh = obtain_mesh(cfg, threads, &sink);
  InclusionBasis basis = obtain_basis(cfg, mesh, threads, &sink);
  Stopwatch sw;
  PressureProblem p = make_pressure(cfg, mesh, cfg.contrast.front());
  ExpansionSeries series = expand(p, basis, 1, cfg.solver_tol, threads);
  EnergyReport report = energy_coefficients(p, basis, series, cfg.contrast, cfg.solver_tol);
  sink.manifest.timings_ms["report"] = sw.ms();
  write_energy_csv(sink.note("energy.csv"), report);
  sink.finish();
}

void cmd_report_terms_needed(const ExperimentConfig& cfg) {
  if (cfg.elastic()) throw ConfigError("report terms-needed applies to the pressure problem");
  Sink sink(cfg);
  int threads = resolve_threads(cfg.threads);
  Mesh mesh = obtain_mesh(cfg, threads, &sink);
  InclusionBasis basis = obtain_basis(cfg, mesh, threads, &sink);
  Stopwatch sw;
  PressureProblem p = make_pressure(cfg, mesh, cfg.contrast.front());
  ExpansionSeries series = expand(p, basis, cfg.j_max, cfg.solver_tol, threads);
  std::vector<TruncationRow> rows =
      truncation_report(p, basis, series, cfg.contrast, cfg.j_max);
  std::vector<std::pair<double, int>> needed;
  for (double eta : cfg.contrast) needed.emplace_back(eta, terms_needed(rows, eta, cfg.tol));
  sink.manifest.timings_ms["report"] = sw.ms();
  write_truncation_csv(sink.note("error_report.csv"), rows);
  write_terms_needed_csv(sink.note("terms_needed.csv"), needed);
  sink.finish();
}

void cmd_run_1d_example(const ExperimentConfig& cfg) {
  Sink sink(cfg);
  Interval1DSpec spec;
  spec.a = -2;
  spec.b = 2;
  spec.p = -1;
  spec.q = 1;
  spec.ua = 0;
  spec.ub = 4;
  Stopwatch sw;
  int J = std::min(cfg.j_max, 12);
  Series1D series = expansion_terms_1d(spec, J, cfg.solver_tol);
  std::vector<Compare1DRow> rows = compare_1d(spec, J, {2, 10, 100}, cfg.solver_tol);
  sink.manifest.timings_ms["run"] = sw.ms();
  write_series_1d_csv(sink.note("series_1d.csv"), series);
  CsvWriter cc({"j", "c"});
  for (int j = 0; j < series.c.size(); ++j) cc.row(j, series.c[j]);
  cc.save(sink.note("constants_1d.csv"));
  write_compare_1d_csv(sink.note("compare_1d.csv"), rows);
  sink.finish();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Asymptotic expansion toolkit for high-contrast elliptic problems"};
  app.require_subcommand(1);
  CommonOpts opts;
  std::function<void(const ExperimentConfig&)> handler;
  bool config_required = true;

  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& desc,
                  std::function<void(const ExperimentConfig&)> fn, bool requires_config = true) {
    CLI::App* sub = parent->add_subcommand(name, desc);
    add_common(sub, opts);
    sub->callback([&, fn, requires_config]() {
      handler = fn;
      config_required = requires_config;
    });
    return sub;
  };

  CLI::App* mesh = app.add_subcommand("mesh", "mesh generation and checks");
  mesh->require_subcommand(1);
  leaf(mesh, "gen", "generate a conforming mesh from the config geometry", cmd_mesh_gen);
  leaf(mesh, "refine", "refine the configured mesh once more", cmd_mesh_refine);
  leaf(mesh, "check", "validate the configured mesh and print quality stats", cmd_mesh_check);

  CLI::App* solve = app.add_subcommand("solve", "direct finite-element solves");
  solve->require_subcommand(1);
  leaf(solve, "direct", "direct solve per configured contrast", cmd_solve_direct);

  CLI::App* expand = app.add_subcommand("expand", "compute expansion terms");
  expand->require_subcommand(1);
  leaf(expand, "pressure", "scalar series terms and constants", cmd_expand_pressure);
  leaf(expand, "elastic", "elasticity series terms", cmd_expand_elastic);

  CLI::App* sweep = app.add_subcommand("sweep", "parameter sweeps");
  sweep->require_subcommand(1);
  leaf(sweep, "delta", "localization error against the global leading term", cmd_sweep_delta);

  CLI::App* report = app.add_subcommand("report", "error and energy reports");
  report->require_subcommand(1);
  leaf(report, "error", "partial-sum errors against direct solves", cmd_report_error);
  leaf(report, "energy", "two-term energy expansion remainders", cmd_report_energy);
  leaf(report, "terms-needed", "terms needed to reach the configured tolerance",
       cmd_report_terms_needed);

  CLI::App* run = app.add_subcommand("run", "built-in experiments");
  run->require_subcommand(1);
  leaf(run, "1d-example", "closed-form interval example with exact term values",
       cmd_run_1d_example, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    ExperimentConfig cfg = load_config(opts, config_required);
    handler(cfg);
    return 0;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const SolverError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}
