#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>

#include "hcx/solve.hpp"

namespace hcx {

/// High-contrast scalar problem: -div(kappa grad u) = f, u = g on the outer
/// boundary, kappa = 1 on the background and eta on every inclusion.
struct PressureProblem {
  const Mesh* mesh = nullptr;
  double eta = 10;
  ScalarFn f;
  ScalarFn g;
};

inline void check_pressure_problem(const PressureProblem& p) {
  if (!p.mesh) throw ValidationError("problem has no mesh");
  if (!(p.eta > 1)) throw GeometryError("contrast eta must exceed 1");
  if (!p.f || !p.g) throw ValidationError("problem needs f and g callables");
}

/// Harmonic characteristic fields of the inclusions and every factorization
/// the series recursion reuses. chi[m] equals 1 on inclusion m, 0 on the other
/// inclusions and the outer boundary, discrete-harmonic in between. A is the
/// coarse Gram matrix of the chi fields in the background energy product.
struct InclusionBasis {
  const Mesh* mesh = nullptr;
  SubdomainIndex idx;
  SpMat K1;   // unit-coefficient stiffness, all elements
  SpMat Kbg;  // background elements only
  SpMat M;    // mass, all elements
  ReducedOperator harmonic;          // free dofs: background interior
  std::vector<SaddleOperator> cell;  // per-inclusion Neumann operator
  std::vector<VecX> chi;
  MatX A;
  Eigen::LLT<MatX> A_llt;

  VecX balance(const VecX& b) const {
    VecX x = A_llt.solve(b);
    return x;
  }
};

/// Assembles the matrices and factorizations of the basis without solving for
/// the characteristic fields (those can be injected from a cache).
inline InclusionBasis build_inclusion_operators(const Mesh& mesh, int threads = 1) {
  InclusionBasis basis;
  basis.mesh = &mesh;
  basis.idx = SubdomainIndex::build(mesh);
  basis.K1 = assemble_stiffness(mesh);
  basis.Kbg = assemble_stiffness(mesh, std::vector<int>{0});
  basis.M = assemble_mass(mesh);
  const int n = int(mesh.nodes.size());
  const int m_count = mesh.num_inclusions;

  std::vector<char> constrained(n, 0);
  for (int v = 0; v < n; ++v)
    if (basis.idx.is_outer[std::size_t(v)] || basis.idx.inclusion_of[std::size_t(v)] != 0)
      constrained[std::size_t(v)] = 1;
  basis.harmonic = ReducedOperator::build(basis.K1, constrained);

  // Per-inclusion Neumann operators with a lumped zero-mean constraint.
  basis.cell.resize(m_count);
  parallel_for(m_count, threads, [&](int mi) {
    int m = mi + 1;
    const std::vector<int>& nodes = basis.idx.inclusion_nodes[std::size_t(mi)];
    std::vector<int> pos(n, -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) pos[std::size_t(nodes[i])] = int(i);
    std::vector<Triplet> trip;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      if (mesh.triangles[t].tag != m) continue;
      ElementGeometry g = ElementGeometry::of(mesh, int(t));
      const auto& v = mesh.triangles[t].v;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          trip.emplace_back(pos[std::size_t(v[i])], pos[std::size_t(v[j])],
                            g.area * g.grad[i].dot(g.grad[j]));
    }
    SpMat Kloc(int(nodes.size()), int(nodes.size()));
    Kloc.setFromTriplets(trip.begin(), trip.end());
    VecX w = lumped_mass(mesh, {m});
    VecX wloc(int(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) wloc[int(i)] = w[nodes[i]];
    basis.cell[std::size_t(mi)] = SaddleOperator::build(Kloc, {wloc});
  });
  return basis;
}

/// Installs characteristic fields (freshly solved or loaded) and builds the
/// coarse Gram matrix. Throws SolverError if it is not positive definite.
inline void set_characteristics(InclusionBasis& basis, std::vector<VecX> chi) {
  const int m_count = basis.mesh->num_inclusions;
  if (int(chi.size()) != m_count)
    throw ValidationError("characteristic field count does not match the mesh");
  for (const VecX& c : chi)
    if (c.size() != basis.K1.rows())
      throw ValidationError("characteristic field length does not match the mesh");
  basis.chi = std::move(chi);
  basis.A = MatX(m_count, m_count);
  for (int a = 0; a < m_count; ++a) {
    VecX Ka = basis.K1 * basis.chi[std::size_t(a)];
    for (int b = 0; b <= a; ++b) {
      double v = basis.chi[std::size_t(b)].dot(Ka);
      basis.A(a, b) = v;
      basis.A(b, a) = v;
    }
  }
  basis.A_llt.compute(basis.A);
  if (basis.A_llt.info() != Eigen::Success)
    throw SolverError("coarse Gram matrix is not positive definite");
}

/// Builds the characteristic fields and the coarse matrix.
inline InclusionBasis compute_characteristics(const Mesh& mesh, double tol = 1e-10,
                                              int threads = 1) {
  InclusionBasis basis = build_inclusion_operators(mesh, threads);
  const int n = int(mesh.nodes.size());
  const int m_count = mesh.num_inclusions;
  VecX zero = VecX::Zero(n);
  std::vector<VecX> chi;
  chi.resize(std::size_t(m_count));
  for (int mi = 0; mi < m_count; ++mi) {
    VecX fixed = VecX::Zero(n);
    for (int v : basis.idx.inclusion_nodes[std::size_t(mi)]) fixed[v] = 1.0;
    chi[std::size_t(mi)] = basis.harmonic.solve(basis.K1, zero, fixed, tol);
  }
  set_characteristics(basis, std::move(chi));
  return basis;
}

/// Background solution with zero trace on every inclusion: -lap u00 = f in the
/// background, u00 = g on the outer boundary, u00 = 0 on inclusion nodes.
inline VecX compute_u00(const PressureProblem& p, const InclusionBasis& basis, const VecX& F,
                        double tol = 1e-10) {
  VecX fixed = VecX::Zero(basis.K1.rows());
  for (int v = 0; v < int(basis.idx.is_outer.size()); ++v)
    if (basis.idx.is_outer[std::size_t(v)]) fixed[v] = p.g(p.mesh->nodes[std::size_t(v)]);
  return basis.harmonic.solve(basis.K1, F, fixed, tol);
}

/// Leading term u0 = u00 + sum_m c_m chi_m with the coarse system picking the
/// inclusion constants. Returns the field and the constants.
inline std::pair<VecX, VecX> compute_u0(const InclusionBasis& basis, const VecX& F,
                                        const VecX& u00) {
  VecX r = F - basis.K1 * u00;
  VecX b(basis.A.rows());
  for (int m = 0; m < basis.A.rows(); ++m) b[m] = basis.chi[std::size_t(m)].dot(r);
  VecX c = basis.balance(b);
  VecX u0 = u00;
  for (int m = 0; m < basis.A.rows(); ++m) u0 += c[m] * basis.chi[std::size_t(m)];
  return {u0, c};
}

/// Contrast-independent expansion terms u_j and their inclusion constants.
struct ExpansionSeries {
  std::vector<VecX> terms;     // terms[j] = u_j
  std::vector<VecX> constants; // constants[j][m] = c_{j,m}
  double max_flux_imbalance = 0;          // max_j,m |a(u_j, chi_m)| (j >= 1)
  double max_constraint_violation = 0;    // from the inclusion Neumann solves
};

/// Appends u_{j+1} to the series. For the first correction the cell load is
/// F - K1 u0 (interface flux plus interior source); afterwards the source has
/// been consumed and the load is the pure background flux -Kbg u_j.
inline void next_term(const PressureProblem& p, const InclusionBasis& basis, const VecX& F,
                      ExpansionSeries& series, double tol = 1e-10, int threads = 1) {
  const int n = int(basis.K1.rows());
  const int m_count = int(basis.chi.size());
  const VecX& prev = series.terms.back();
  const bool first = series.terms.size() == 1;
  VecX rhs_full = first ? VecX(F - basis.K1 * prev) : VecX(-(basis.Kbg * prev));

  VecX cellwise = VecX::Zero(n);
  std::vector<VecX> local(m_count);
  std::vector<double> violation(m_count, 0.0);
  parallel_for(m_count, threads, [&](int mi) {
    const std::vector<int>& nodes = basis.idx.inclusion_nodes[std::size_t(mi)];
    VecX rhs(int(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) rhs[int(i)] = rhs_full[nodes[i]];
    SaddleSolution sol = basis.cell[std::size_t(mi)].solve(rhs, tol);
    local[std::size_t(mi)] = sol.u;
    violation[std::size_t(mi)] = sol.constraint_violation;
  });
  for (int mi = 0; mi < m_count; ++mi) {
    const std::vector<int>& nodes = basis.idx.inclusion_nodes[std::size_t(mi)];
    for (std::size_t i = 0; i < nodes.size(); ++i)
      cellwise[nodes[i]] = local[std::size_t(mi)][int(i)];
    series.max_constraint_violation =
        std::max(series.max_constraint_violation, violation[std::size_t(mi)]);
  }

  // Harmonic extension into the background with zero outer trace.
  VecX zero = VecX::Zero(n);
  VecX tilde = basis.harmonic.solve(basis.K1, zero, cellwise, tol);

  // Balancing: remove the chi components so the flux functionals vanish.
  VecX Kt = basis.K1 * tilde;
  VecX y(m_count);
  for (int m = 0; m < m_count; ++m) y[m] = -basis.chi[std::size_t(m)].dot(Kt);
  VecX x = basis.balance(y);
  VecX u_next = tilde;
  for (int m = 0; m < m_count; ++m) u_next += x[m] * basis.chi[std::size_t(m)];

  VecX Ku = basis.K1 * u_next;
  double unorm = std::sqrt(std::max(0.0, u_next.dot(Ku)));
  for (int m = 0; m < m_count; ++m) {
    double anorm = std::sqrt(basis.A(m, m));
    double imb = std::abs(basis.chi[std::size_t(m)].dot(Ku));
    if (unorm > 0 && anorm > 0)
      series.max_flux_imbalance = std::max(series.max_flux_imbalance, imb / (unorm * anorm));
  }
  series.terms.push_back(u_next);
  series.constants.push_back(x);
}

/// Computes u_0 .. u_J. The terms do not depend on eta; the contrast enters
/// only through the partial sums.
inline ExpansionSeries expand(const PressureProblem& p, const InclusionBasis& basis, int J,
                              double tol = 1e-10, int threads = 1) {
  check_pressure_problem(p);
  VecX F = assemble_load(*p.mesh, p.f);
  VecX u00 = compute_u00(p, basis, F, tol);
  auto [u0, c0] = compute_u0(basis, F, u00);
  ExpansionSeries series;
  series.terms.push_back(u0);
  series.constants.push_back(c0);
  for (int j = 0; j < J; ++j) next_term(p, basis, F, series, tol, threads);
  return series;
}

inline ExpansionSeries expand(const PressureProblem& p, int J, double tol = 1e-10,
                              int threads = 1) {
  check_pressure_problem(p);
  InclusionBasis basis = compute_characteristics(*p.mesh, tol, threads);
  return expand(p, basis, J, tol, threads);
}

/// S_J = sum_{j<=J} eta^-j u_j.
inline VecX partial_sum(const ExpansionSeries& series, double eta, int J) {
  if (J < 0 || J >= int(series.terms.size()))
    throw ValidationError("partial sum order outside the computed series");
  VecX s = series.terms[0];
  double w = 1;
  for (int j = 1; j <= J; ++j) {
    w /= eta;
    s += w * series.terms[std::size_t(j)];
  }
  return s;
}

/// Reference solution with the true contrast, one sparse Dirichlet solve.
inline VecX solve_direct(const PressureProblem& p, double tol = 1e-10) {
  check_pressure_problem(p);
  const Mesh& mesh = *p.mesh;
  SpMat K = assemble_stiffness(mesh, [&](int tag) { return tag == 0 ? 1.0 : p.eta; });
  VecX F = assemble_load(mesh, p.f);
  SubdomainIndex idx = SubdomainIndex::build(mesh);
  std::vector<int> bnodes;
  for (int v = 0; v < int(mesh.nodes.size()); ++v)
    if (idx.is_outer[std::size_t(v)]) bnodes.push_back(v);
  VecX bvals(int(bnodes.size()));
  for (std::size_t i = 0; i < bnodes.size(); ++i) bvals[int(i)] = p.g(mesh.nodes[std::size_t(bnodes[i])]);
  return solve_dirichlet(K, F, bnodes, bvals, tol);
}

namespace detail {

/// Direct solve with the contrast folded in at extended precision. Rounding
/// the eta-scaled entries to working precision perturbs the zero row sums of
/// the stiff block by about eta times machine epsilon, and the near-kernel
/// of the operator turns that into an O(eta eps) shift of the solution
/// itself. A reference for truncation floors below that level has to build
/// the element matrices from the vertex coordinates and factor the system in
/// a wider type.
inline VecX solve_direct_extended(const PressureProblem& p, const SubdomainIndex& idx) {
  using Ld = long double;
  using LdSp = Eigen::SparseMatrix<Ld>;
  using LdVec = Eigen::Matrix<Ld, Eigen::Dynamic, 1>;
  const Mesh& mesh = *p.mesh;
  const int n = int(mesh.nodes.size());

  std::vector<Eigen::Triplet<Ld>> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (const Triangle& tri : mesh.triangles) {
    Ld x[3], y[3];
    for (int i = 0; i < 3; ++i) {
      x[i] = static_cast<Ld>(mesh.nodes[std::size_t(tri.v[std::size_t(i)])].x());
      y[i] = static_cast<Ld>(mesh.nodes[std::size_t(tri.v[std::size_t(i)])].y());
    }
    Ld bx[3] = {y[1] - y[2], y[2] - y[0], y[0] - y[1]};
    Ld by[3] = {x[2] - x[1], x[0] - x[2], x[1] - x[0]};
    Ld two_area = (x[1] - x[0]) * (y[2] - y[0]) - (x[2] - x[0]) * (y[1] - y[0]);
    Ld kappa = tri.tag == 0 ? Ld(1) : static_cast<Ld>(p.eta);
    Ld scale = kappa / (2 * two_area);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(tri.v[std::size_t(i)], tri.v[std::size_t(j)],
                          scale * (bx[i] * bx[j] + by[i] * by[j]));
  }
  LdSp K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());

  VecX F = assemble_load(mesh, p.f);
  std::vector<int> free_nodes, pos(std::size_t(n), -1);
  LdVec u = LdVec::Zero(n);
  for (int v = 0; v < n; ++v) {
    if (idx.is_outer[std::size_t(v)])
      u[v] = static_cast<Ld>(p.g(mesh.nodes[std::size_t(v)]));
    else {
      pos[std::size_t(v)] = int(free_nodes.size());
      free_nodes.push_back(v);
    }
  }
  std::vector<Eigen::Triplet<Ld>> ftrip;
  LdVec rf(int(free_nodes.size()));
  for (std::size_t i = 0; i < free_nodes.size(); ++i)
    rf[int(i)] = static_cast<Ld>(F[free_nodes[i]]);
  for (int c = 0; c < K.outerSize(); ++c)
    for (LdSp::InnerIterator it(K, c); it; ++it) {
      int r = int(it.row());
      if (pos[std::size_t(r)] < 0) continue;
      if (pos[std::size_t(c)] >= 0)
        ftrip.emplace_back(pos[std::size_t(r)], pos[std::size_t(c)], it.value());
      else
        rf[pos[std::size_t(r)]] -= it.value() * u[c];
    }
  LdSp Kff(int(free_nodes.size()), int(free_nodes.size()));
  Kff.setFromTriplets(ftrip.begin(), ftrip.end());
  Eigen::SimplicialLDLT<LdSp> ldlt(Kff);
  if (ldlt.info() != Eigen::Success)
    throw SolverError("extended-precision factorization failed");
  LdVec xf = ldlt.solve(rf);
  for (std::size_t i = 0; i < free_nodes.size(); ++i) u[free_nodes[i]] = xf[int(i)];

  VecX out(n);
  for (int v = 0; v < n; ++v) out[v] = static_cast<double>(u[v]);
  return out;
}

}  // namespace detail

struct TruncationRow {
  int J;
  double eta;
  double rel_err_h1;
};

/// Relative H1 errors of the partial sums against direct solves, for every
/// contrast in eta_list and J = 0..J_max. The per-contrast references come
/// from the extended-precision solve above; against a working-precision
/// direct solve the rows would bottom out at the O(eta eps) noise floor of
/// the contrast system instead of the series' own truncation error.
inline std::vector<TruncationRow> truncation_report(const PressureProblem& p,
                                                    const InclusionBasis& basis,
                                                    const ExpansionSeries& series,
                                                    const std::vector<double>& etas, int J_max) {
  std::vector<TruncationRow> rows;
  J_max = std::min(J_max, int(series.terms.size()) - 1);
  for (double eta : etas) {
    PressureProblem q = p;
    q.eta = eta;
    VecX u = detail::solve_direct_extended(q, basis.idx);
    double un = field_norms(u, basis.M, basis.K1).h1;
    VecX s = VecX::Zero(u.size());
    double w = 1;
    for (int J = 0; J <= J_max; ++J) {
      if (J > 0) w /= eta;
      s += w * series.terms[std::size_t(J)];
      VecX e = u - s;
      rows.push_back({J, eta, field_norms(e, basis.M, basis.K1).h1 / un});
    }
  }
  return rows;
}

/// Smallest number of terms (J + 1) reaching rel_tol for the given contrast,
/// or -1 when the series floor stays above the tolerance.
inline int terms_needed(const std::vector<TruncationRow>& rows, double eta, double rel_tol) {
  for (const TruncationRow& r : rows)
    if (r.eta == eta && r.rel_err_h1 <= rel_tol) return r.J + 1;
  return -1;
}

struct EnergyReport {
  double E0 = 0;  // background energy of u0
  double E1 = 0;  // inclusion energy of u1
  struct Row {
    double eta;
    double direct;     // energy of the direct solution
    double remainder;  // direct - E0 - E1/eta
  };
  std::vector<Row> rows;
};

/// Two-term energy expansion, valid for homogeneous Dirichlet data. Requires
/// g to evaluate to exactly zero on the outer boundary.
inline EnergyReport energy_coefficients(const PressureProblem& p, const InclusionBasis& basis,
                                        const ExpansionSeries& series,
                                        const std::vector<double>& etas, double tol = 1e-10) {
  for (int v = 0; v < int(p.mesh->nodes.size()); ++v)
    if (basis.idx.is_outer[std::size_t(v)] && p.g(p.mesh->nodes[std::size_t(v)]) != 0.0)
      throw ValidationError("energy expansion requires zero Dirichlet data");
  if (series.terms.size() < 2)
    throw ValidationError("energy expansion needs at least two series terms");
  EnergyReport rep;
  const VecX& u0 = series.terms[0];
  const VecX& u1 = series.terms[1];
  SpMat Kinc = basis.K1 - basis.Kbg;
  rep.E0 = u0.dot(basis.Kbg * u0);
  rep.E1 = u1.dot(Kinc * u1);
  for (double eta : etas) {
    PressureProblem q = p;
    q.eta = eta;
    VecX u = solve_direct(q, tol);
    SpMat Keta = assemble_stiffness(*p.mesh, [&](int tag) { return tag == 0 ? 1.0 : eta; });
    double direct = u.dot(Keta * u);
    rep.rows.push_back({eta, direct, direct - rep.E0 - rep.E1 / eta});
  }
  return rep;
}

}  // namespace hcx
