#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Cholesky>

#include "hcx/solve.hpp"

namespace hcx {

/// Plane-strain linear elasticity with Young's modulus E piecewise constant
/// (1 on the background, `contrast` on inclusions) and a shared Poisson
/// ratio. Stiff mode expands in 1/eta for contrast > 1; soft mode expands in
/// epsilon for 0 < contrast < 1 starting at the eps^-1 term.
struct ElasticProblem {
  const Mesh* mesh = nullptr;
  double nu = 0.3;
  double contrast = 10;
  enum class Mode { stiff, soft };
  Mode mode = Mode::stiff;
  VectorFn f;
  VectorFn g;
};

inline void check_elastic_problem(const ElasticProblem& p) {
  if (!p.mesh) throw ValidationError("problem has no mesh");
  if (!(p.nu > 0 && p.nu < 0.5)) throw GeometryError("Poisson ratio must lie in (0, 0.5)");
  if (p.mode == ElasticProblem::Mode::stiff && !(p.contrast > 1))
    throw GeometryError("stiff mode requires contrast > 1");
  if (p.mode == ElasticProblem::Mode::soft && !(p.contrast > 0 && p.contrast < 1))
    throw GeometryError("soft mode requires contrast in (0, 1)");
  if (!p.f || !p.g) throw ValidationError("problem needs f and g callables");
}

/// Lame-like parameters normalized by E: mu = 1/(2(1+nu)),
/// lambda = nu/((1+nu)(1-2nu)).
inline std::pair<double, double> normalized_lame(double nu) {
  return {1.0 / (2 * (1 + nu)), nu / ((1 + nu) * (1 - 2 * nu))};
}

/// Vector P1 stiffness of the bilinear form
///   integral E (2 mu eps(u):eps(v) + lambda div u div v),
/// node i carrying dofs 2i and 2i+1.
inline SpMat assemble_elastic_stiffness(const Mesh& mesh,
                                        const std::function<double(int)>& E_by_tag, double nu,
                                        const std::vector<int>& tags = {}) {
  detail::check_tags(mesh, tags);
  auto [mu, lam] = normalized_lame(nu);
  const int n = int(mesh.nodes.size());
  std::vector<Triplet> trip;
  trip.reserve(mesh.triangles.size() * 36);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    if (!detail::tag_selected(tags, tri.tag)) continue;
    ElementGeometry g = ElementGeometry::of(mesh, int(t));
    double E = E_by_tag(tri.tag);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const Vec2 &gi = g.grad[i], &gj = g.grad[j];
        double dot = gi.dot(gj);
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            double v = mu * ((a == b ? dot : 0.0) + gi[b] * gj[a]) + lam * gi[a] * gj[b];
            trip.emplace_back(2 * tri.v[i] + a, 2 * tri.v[j] + b, E * g.area * v);
          }
      }
  }
  SpMat K(2 * n, 2 * n);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

/// Block expansion of a scalar node matrix to both displacement components.
inline SpMat vectorize_scalar_matrix(const SpMat& S) {
  std::vector<Triplet> trip;
  trip.reserve(std::size_t(S.nonZeros()) * 2);
  for (int c = 0; c < S.outerSize(); ++c)
    for (SpMat::InnerIterator it(S, c); it; ++it) {
      trip.emplace_back(2 * int(it.row()), 2 * c, it.value());
      trip.emplace_back(2 * int(it.row()) + 1, 2 * c + 1, it.value());
    }
  SpMat V(2 * S.rows(), 2 * S.cols());
  V.setFromTriplets(trip.begin(), trip.end());
  return V;
}

inline VecX assemble_vector_load(const Mesh& mesh, const VectorFn& f,
                                 const std::vector<int>& tags = {}) {
  detail::check_tags(mesh, tags);
  VecX F = VecX::Zero(2 * mesh.nodes.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    if (!detail::tag_selected(tags, tri.tag)) continue;
    double area = mesh.area(int(t));
    const Vec2 &a = mesh.nodes[tri.v[0]], &b = mesh.nodes[tri.v[1]], &c = mesh.nodes[tri.v[2]];
    std::array<Vec2, 3> mid{0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)};
    std::array<Vec2, 3> fm{f(mid[0]), f(mid[1]), f(mid[2])};
    for (int comp = 0; comp < 2; ++comp) {
      F[2 * tri.v[0] + comp] += area / 3.0 * 0.5 * (fm[0][comp] + fm[2][comp]);
      F[2 * tri.v[1] + comp] += area / 3.0 * 0.5 * (fm[0][comp] + fm[1][comp]);
      F[2 * tri.v[2] + comp] += area / 3.0 * 0.5 * (fm[1][comp] + fm[2][comp]);
    }
  }
  return F;
}

inline VecX interpolate_vector(const Mesh& mesh, const VectorFn& f) {
  VecX u(2 * mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
    Vec2 v = f(mesh.nodes[i]);
    u[2 * int(i)] = v.x();
    u[2 * int(i) + 1] = v.y();
  }
  return u;
}

/// Plane rigid-body modes: translations and the rotation (x2, -x1).
inline VectorFn rigid_body_mode(int k) {
  switch (k) {
    case 0: return [](const Vec2&) { return Vec2(1, 0); };
    case 1: return [](const Vec2&) { return Vec2(0, 1); };
    case 2: return [](const Vec2& x) { return Vec2(x.y(), -x.x()); };
    default: throw ValidationError("rigid body mode index must be 0, 1, or 2");
  }
}

/// Rigid-body characteristic fields chi_{m,k}: equal to the k-th rigid mode
/// on inclusion m, zero on the other inclusions and the outer boundary,
/// elastically harmonic in the background. Column order: (m-1)*3 + k.
struct ElasticBasis {
  const Mesh* mesh = nullptr;
  double nu = 0.3;
  SubdomainIndex idx;
  SpMat K1;     // E == 1 everywhere
  SpMat Kbg;    // background elements
  SpMat Mv;     // vector mass
  SpMat Kgrad;  // componentwise gradient seminorm matrix
  ReducedOperator harmonic;
  std::vector<SaddleOperator> cell;       // per inclusion, 3 constraints
  std::vector<ReducedOperator> interior;  // per inclusion, Dirichlet on interface
  std::vector<SpMat> Kcell;               // per inclusion local stiffness
  std::vector<VecX> chi;
  MatX A;
  Eigen::LLT<MatX> A_llt;
};

inline ElasticBasis compute_elastic_basis(const Mesh& mesh, double nu, double tol = 1e-10,
                                          int threads = 1) {
  ElasticBasis basis;
  basis.mesh = &mesh;
  basis.nu = nu;
  basis.idx = SubdomainIndex::build(mesh);
  basis.K1 = assemble_elastic_stiffness(
      mesh, [](int) { return 1.0; }, nu);
  basis.Kbg = assemble_elastic_stiffness(
      mesh, [](int) { return 1.0; }, nu, {0});
  SpMat Mscalar = assemble_mass(mesh);
  SpMat Kscalar = assemble_stiffness(mesh);
  basis.Mv = vectorize_scalar_matrix(Mscalar);
  basis.Kgrad = vectorize_scalar_matrix(Kscalar);
  const int n = int(mesh.nodes.size());
  const int m_count = mesh.num_inclusions;

  std::vector<char> constrained(2 * n, 0);
  for (int v = 0; v < n; ++v)
    if (basis.idx.is_outer[std::size_t(v)] || basis.idx.inclusion_of[std::size_t(v)] != 0)
      constrained[std::size_t(2 * v)] = constrained[std::size_t(2 * v + 1)] = 1;
  basis.harmonic = ReducedOperator::build(basis.K1, constrained);

  basis.cell.resize(m_count);
  basis.interior.resize(m_count);
  basis.Kcell.resize(m_count);
  parallel_for(m_count, threads, [&](int mi) {
    int m = mi + 1;
    const std::vector<int>& nodes = basis.idx.inclusion_nodes[std::size_t(mi)];
    std::vector<int> pos(n, -1);
    for (std::size_t i = 0; i < nodes.size(); ++i) pos[std::size_t(nodes[i])] = int(i);
    auto [mu, lam] = normalized_lame(nu);
    std::vector<Triplet> trip;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      if (mesh.triangles[t].tag != m) continue;
      ElementGeometry g = ElementGeometry::of(mesh, int(t));
      const auto& v = mesh.triangles[t].v;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
          const Vec2 &gi = g.grad[i], &gj = g.grad[j];
          double dot = gi.dot(gj);
          for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
              double val = mu * ((a == b ? dot : 0.0) + gi[b] * gj[a]) + lam * gi[a] * gj[b];
              trip.emplace_back(2 * pos[std::size_t(v[i])] + a, 2 * pos[std::size_t(v[j])] + b,
                                g.area * val);
            }
        }
    }
    SpMat Kloc(2 * int(nodes.size()), 2 * int(nodes.size()));
    Kloc.setFromTriplets(trip.begin(), trip.end());
    basis.Kcell[std::size_t(mi)] = Kloc;

    VecX w = lumped_mass(mesh, {m});
    std::vector<VecX> cons;
    for (int k = 0; k < 3; ++k) {
      VectorFn rb = rigid_body_mode(k);
      VecX cv = VecX::Zero(2 * int(nodes.size()));
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        Vec2 r = rb(mesh.nodes[std::size_t(nodes[i])]);
        cv[2 * int(i)] = w[nodes[i]] * r.x();
        cv[2 * int(i) + 1] = w[nodes[i]] * r.y();
      }
      cons.push_back(cv);
    }
    basis.cell[std::size_t(mi)] = SaddleOperator::build(Kloc, cons);

    std::set<int> iface(basis.idx.interface_nodes[std::size_t(mi)].begin(),
                        basis.idx.interface_nodes[std::size_t(mi)].end());
    std::vector<char> cmask(2 * nodes.size(), 0);
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (iface.count(nodes[i])) cmask[2 * i] = cmask[2 * i + 1] = 1;
    basis.interior[std::size_t(mi)] = ReducedOperator::build(Kloc, cmask);
  });

  basis.chi.resize(std::size_t(3) * m_count);
  VecX zero = VecX::Zero(2 * n);
  for (int mi = 0; mi < m_count; ++mi)
    for (int k = 0; k < 3; ++k) {
      VectorFn rb = rigid_body_mode(k);
      VecX fixed = VecX::Zero(2 * n);
      for (int v : basis.idx.inclusion_nodes[std::size_t(mi)]) {
        Vec2 r = rb(mesh.nodes[std::size_t(v)]);
        fixed[2 * v] = r.x();
        fixed[2 * v + 1] = r.y();
      }
      basis.chi[std::size_t(3 * mi + k)] = basis.harmonic.solve(basis.K1, zero, fixed, tol);
    }

  const int nb = 3 * m_count;
  basis.A = MatX(nb, nb);
  for (int a = 0; a < nb; ++a) {
    VecX Ka = basis.K1 * basis.chi[std::size_t(a)];
    for (int b = 0; b <= a; ++b) {
      double v = basis.chi[std::size_t(b)].dot(Ka);
      basis.A(a, b) = v;
      basis.A(b, a) = v;
    }
  }
  basis.A_llt.compute(basis.A);
  if (basis.A_llt.info() != Eigen::Success)
    throw SolverError("elastic coarse Gram matrix is not positive definite");
  return basis;
}

struct ElasticSeries {
  int j_min = 0;               // 0 for stiff, -1 for soft
  std::vector<VecX> terms;     // terms[i] = u_{j_min + i}
  std::vector<VecX> constants; // stiff mode: rigid-body constants per term
  double max_constraint_violation = 0;
};

namespace detail {

inline VecX elastic_boundary_values(const ElasticProblem& p, const SubdomainIndex& idx) {
  VecX fixed = VecX::Zero(2 * p.mesh->nodes.size());
  for (int v = 0; v < int(p.mesh->nodes.size()); ++v)
    if (idx.is_outer[std::size_t(v)]) {
      Vec2 gv = p.g(p.mesh->nodes[std::size_t(v)]);
      fixed[2 * v] = gv.x();
      fixed[2 * v + 1] = gv.y();
    }
  return fixed;
}

/// Elastic-harmonic Dirichlet extension of the interface trace of u into
/// every inclusion (overwrites interior dofs).
inline void extend_into_inclusions(const ElasticBasis& basis, VecX& u, double tol) {
  const Mesh& mesh = *basis.mesh;
  for (int mi = 0; mi < mesh.num_inclusions; ++mi) {
    const std::vector<int>& nodes = basis.idx.inclusion_nodes[std::size_t(mi)];
    VecX fixed = VecX::Zero(2 * int(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      fixed[2 * int(i)] = u[2 * nodes[i]];
      fixed[2 * int(i) + 1] = u[2 * nodes[i] + 1];
    }
    VecX zero = VecX::Zero(2 * int(nodes.size()));
    VecX local = basis.interior[std::size_t(mi)].solve(basis.Kcell[std::size_t(mi)], zero, fixed, tol);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      u[2 * nodes[i]] = local[2 * int(i)];
      u[2 * nodes[i] + 1] = local[2 * int(i) + 1];
    }
  }
}

}  // namespace detail

/// Stiff-inclusion series: u_0 = u00 + rigid-body coarse part, then balanced
/// zero-rigid-body corrections, mirroring the scalar pipeline with three
/// constraints per inclusion.
inline ElasticSeries expand_stiff_elastic(const ElasticProblem& p, const ElasticBasis& basis,
                                          int J, double tol = 1e-10, int threads = 1) {
  check_elastic_problem(p);
  const Mesh& mesh = *p.mesh;
  const int n2 = int(basis.K1.rows());
  const int m_count = mesh.num_inclusions;
  const int nb = 3 * m_count;
  VecX F = assemble_vector_load(mesh, p.f);

  VecX fixed = detail::elastic_boundary_values(p, basis.idx);
  VecX u00 = basis.harmonic.solve(basis.K1, F, fixed, tol);
  VecX r = F - basis.K1 * u00;
  VecX b(nb);
  for (int i = 0; i < nb; ++i) b[i] = basis.chi[std::size_t(i)].dot(r);
  VecX c = basis.A_llt.solve(b);
  VecX u0 = u00;
  for (int i = 0; i < nb; ++i) u0 += c[i] * basis.chi[std::size_t(i)];

  ElasticSeries series;
  series.j_min = 0;
  series.terms.push_back(u0);
  series.constants.push_back(c);

  for (int j = 0; j < J; ++j) {
    const VecX& prev = series.terms.back();
    const bool first = j == 0;
    VecX rhs_full = first ? VecX(F - basis.K1 * prev) : VecX(-(basis.Kbg * prev));
    VecX cellwise = VecX::Zero(n2);
    std::vector<VecX> local(m_count);
    std::vector<double> violation(std::size_t(m_count), 0.0);
    parallel_for(m_count, threads, [&](int mi) {
      const std::vector<int>& nodes = basis.idx.inclusion_nodes[std::size_t(mi)];
      VecX rhs(2 * int(nodes.size()));
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        rhs[2 * int(i)] = rhs_full[2 * nodes[i]];
        rhs[2 * int(i) + 1] = rhs_full[2 * nodes[i] + 1];
      }
      SaddleSolution sol = basis.cell[std::size_t(mi)].solve(rhs, tol);
      local[std::size_t(mi)] = sol.u;
      violation[std::size_t(mi)] = sol.constraint_violation;
    });
    for (int mi = 0; mi < m_count; ++mi) {
      const std::vector<int>& nodes = basis.idx.inclusion_nodes[std::size_t(mi)];
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        cellwise[2 * nodes[i]] = local[std::size_t(mi)][2 * int(i)];
        cellwise[2 * nodes[i] + 1] = local[std::size_t(mi)][2 * int(i) + 1];
      }
      series.max_constraint_violation =
          std::max(series.max_constraint_violation, violation[std::size_t(mi)]);
    }
    VecX zero = VecX::Zero(n2);
    VecX tilde = basis.harmonic.solve(basis.K1, zero, cellwise, tol);
    VecX Kt = basis.K1 * tilde;
    VecX y(nb);
    for (int i = 0; i < nb; ++i) y[i] = -basis.chi[std::size_t(i)].dot(Kt);
    VecX x = basis.A_llt.solve(y);
    VecX u_next = tilde;
    for (int i = 0; i < nb; ++i) u_next += x[i] * basis.chi[std::size_t(i)];
    series.terms.push_back(u_next);
    series.constants.push_back(x);
  }
  return series;
}

/// Soft-inclusion series in epsilon: u_{-1} is the inclusion-local Dirichlet
/// response to f, u_0 couples it to the background through the interface
/// traction, and later terms propagate tractions back and forth.
inline ElasticSeries expand_soft_elastic(const ElasticProblem& p, const ElasticBasis& basis,
                                         int J, double tol = 1e-10) {
  check_elastic_problem(p);
  const Mesh& mesh = *p.mesh;
  const int n = int(mesh.nodes.size());
  VecX F = assemble_vector_load(mesh, p.f);
  SpMat Kinc = basis.K1 - basis.Kbg;

  // Background operator: outer boundary and inclusion interiors constrained.
  std::vector<char> constrained(std::size_t(2 * n), 0);
  for (int v = 0; v < n; ++v)
    if (basis.idx.is_outer[std::size_t(v)])
      constrained[std::size_t(2 * v)] = constrained[std::size_t(2 * v + 1)] = 1;
  for (int mi = 0; mi < mesh.num_inclusions; ++mi)
    for (int v : basis.idx.inclusion_interior(mi + 1))
      constrained[std::size_t(2 * v)] = constrained[std::size_t(2 * v + 1)] = 1;
  ReducedOperator background = ReducedOperator::build(basis.Kbg, constrained);

  // u_{-1}: Dirichlet response to f inside each inclusion, zero elsewhere.
  VecX um1 = VecX::Zero(2 * n);
  for (int mi = 0; mi < mesh.num_inclusions; ++mi) {
    const std::vector<int>& nodes = basis.idx.inclusion_nodes[std::size_t(mi)];
    VecX rhs(2 * int(nodes.size()));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      rhs[2 * int(i)] = F[2 * nodes[i]];
      rhs[2 * int(i) + 1] = F[2 * nodes[i] + 1];
    }
    VecX zfix = VecX::Zero(2 * int(nodes.size()));
    VecX local = basis.interior[std::size_t(mi)].solve(basis.Kcell[std::size_t(mi)], rhs, zfix, tol);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      um1[2 * nodes[i]] = local[2 * int(i)];
      um1[2 * nodes[i] + 1] = local[2 * int(i) + 1];
    }
  }

  ElasticSeries series;
  series.j_min = -1;
  series.terms.push_back(um1);

  // u_0: background problem driven by f and the u_{-1} interface traction.
  VecX fixed = detail::elastic_boundary_values(p, basis.idx);
  VecX rhs0 = F - Kinc * um1;
  VecX u0 = background.solve(basis.Kbg, rhs0, fixed, tol);
  detail::extend_into_inclusions(basis, u0, tol);
  series.terms.push_back(u0);

  for (int j = 1; j <= J; ++j) {
    const VecX& prev = series.terms.back();
    VecX rhs = -(Kinc * prev);
    VecX zero_fixed = VecX::Zero(2 * n);
    VecX uj = background.solve(basis.Kbg, rhs, zero_fixed, tol);
    detail::extend_into_inclusions(basis, uj, tol);
    series.terms.push_back(uj);
  }
  return series;
}

inline ElasticSeries expand_elastic(const ElasticProblem& p, const ElasticBasis& basis, int J,
                                    double tol = 1e-10, int threads = 1) {
  if (p.mode == ElasticProblem::Mode::stiff)
    return expand_stiff_elastic(p, basis, J, tol, threads);
  return expand_soft_elastic(p, basis, J, tol);
}

/// S_J = sum_{j <= J} contrast^j u_j, starting at j_min. In stiff mode the
/// natural variable is 1/eta, so contrast^-j weights the terms.
inline VecX partial_sum_elastic(const ElasticSeries& series, const ElasticProblem& p, int J) {
  int lo = series.j_min;
  if (J < lo || J - lo >= int(series.terms.size()))
    throw ValidationError("partial sum order outside the computed series");
  VecX s = VecX::Zero(series.terms[0].size());
  for (int j = lo; j <= J; ++j) {
    double w = p.mode == ElasticProblem::Mode::stiff ? std::pow(p.contrast, -j)
                                                     : std::pow(p.contrast, j);
    s += w * series.terms[std::size_t(j - lo)];
  }
  return s;
}

inline VecX solve_direct_elastic(const ElasticProblem& p, double tol = 1e-10) {
  check_elastic_problem(p);
  const Mesh& mesh = *p.mesh;
  SpMat K = assemble_elastic_stiffness(
      mesh, [&](int tag) { return tag == 0 ? 1.0 : p.contrast; }, p.nu);
  VecX F = assemble_vector_load(mesh, p.f);
  SubdomainIndex idx = SubdomainIndex::build(mesh);
  std::vector<char> constrained(std::size_t(2 * mesh.nodes.size()), 0);
  VecX fixed = detail::elastic_boundary_values(p, idx);
  for (int v = 0; v < int(mesh.nodes.size()); ++v)
    if (idx.is_outer[std::size_t(v)])
      constrained[std::size_t(2 * v)] = constrained[std::size_t(2 * v + 1)] = 1;
  ReducedOperator op = ReducedOperator::build(K, constrained);
  return op.solve(K, F, fixed, tol);
}

struct ElasticTruncationRow {
  int J;
  double contrast;
  double rel_err_h1;
};

/// Relative vector-H1 errors of partial sums against direct solves.
inline std::vector<ElasticTruncationRow> truncation_report_elastic(
    const ElasticProblem& p, const ElasticBasis& basis, const ElasticSeries& series,
    const std::vector<double>& contrasts, int J_max, double tol = 1e-10) {
  std::vector<ElasticTruncationRow> rows;
  J_max = std::min(J_max, series.j_min + int(series.terms.size()) - 1);
  for (double contrast : contrasts) {
    ElasticProblem q = p;
    q.contrast = contrast;
    VecX u = solve_direct_elastic(q, tol);
    double un = field_norms(u, basis.Mv, basis.Kgrad).h1;
    for (int J = series.j_min; J <= J_max; ++J) {
      VecX e = u - partial_sum_elastic(series, q, J);
      rows.push_back({J, contrast, field_norms(e, basis.Mv, basis.Kgrad).h1 / un});
    }
  }
  return rows;
}

/// Max nodal deviation of u from its best rigid-body fit on inclusion m.
inline double rigid_body_fit_residual(const Mesh& mesh, const SubdomainIndex& idx, int m,
                                      const VecX& u) {
  const std::vector<int>& nodes = idx.inclusion_nodes[std::size_t(m - 1)];
  MatX B(2 * nodes.size(), 3);
  VecX rhs(2 * nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const Vec2& x = mesh.nodes[std::size_t(nodes[i])];
    B(2 * int(i), 0) = 1;
    B(2 * int(i), 1) = 0;
    B(2 * int(i), 2) = x.y();
    B(2 * int(i) + 1, 0) = 0;
    B(2 * int(i) + 1, 1) = 1;
    B(2 * int(i) + 1, 2) = -x.x();
    rhs[2 * int(i)] = u[2 * nodes[i]];
    rhs[2 * int(i) + 1] = u[2 * nodes[i] + 1];
  }
  VecX coef = (B.transpose() * B).ldlt().solve(B.transpose() * rhs);
  return (B * coef - rhs).cwiseAbs().maxCoeff();
}

}  // namespace hcx
