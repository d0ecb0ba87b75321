#pragma once

#include <cmath>
#include <vector>

#include "hcx/expansion.hpp"

namespace hcx {

/// Element and node masks of the delta-neighborhood D_{m,delta}: the inclusion
/// itself, the one-ring of elements touching it (so the annulus is never
/// empty), and every element whose centroid lies within delta of D_m.
struct DeltaNeighborhood {
  int m = 0;
  double delta = 0;
  std::vector<char> elem;
  std::vector<char> node;
};

namespace detail {

/// Distance from a point to inclusion m (zero inside). Uses the analytic shape
/// when the mesh carries one, the interface polygon otherwise.
inline double inclusion_distance(const Mesh& mesh, int m, const Vec2& p) {
  if (mesh.geometry) {
    double d = signed_distance(mesh.geometry->inclusions[std::size_t(m - 1)], p);
    return std::max(0.0, d);
  }
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.boundary_edges)
    if (e.tag == m)
      best = std::min(best, dist_point_segment(p, mesh.nodes[std::size_t(e.v[0])],
                                               mesh.nodes[std::size_t(e.v[1])]));
  return best;
}

/// Distance from an interior point to the outer boundary.
inline double outer_distance(const Mesh& mesh, const Vec2& p) {
  if (mesh.geometry) return std::abs(signed_distance(mesh.geometry->outer, p));
  double best = std::numeric_limits<double>::infinity();
  for (const auto& e : mesh.boundary_edges)
    if (e.tag == 0)
      best = std::min(best, dist_point_segment(p, mesh.nodes[std::size_t(e.v[0])],
                                               mesh.nodes[std::size_t(e.v[1])]));
  return best;
}

}  // namespace detail

inline DeltaNeighborhood build_neighborhood(const Mesh& mesh, const SubdomainIndex& idx, int m,
                                            double delta) {
  if (m < 1 || m > mesh.num_inclusions) throw ValidationError("inclusion index out of range");
  if (delta < 0) throw ValidationError("delta must be non-negative");
  DeltaNeighborhood nb;
  nb.m = m;
  nb.delta = delta;
  nb.elem.assign(mesh.triangles.size(), 0);
  nb.node.assign(mesh.nodes.size(), 0);

  std::vector<char> incl_node(mesh.nodes.size(), 0);
  for (int v : idx.inclusion_nodes[std::size_t(m - 1)]) incl_node[std::size_t(v)] = 1;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    bool in = tri.tag == m;
    if (!in)
      for (int v : tri.v)
        if (incl_node[std::size_t(v)]) in = true;  // one-ring
    if (!in && detail::inclusion_distance(mesh, m, mesh.centroid(int(t))) < delta) in = true;
    if (in) {
      nb.elem[t] = 1;
      for (int v : tri.v) nb.node[std::size_t(v)] = 1;
    }
  }
  return nb;
}

/// Localized characteristic fields: chi restricted to the delta-neighborhood,
/// with zero trace on the patch boundary. Exactly zero outside the patch.
struct LocalizedBasis {
  const Mesh* mesh = nullptr;
  double delta = 0;
  std::vector<DeltaNeighborhood> patches;
  std::vector<VecX> chi;
  MatX A;
  Eigen::LLT<MatX> A_llt;
};

inline LocalizedBasis localized_characteristics(const Mesh& mesh, const SubdomainIndex& idx,
                                                const SpMat& K1, double delta, double tol = 1e-10,
                                                int threads = 1) {
  LocalizedBasis basis;
  basis.mesh = &mesh;
  basis.delta = delta;
  const int m_count = mesh.num_inclusions;
  basis.patches.resize(m_count);
  basis.chi.assign(m_count, VecX());

  parallel_for(m_count, threads, [&](int mi) {
    int m = mi + 1;
    DeltaNeighborhood nb = build_neighborhood(mesh, idx, m, delta);

    // Patch-boundary nodes: shared with elements outside the patch.
    std::vector<char> patch_boundary(mesh.nodes.size(), 0);
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
      if (!nb.elem[t])
        for (int v : mesh.triangles[t].v)
          if (nb.node[std::size_t(v)]) patch_boundary[std::size_t(v)] = 1;

    std::vector<int> patch_nodes;
    std::vector<int> pos(mesh.nodes.size(), -1);
    for (std::size_t v = 0; v < mesh.nodes.size(); ++v)
      if (nb.node[v]) {
        pos[v] = int(patch_nodes.size());
        patch_nodes.push_back(int(v));
      }
    if (patch_nodes.empty())
      throw ResolutionError("delta-neighborhood of inclusion " + std::to_string(m) + " is empty");

    std::vector<Triplet> trip;
    for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
      if (!nb.elem[t]) continue;
      ElementGeometry g = ElementGeometry::of(mesh, int(t));
      const auto& v = mesh.triangles[t].v;
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          trip.emplace_back(pos[std::size_t(v[i])], pos[std::size_t(v[j])],
                            g.area * g.grad[i].dot(g.grad[j]));
    }
    SpMat Kloc(int(patch_nodes.size()), int(patch_nodes.size()));
    Kloc.setFromTriplets(trip.begin(), trip.end());

    // Constraints: 1 on inclusion m, 0 on the patch boundary, other
    // inclusions, and any outer-boundary nodes in the patch.
    std::vector<char> constrained(patch_nodes.size(), 0);
    VecX fixed = VecX::Zero(int(patch_nodes.size()));
    bool has_free = false;
    for (std::size_t i = 0; i < patch_nodes.size(); ++i) {
      int v = patch_nodes[i];
      int owner = idx.inclusion_of[std::size_t(v)];
      if (owner == m) {
        constrained[i] = 1;
        fixed[int(i)] = 1.0;
      } else if (owner != 0 || patch_boundary[std::size_t(v)] || idx.is_outer[std::size_t(v)]) {
        constrained[i] = 1;
      } else {
        has_free = true;
      }
    }
    // A delta below one mesh layer leaves nothing to solve for: the
    // constraints pin the whole patch and the minimizer degenerates to the
    // plain indicator of the inclusion.
    VecX local;
    if (has_free) {
      ReducedOperator op = ReducedOperator::build(Kloc, constrained);
      VecX zero = VecX::Zero(int(patch_nodes.size()));
      local = op.solve(Kloc, zero, fixed, tol);
    } else {
      local = fixed;
    }

    VecX chi = VecX::Zero(mesh.nodes.size());
    for (std::size_t i = 0; i < patch_nodes.size(); ++i) chi[patch_nodes[i]] = local[int(i)];
    basis.patches[std::size_t(mi)] = std::move(nb);
    basis.chi[std::size_t(mi)] = std::move(chi);
  });

  basis.A = MatX(m_count, m_count);
  for (int a = 0; a < m_count; ++a) {
    VecX Ka = K1 * basis.chi[std::size_t(a)];
    for (int b = 0; b <= a; ++b) {
      double v = basis.chi[std::size_t(b)].dot(Ka);
      basis.A(a, b) = v;
      basis.A(b, a) = v;
    }
  }
  basis.A_llt.compute(basis.A);
  if (basis.A_llt.info() != Eigen::Success)
    throw SolverError("localized Gram matrix is not positive definite");
  return basis;
}

/// Localized background solution on the boundary strip of width delta: g on
/// the outer boundary, zero on the strip's interior boundary and on inclusion
/// nodes inside the strip, zero outside the strip.
inline VecX compute_u00_delta(const PressureProblem& p, const SubdomainIndex& idx, const VecX& F,
                              double delta, double tol = 1e-10) {
  const Mesh& mesh = *p.mesh;
  std::vector<char> elem(mesh.triangles.size(), 0), node(mesh.nodes.size(), 0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    bool in = false;
    for (int v : mesh.triangles[t].v)
      if (idx.is_outer[std::size_t(v)]) in = true;  // one-ring at the boundary
    if (!in && detail::outer_distance(mesh, mesh.centroid(int(t))) < delta) in = true;
    if (in) {
      elem[t] = 1;
      for (int v : mesh.triangles[t].v) node[std::size_t(v)] = 1;
    }
  }
  std::vector<char> strip_boundary(mesh.nodes.size(), 0);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t)
    if (!elem[t])
      for (int v : mesh.triangles[t].v)
        if (node[std::size_t(v)]) strip_boundary[std::size_t(v)] = 1;

  std::vector<int> strip_nodes;
  std::vector<int> pos(mesh.nodes.size(), -1);
  for (std::size_t v = 0; v < mesh.nodes.size(); ++v)
    if (node[v]) {
      pos[v] = int(strip_nodes.size());
      strip_nodes.push_back(int(v));
    }
  std::vector<Triplet> trip;
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    if (!elem[t]) continue;
    ElementGeometry g = ElementGeometry::of(mesh, int(t));
    const auto& v = mesh.triangles[t].v;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(pos[std::size_t(v[i])], pos[std::size_t(v[j])],
                          g.area * g.grad[i].dot(g.grad[j]));
  }
  SpMat Kloc(int(strip_nodes.size()), int(strip_nodes.size()));
  Kloc.setFromTriplets(trip.begin(), trip.end());

  std::vector<char> constrained(strip_nodes.size(), 0);
  VecX fixed = VecX::Zero(int(strip_nodes.size()));
  VecX Floc(int(strip_nodes.size()));
  for (std::size_t i = 0; i < strip_nodes.size(); ++i) {
    int v = strip_nodes[i];
    Floc[int(i)] = F[v];
    if (idx.is_outer[std::size_t(v)]) {
      constrained[i] = 1;
      fixed[int(i)] = p.g(mesh.nodes[std::size_t(v)]);
    } else if (strip_boundary[std::size_t(v)] || idx.inclusion_of[std::size_t(v)] != 0) {
      constrained[i] = 1;
    }
  }
  ReducedOperator op = ReducedOperator::build(Kloc, constrained);
  VecX local = op.solve(Kloc, Floc, fixed, tol);
  VecX u = VecX::Zero(mesh.nodes.size());
  for (std::size_t i = 0; i < strip_nodes.size(); ++i) u[strip_nodes[i]] = local[int(i)];
  return u;
}

struct U0DeltaResult {
  VecX u0;   // localized leading term
  VecX u00;  // localized background part
  VecX uc;   // coarse part: sum of c_m chi_m
  VecX c;    // localized inclusion constants
};

/// Localized leading term u0_delta = u00_delta + sum c_m chi_m_delta, with the
/// coarse system assembled exactly as in the global case.
inline U0DeltaResult compute_u0_delta(const PressureProblem& p, const SubdomainIndex& idx,
                                      const SpMat& K1, const VecX& F, const LocalizedBasis& basis,
                                      double tol = 1e-10) {
  U0DeltaResult out;
  out.u00 = compute_u00_delta(p, idx, F, basis.delta, tol);
  const int m_count = int(basis.chi.size());
  VecX r = F - K1 * out.u00;
  VecX b(m_count);
  for (int m = 0; m < m_count; ++m) b[m] = basis.chi[std::size_t(m)].dot(r);
  out.c = basis.A_llt.solve(b);
  out.uc = VecX::Zero(F.size());
  for (int m = 0; m < m_count; ++m) out.uc += out.c[m] * basis.chi[std::size_t(m)];
  out.u0 = out.u00 + out.uc;
  return out;
}

struct DeltaSweepRow {
  double delta;
  double err_u0;   // ||u0 - u0_delta||_H1 / ||u0||_H1
  double err_u00;  // ||u00 - u00_delta||_H1 / ||u0||_H1
  double err_uc;   // ||uc - uc_delta||_H1 / ||u0||_H1
};

/// Localization error sweep against the global leading term.
inline std::vector<DeltaSweepRow> delta_error_sweep(const PressureProblem& p,
                                                    const InclusionBasis& basis,
                                                    const std::vector<double>& deltas,
                                                    double tol = 1e-10, int threads = 1) {
  check_pressure_problem(p);
  VecX F = assemble_load(*p.mesh, p.f);
  VecX u00 = compute_u00(p, basis, F, tol);
  auto [u0, c] = compute_u0(basis, F, u00);
  VecX uc = u0 - u00;
  double ref = field_norms(u0, basis.M, basis.K1).h1;

  std::vector<DeltaSweepRow> rows;
  for (double delta : deltas) {
    LocalizedBasis loc =
        localized_characteristics(*p.mesh, basis.idx, basis.K1, delta, tol, threads);
    U0DeltaResult r = compute_u0_delta(p, basis.idx, basis.K1, F, loc, tol);
    DeltaSweepRow row;
    row.delta = delta;
    row.err_u0 = field_norms(VecX(u0 - r.u0), basis.M, basis.K1).h1 / ref;
    row.err_u00 = field_norms(VecX(u00 - r.u00), basis.M, basis.K1).h1 / ref;
    row.err_uc = field_norms(VecX(uc - r.uc), basis.M, basis.K1).h1 / ref;
    rows.push_back(row);
  }
  return rows;
}

inline std::vector<DeltaSweepRow> delta_error_sweep(const PressureProblem& p,
                                                    const std::vector<double>& deltas,
                                                    double tol = 1e-10, int threads = 1) {
  check_pressure_problem(p);
  InclusionBasis basis = compute_characteristics(*p.mesh, tol, threads);
  return delta_error_sweep(p, basis, deltas, tol, threads);
}

}  // namespace hcx
