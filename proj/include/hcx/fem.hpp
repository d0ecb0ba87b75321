#pragma once

#include <array>
#include <cmath>
#include <functional>
#include <vector>

#include "hcx/mesh.hpp"

namespace hcx {

/// Per-element P1 data: area and constant shape-function gradients.
struct ElementGeometry {
  double area;
  std::array<Vec2, 3> grad;

  static ElementGeometry of(const Mesh& mesh, int t) {
    const Vec2 &a = mesh.nodes[mesh.triangles[t].v[0]], &b = mesh.nodes[mesh.triangles[t].v[1]],
               &c = mesh.nodes[mesh.triangles[t].v[2]];
    double det = (b.x() - a.x()) * (c.y() - a.y()) - (c.x() - a.x()) * (b.y() - a.y());
    ElementGeometry g;
    g.area = 0.5 * det;
    g.grad[0] = Vec2(b.y() - c.y(), c.x() - b.x()) / det;
    g.grad[1] = Vec2(c.y() - a.y(), a.x() - c.x()) / det;
    g.grad[2] = Vec2(a.y() - b.y(), b.x() - a.x()) / det;
    return g;
  }
};

namespace detail {

inline void check_tags(const Mesh& mesh, const std::vector<int>& tags) {
  for (int t : tags)
    if (t < 0 || t > mesh.num_inclusions)
      throw ValidationError("tag filter entry " + std::to_string(t) + " outside 0.." +
                            std::to_string(mesh.num_inclusions));
}

inline bool tag_selected(const std::vector<int>& tags, int tag) {
  if (tags.empty()) return true;
  return std::find(tags.begin(), tags.end(), tag) != tags.end();
}

}  // namespace detail

/// Stiffness matrix for -div(coef grad u) with a piecewise-constant
/// coefficient given per subdomain tag. An empty tag filter selects all
/// elements; otherwise only elements whose tag is listed contribute (rows and
/// columns of untouched nodes stay empty).
inline SpMat assemble_stiffness(const Mesh& mesh,
                                const std::function<double(int)>& coef_by_tag,
                                const std::vector<int>& tags = {}) {
  detail::check_tags(mesh, tags);
  const int n = int(mesh.nodes.size());
  std::vector<Triplet> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    if (!detail::tag_selected(tags, tri.tag)) continue;
    ElementGeometry g = ElementGeometry::of(mesh, int(t));
    double k = coef_by_tag(tri.tag);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(tri.v[i], tri.v[j], k * g.area * g.grad[i].dot(g.grad[j]));
  }
  SpMat K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

inline SpMat assemble_stiffness(const Mesh& mesh, const std::vector<int>& tags = {}) {
  return assemble_stiffness(
      mesh, [](int) { return 1.0; }, tags);
}

/// Mass matrix via the edge-midpoint rule, which integrates P1 products
/// exactly: diag area/6, off-diag area/12.
inline SpMat assemble_mass(const Mesh& mesh, const std::vector<int>& tags = {}) {
  detail::check_tags(mesh, tags);
  const int n = int(mesh.nodes.size());
  std::vector<Triplet> trip;
  trip.reserve(mesh.triangles.size() * 9);
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    if (!detail::tag_selected(tags, tri.tag)) continue;
    double area = mesh.area(int(t));
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        trip.emplace_back(tri.v[i], tri.v[j], i == j ? area / 6.0 : area / 12.0);
  }
  SpMat M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

/// Load vector with the 3-point edge-midpoint rule (exact for quadratic f).
inline VecX assemble_load(const Mesh& mesh, const ScalarFn& f, const std::vector<int>& tags = {}) {
  detail::check_tags(mesh, tags);
  VecX F = VecX::Zero(mesh.nodes.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    if (!detail::tag_selected(tags, tri.tag)) continue;
    double area = mesh.area(int(t));
    const Vec2 &a = mesh.nodes[tri.v[0]], &b = mesh.nodes[tri.v[1]], &c = mesh.nodes[tri.v[2]];
    std::array<Vec2, 3> mid{0.5 * (a + b), 0.5 * (b + c), 0.5 * (c + a)};
    std::array<double, 3> fm{f(mid[0]), f(mid[1]), f(mid[2])};
    // Shape function values at opposite edge midpoints are 1/2, 1/2, 0.
    F[tri.v[0]] += area / 3.0 * 0.5 * (fm[0] + fm[2]);
    F[tri.v[1]] += area / 3.0 * 0.5 * (fm[0] + fm[1]);
    F[tri.v[2]] += area / 3.0 * 0.5 * (fm[1] + fm[2]);
  }
  return F;
}

/// Row sums of the mass matrix over the selected elements.
inline VecX lumped_mass(const Mesh& mesh, const std::vector<int>& tags = {}) {
  detail::check_tags(mesh, tags);
  VecX w = VecX::Zero(mesh.nodes.size());
  for (std::size_t t = 0; t < mesh.triangles.size(); ++t) {
    const Triangle& tri = mesh.triangles[t];
    if (!detail::tag_selected(tags, tri.tag)) continue;
    double third = mesh.area(int(t)) / 3.0;
    for (int v : tri.v) w[v] += third;
  }
  return w;
}

/// Nodal interpolant of a scalar function.
inline VecX interpolate(const Mesh& mesh, const ScalarFn& f) {
  VecX u(mesh.nodes.size());
  for (std::size_t i = 0; i < mesh.nodes.size(); ++i) u[int(i)] = f(mesh.nodes[i]);
  return u;
}

struct FieldNorms {
  double l2 = 0;
  double h1_semi = 0;
  double h1 = 0;
};

/// Norms from precomputed mass and unit-coefficient stiffness matrices.
inline FieldNorms field_norms(const VecX& u, const SpMat& M, const SpMat& K) {
  FieldNorms n;
  double l2sq = u.dot(M * u), semisq = u.dot(K * u);
  n.l2 = std::sqrt(std::max(0.0, l2sq));
  n.h1_semi = std::sqrt(std::max(0.0, semisq));
  n.h1 = std::sqrt(std::max(0.0, l2sq + semisq));
  return n;
}

}  // namespace hcx
