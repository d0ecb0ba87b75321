#pragma once

#include <cmath>
#include <functional>
#include <vector>

#include "hcx/solve.hpp"

namespace hcx {

using ScalarFn1 = std::function<double(double)>;

/// Two-point boundary value problem -(kappa u')' = f on (a, b) with one
/// inclusion [p, q] of contrast eta and Dirichlet values ua, ub.
struct Interval1DSpec {
  double a = -1, b = 1;
  double p = -0.5, q = 0.5;
  double eta = 10;
  double ua = 0, ub = 0;
  ScalarFn1 f;               // empty means f == 0
  int cells_per_region = 1;  // uniform cells in each of [a,p], [p,q], [q,b]
};

inline void check_interval_spec(const Interval1DSpec& s) {
  if (!(s.a < s.p && s.p < s.q && s.q < s.b))
    throw GeometryError("interval spec needs a < p < q < b");
  if (!(s.eta > 1)) throw GeometryError("contrast eta must exceed 1");
  if (s.cells_per_region < 1) throw GeometryError("cells_per_region must be at least 1");
}

/// Continuous piecewise-linear function stored as breakpoints and values.
struct PiecewiseLinear1D {
  VecX x;
  VecX y;

  double operator()(double t) const {
    if (t <= x[0]) return y[0];
    int n = int(x.size());
    if (t >= x[n - 1]) return y[n - 1];
    int lo = 0, hi = n - 1;
    while (hi - lo > 1) {
      int mid = (lo + hi) / 2;
      (x[mid] <= t ? lo : hi) = mid;
    }
    double w = (t - x[lo]) / (x[lo + 1] - x[lo]);
    return (1 - w) * y[lo] + w * y[lo + 1];
  }

  /// Slope on cell i.
  double slope(int i) const { return (y[i + 1] - y[i]) / (x[i + 1] - x[i]); }
};

/// Closed-form solution for f == 0: piecewise linear with flux
/// alpha = (ub - ua) / ((p-a) + (q-p)/eta + (b-q)).
inline PiecewiseLinear1D exact_solution_1d(const Interval1DSpec& s) {
  check_interval_spec(s);
  if (s.f) throw ValidationError("closed form requires f == 0");
  double alpha = (s.ub - s.ua) / ((s.p - s.a) + (s.q - s.p) / s.eta + (s.b - s.q));
  PiecewiseLinear1D u;
  u.x = VecX(4);
  u.y = VecX(4);
  u.x << s.a, s.p, s.q, s.b;
  u.y[0] = s.ua;
  u.y[1] = s.ua + alpha * (s.p - s.a);
  u.y[2] = u.y[1] + alpha / s.eta * (s.q - s.p);
  u.y[3] = u.y[2] + alpha * (s.b - s.q);
  return u;
}

struct Series1D {
  VecX grid;                            // shared breakpoints, includes p and q
  std::vector<PiecewiseLinear1D> terms; // terms[j] = u_j
  VecX c;                               // c[j]: inclusion constant of u_j
};

namespace detail {

struct Grid1D {
  VecX x;
  std::vector<int> cell_region;  // 0 left, 1 inclusion, 2 right
  int ip = 0, iq = 0;            // node indices of p and q

  static Grid1D build(const Interval1DSpec& s) {
    Grid1D g;
    int n = s.cells_per_region;
    std::vector<double> xs;
    auto fill = [&](double lo, double hi) {
      for (int i = 0; i < n; ++i) xs.push_back(lo + (hi - lo) * i / n);
    };
    fill(s.a, s.p);
    g.ip = int(xs.size());
    fill(s.p, s.q);
    g.iq = int(xs.size());
    fill(s.q, s.b);
    xs.push_back(s.b);
    g.x = Eigen::Map<VecX>(xs.data(), long(xs.size()));
    for (int i = 0; i + 1 < int(xs.size()); ++i)
      g.cell_region.push_back(i < g.ip ? 0 : (i < g.iq ? 1 : 2));
    return g;
  }
};

/// Stiffness over the selected regions (empty = all), unit coefficient.
inline SpMat stiffness_1d(const Grid1D& g, const std::vector<int>& regions = {}) {
  int n = int(g.x.size());
  std::vector<Triplet> trip;
  for (int i = 0; i + 1 < n; ++i) {
    if (!regions.empty() &&
        std::find(regions.begin(), regions.end(), g.cell_region[std::size_t(i)]) == regions.end())
      continue;
    double k = 1.0 / (g.x[i + 1] - g.x[i]);
    trip.emplace_back(i, i, k);
    trip.emplace_back(i + 1, i + 1, k);
    trip.emplace_back(i, i + 1, -k);
    trip.emplace_back(i + 1, i, -k);
  }
  SpMat K(n, n);
  K.setFromTriplets(trip.begin(), trip.end());
  return K;
}

inline SpMat mass_1d(const Grid1D& g) {
  int n = int(g.x.size());
  std::vector<Triplet> trip;
  for (int i = 0; i + 1 < n; ++i) {
    double h = g.x[i + 1] - g.x[i];
    trip.emplace_back(i, i, h / 3);
    trip.emplace_back(i + 1, i + 1, h / 3);
    trip.emplace_back(i, i + 1, h / 6);
    trip.emplace_back(i + 1, i, h / 6);
  }
  SpMat M(n, n);
  M.setFromTriplets(trip.begin(), trip.end());
  return M;
}

/// Load by Simpson's rule per cell; exact for piecewise-cubic f * phi.
inline VecX load_1d(const Grid1D& g, const ScalarFn1& f) {
  VecX F = VecX::Zero(g.x.size());
  if (!f) return F;
  for (int i = 0; i + 1 < int(g.x.size()); ++i) {
    double h = g.x[i + 1] - g.x[i];
    double fm = f(0.5 * (g.x[i] + g.x[i + 1]));
    F[i] += h / 6 * (f(g.x[i]) + 2 * fm);
    F[i + 1] += h / 6 * (2 * fm + f(g.x[i + 1]));
  }
  return F;
}

}  // namespace detail

/// Expansion terms u_0..u_J of the 1D problem through the same pipeline as the
/// 2D solver: harmonic characteristic function, background solve, balanced
/// zero-mean inclusion corrections.
inline Series1D expansion_terms_1d(const Interval1DSpec& s, int J, double tol = 1e-12) {
  check_interval_spec(s);
  detail::Grid1D g = detail::Grid1D::build(s);
  const int n = int(g.x.size());
  SpMat K1 = detail::stiffness_1d(g);
  SpMat Kbg = detail::stiffness_1d(g, {0, 2});
  VecX F = detail::load_1d(g, s.f);

  std::vector<int> inc_nodes;
  for (int i = g.ip; i <= g.iq; ++i) inc_nodes.push_back(i);

  // Free nodes for harmonic solves: strictly between the ends, outside [p,q].
  std::vector<char> constrained(n, 1);
  for (int i = 1; i + 1 < n; ++i)
    if (i < g.ip || i > g.iq) constrained[std::size_t(i)] = 0;
  ReducedOperator harmonic = ReducedOperator::build(K1, constrained);

  VecX zero = VecX::Zero(n);
  VecX fixed = VecX::Zero(n);
  for (int i : inc_nodes) fixed[i] = 1.0;
  VecX chi = harmonic.solve(K1, zero, fixed, tol);
  double A = chi.dot(K1 * chi);

  // Inclusion Neumann operator with the lumped zero-mean constraint.
  std::vector<int> pos(n, -1);
  for (std::size_t i = 0; i < inc_nodes.size(); ++i) pos[std::size_t(inc_nodes[i])] = int(i);
  std::vector<Triplet> trip;
  VecX wloc = VecX::Zero(int(inc_nodes.size()));
  for (int i = 0; i + 1 < n; ++i) {
    if (g.cell_region[std::size_t(i)] != 1) continue;
    double h = g.x[i + 1] - g.x[i], k = 1.0 / h;
    trip.emplace_back(pos[std::size_t(i)], pos[std::size_t(i)], k);
    trip.emplace_back(pos[std::size_t(i + 1)], pos[std::size_t(i + 1)], k);
    trip.emplace_back(pos[std::size_t(i)], pos[std::size_t(i + 1)], -k);
    trip.emplace_back(pos[std::size_t(i + 1)], pos[std::size_t(i)], -k);
    wloc[pos[std::size_t(i)]] += h / 2;
    wloc[pos[std::size_t(i + 1)]] += h / 2;
  }
  SpMat Kloc(int(inc_nodes.size()), int(inc_nodes.size()));
  Kloc.setFromTriplets(trip.begin(), trip.end());
  SaddleOperator cell = SaddleOperator::build(Kloc, {wloc});

  // u00 and u0.
  VecX bc = VecX::Zero(n);
  bc[0] = s.ua;
  bc[n - 1] = s.ub;
  VecX u00 = harmonic.solve(K1, F, bc, tol);
  double c0 = chi.dot(F - K1 * u00) / A;
  VecX u0 = u00 + c0 * chi;

  Series1D series;
  series.grid = g.x;
  std::vector<double> cs{c0};
  std::vector<VecX> terms{u0};
  for (int j = 0; j < J; ++j) {
    const VecX& prev = terms.back();
    VecX rhs_full = (j == 0) ? VecX(F - K1 * prev) : VecX(-(Kbg * prev));
    VecX rhs(int(inc_nodes.size()));
    for (std::size_t i = 0; i < inc_nodes.size(); ++i) rhs[int(i)] = rhs_full[inc_nodes[i]];
    SaddleSolution sol = cell.solve(rhs, tol);
    VecX cellwise = VecX::Zero(n);
    for (std::size_t i = 0; i < inc_nodes.size(); ++i) cellwise[inc_nodes[i]] = sol.u[int(i)];
    VecX tilde = harmonic.solve(K1, zero, cellwise, tol);
    double cj = -chi.dot(K1 * tilde) / A;
    terms.push_back(tilde + cj * chi);
    cs.push_back(cj);
  }
  for (const VecX& t : terms) {
    PiecewiseLinear1D pl;
    pl.x = g.x;
    pl.y = t;
    series.terms.push_back(pl);
  }
  series.c = Eigen::Map<VecX>(cs.data(), long(cs.size()));
  return series;
}

struct Compare1DRow {
  int J;
  double eta;
  double max_err;  // max nodal error of S_J against the closed form
  double h1_err;   // energy-seminorm error, unit coefficient
};

/// Partial sums against the closed-form solution (f == 0 only).
inline std::vector<Compare1DRow> compare_1d(const Interval1DSpec& s, int J_max,
                                            const std::vector<double>& etas, double tol = 1e-12) {
  check_interval_spec(s);
  if (s.f) throw ValidationError("compare_1d requires f == 0");
  std::vector<Compare1DRow> rows;
  for (double eta : etas) {
    Interval1DSpec q = s;
    q.eta = eta;
    Series1D series = expansion_terms_1d(q, J_max, tol);
    PiecewiseLinear1D exact = exact_solution_1d(q);
    detail::Grid1D g = detail::Grid1D::build(q);
    SpMat K1 = detail::stiffness_1d(g);
    VecX uex(g.x.size());
    for (int i = 0; i < int(g.x.size()); ++i) uex[i] = exact(g.x[i]);
    VecX sum = VecX::Zero(g.x.size());
    double w = 1;
    for (int J = 0; J <= J_max; ++J) {
      if (J > 0) w /= eta;
      sum += w * series.terms[std::size_t(J)].y;
      VecX e = uex - sum;
      rows.push_back({J, eta, e.cwiseAbs().maxCoeff(), std::sqrt(std::max(0.0, e.dot(K1 * e)))});
    }
  }
  return rows;
}

}  // namespace hcx
