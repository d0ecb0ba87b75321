#pragma once

#include <memory>
#include <vector>

#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include "hcx/fem.hpp"

namespace hcx {

/// Factorization of the free-free block of a symmetric operator under a node
/// constraint mask. Built once, reused for many right-hand sides. The
/// factorization sits behind a shared_ptr because Eigen solver objects are
/// pinned in place; copies of the operator share it.
struct ReducedOperator {
  std::vector<int> free;  // global dof ids in increasing order
  std::vector<int> pos;   // global dof -> local position or -1
  std::shared_ptr<Eigen::SimplicialLDLT<SpMat>> ldlt;

  static ReducedOperator build(const SpMat& K, const std::vector<char>& constrained) {
    ReducedOperator op;
    const int n = int(K.rows());
    op.pos.assign(n, -1);
    for (int i = 0; i < n; ++i)
      if (!constrained[std::size_t(i)]) {
        op.pos[std::size_t(i)] = int(op.free.size());
        op.free.push_back(i);
      }
    std::vector<Triplet> trip;
    for (int c = 0; c < K.outerSize(); ++c) {
      if (op.pos[std::size_t(c)] < 0) continue;
      for (SpMat::InnerIterator it(K, c); it; ++it) {
        int r = int(it.row());
        if (op.pos[std::size_t(r)] >= 0)
          trip.emplace_back(op.pos[std::size_t(r)], op.pos[std::size_t(c)], it.value());
      }
    }
    SpMat Kff(int(op.free.size()), int(op.free.size()));
    Kff.setFromTriplets(trip.begin(), trip.end());
    op.ldlt = std::make_shared<Eigen::SimplicialLDLT<SpMat>>();
    op.ldlt->compute(Kff);
    if (op.ldlt->info() != Eigen::Success)
      throw SolverError("factorization of the reduced operator failed");
    return op;
  }

  /// Solves K u = rhs with u prescribed on the constrained set. `fixed` holds
  /// the prescribed values (entries at free dofs are ignored).
  VecX solve(const SpMat& K, const VecX& rhs, const VecX& fixed, double tol = 1e-10) const {
    VecX u = fixed;
    for (int f : free) u[f] = 0.0;
    VecX coupled = K * u;
    VecX rf(int(free.size()));
    for (std::size_t i = 0; i < free.size(); ++i)
      rf[int(i)] = rhs[free[std::size_t(i)]] - coupled[free[std::size_t(i)]];
    if (!free.empty()) {
      VecX xf = ldlt->solve(rf);
      if (ldlt->info() != Eigen::Success) throw SolverError("reduced solve failed");
      for (std::size_t i = 0; i < free.size(); ++i) u[free[std::size_t(i)]] = xf[int(i)];
      // Two refinement passes with extended-precision residuals. The backward
      // error of a single factorized solve is already at roundoff, so only a
      // residual computed beyond working precision can recover the forward
      // digits lost to the contrast-inflated condition number.
      for (int pass = 0; pass < 2; ++pass) {
        VecX rloc = residual(K, u, rhs);
        VecX corr = ldlt->solve(rloc);
        for (std::size_t i = 0; i < free.size(); ++i) u[free[std::size_t(i)]] -= corr[int(i)];
      }
      double rn = residual(K, u, rhs).norm();
      // Backward-error scale: residual evaluation itself costs eps*|K||u|, so
      // high-contrast rows would fail any bound anchored to |rhs| alone.
      double scale = std::max(K.norm() * u.norm() + rf.norm(), 1e-30);
      if (rn > tol * scale) throw SolverError("Dirichlet solve residual above tolerance");
    }
    return u;
  }

 private:
  /// K u - rhs on the free dofs, accumulated in extended precision.
  VecX residual(const SpMat& K, const VecX& u, const VecX& rhs) const {
    std::vector<long double> acc(std::size_t(K.rows()), 0.0L);
    for (int c = 0; c < K.outerSize(); ++c) {
      long double uc = u[c];
      for (SpMat::InnerIterator it(K, c); it; ++it)
        acc[std::size_t(it.row())] += static_cast<long double>(it.value()) * uc;
    }
    VecX r(int(free.size()));
    for (std::size_t i = 0; i < free.size(); ++i) {
      int f = free[i];
      r[int(i)] = double(acc[std::size_t(f)] - static_cast<long double>(rhs[f]));
    }
    return r;
  }
};

/// One-shot Dirichlet solve: u = bvals on bnodes, K u = load elsewhere.
inline VecX solve_dirichlet(const SpMat& K, const VecX& load, const std::vector<int>& bnodes,
                            const VecX& bvals, double tol = 1e-10) {
  if (int(bvals.size()) != int(bnodes.size()))
    throw ValidationError("boundary values and boundary nodes differ in length");
  std::vector<char> constrained(K.rows(), 0);
  VecX fixed = VecX::Zero(K.rows());
  for (std::size_t i = 0; i < bnodes.size(); ++i) {
    constrained[std::size_t(bnodes[i])] = 1;
    fixed[bnodes[i]] = bvals[int(i)];
  }
  ReducedOperator op = ReducedOperator::build(K, constrained);
  return op.solve(K, load, fixed, tol);
}

struct SaddleSolution {
  VecX u;
  VecX multipliers;
  double constraint_violation = 0;
};

/// Factorized saddle-point system [[K, C], [C^T, 0]] for a singular Neumann
/// block with linear constraints C^T u = 0.
struct SaddleOperator {
  int n = 0, k = 0;
  SpMat S;
  std::shared_ptr<Eigen::SparseLU<SpMat>> lu;
  std::vector<VecX> constraints;

  static SaddleOperator build(const SpMat& K, const std::vector<VecX>& constraints) {
    SaddleOperator op;
    op.n = int(K.rows());
    op.k = int(constraints.size());
    op.constraints = constraints;
    std::vector<Triplet> trip;
    for (int c = 0; c < K.outerSize(); ++c)
      for (SpMat::InnerIterator it(K, c); it; ++it)
        trip.emplace_back(int(it.row()), c, it.value());
    for (int j = 0; j < op.k; ++j) {
      const VecX& cv = constraints[std::size_t(j)];
      if (int(cv.size()) != op.n) throw ValidationError("constraint vector has wrong length");
      for (int i = 0; i < op.n; ++i)
        if (cv[i] != 0.0) {
          trip.emplace_back(i, op.n + j, cv[i]);
          trip.emplace_back(op.n + j, i, cv[i]);
        }
    }
    op.S = SpMat(op.n + op.k, op.n + op.k);
    op.S.setFromTriplets(trip.begin(), trip.end());
    op.S.makeCompressed();
    op.lu = std::make_shared<Eigen::SparseLU<SpMat>>();
    op.lu->compute(op.S);
    if (op.lu->info() != Eigen::Success)
      throw SolverError("saddle-point factorization failed (constraints may not fix the kernel)");
    return op;
  }

  SaddleSolution solve(const VecX& rhs, double tol = 1e-10) const {
    if (int(rhs.size()) != n) throw ValidationError("saddle rhs has wrong length");
    VecX full = VecX::Zero(n + k);
    full.head(n) = rhs;
    VecX x = lu->solve(full);
    if (lu->info() != Eigen::Success) throw SolverError("saddle-point solve failed");
    VecX res = S * x - full;
    double scale = std::max(S.norm() * x.norm() + rhs.norm(), 1e-30);
    if (res.norm() > tol * scale) throw SolverError("saddle-point residual above tolerance");
    SaddleSolution sol;
    sol.u = x.head(n);
    sol.multipliers = x.tail(k);
    for (int j = 0; j < k; ++j)
      sol.constraint_violation =
          std::max(sol.constraint_violation, std::abs(constraints[std::size_t(j)].dot(sol.u)));
    return sol;
  }
};

/// One-shot mean-constrained Neumann solve.
inline SaddleSolution solve_constrained_neumann(const SpMat& K, const VecX& rhs,
                                                const std::vector<VecX>& constraints,
                                                double tol = 1e-10) {
  return SaddleOperator::build(K, constraints).solve(rhs, tol);
}

/// Discrete flux functional of a field through the given nodes: entries of
/// K_background * u there, zero elsewhere. With K_background assembled over
/// background elements only, entry i equals the boundary flux pairing of u
/// with the hat function of node i.
inline VecX discrete_flux(const SpMat& K_background, const VecX& u, const std::vector<int>& nodes) {
  VecX r = K_background * u;
  VecX out = VecX::Zero(u.size());
  for (int v : nodes) out[v] = r[v];
  return out;
}

}  // namespace hcx
