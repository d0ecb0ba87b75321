#include <hcx/expansion.hpp>
#include <hcx/mesh_generate.hpp>
#include <hcx/solve.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

#include <cmath>

using namespace hcx;

namespace {

const Mesh& square_mesh() {
  static Mesh mesh = generate_mesh(preset_square_polygon());
  return mesh;
}

VecX boundary_values(const Mesh& mesh, const std::vector<int>& bnodes, const ScalarFn& g) {
  VecX vals(int(bnodes.size()));
  for (std::size_t i = 0; i < bnodes.size(); ++i)
    vals[int(i)] = g(mesh.nodes[std::size_t(bnodes[i])]);
  return vals;
}

}  // namespace

TEST_CASE("Dirichlet solve reproduces linear fields exactly") {
  const Mesh& mesh = square_mesh();
  SubdomainIndex idx = SubdomainIndex::build(mesh);
  SpMat K = assemble_stiffness(mesh);
  VecX zero = VecX::Zero(int(mesh.nodes.size()));

  ScalarFn lin = [](const Vec2& p) { return 2 * p.x() - p.y() + 0.25; };
  VecX u = solve_dirichlet(K, zero, idx.outer_boundary, boundary_values(mesh, idx.outer_boundary, lin));
  VecX want = interpolate(mesh, lin);
  CHECK((u - want).cwiseAbs().maxCoeff() < 1e-10);

  // Constant boundary data gives the constant everywhere.
  VecX c = solve_dirichlet(K, zero, idx.outer_boundary,
                           VecX::Constant(int(idx.outer_boundary.size()), 3.5));
  CHECK((c.array() - 3.5).abs().maxCoeff() < 1e-11);
}

TEST_CASE("Dirichlet solve validates input lengths") {
  const Mesh& mesh = square_mesh();
  SubdomainIndex idx = SubdomainIndex::build(mesh);
  SpMat K = assemble_stiffness(mesh);
  VecX zero = VecX::Zero(int(mesh.nodes.size()));
  CHECK_THROWS_AS(solve_dirichlet(K, zero, idx.outer_boundary, VecX::Zero(3)), ValidationError);
}

TEST_CASE("saddle-point solve on a floating inclusion block") {
  Mesh mesh = testing::structured_square_mesh(10, true);
  SubdomainIndex idx = SubdomainIndex::build(mesh);
  const std::vector<int>& nodes = idx.inclusion_nodes[0];
  const int nloc = int(nodes.size());

  // Restrict the inclusion stiffness to the block's own nodes; rows of the
  // full-size matrix are identically zero elsewhere and would sit in the
  // kernel no matter the constraints.
  std::vector<int> pos(mesh.nodes.size(), -1);
  for (int i = 0; i < nloc; ++i) pos[std::size_t(nodes[std::size_t(i)])] = i;
  SpMat Kinc = assemble_stiffness(mesh, std::vector<int>{1});
  std::vector<Triplet> trip;
  for (int k = 0; k < Kinc.outerSize(); ++k)
    for (SpMat::InnerIterator it(Kinc, k); it; ++it)
      if (pos[std::size_t(it.row())] >= 0 && pos[std::size_t(it.col())] >= 0)
        trip.emplace_back(pos[std::size_t(it.row())], pos[std::size_t(it.col())], it.value());
  SpMat Kloc(nloc, nloc);
  Kloc.setFromTriplets(trip.begin(), trip.end());
  VecX w = lumped_mass(mesh, std::vector<int>{1});
  VecX wloc(nloc);
  for (int i = 0; i < nloc; ++i) wloc[i] = w[nodes[std::size_t(i)]];

  SaddleOperator op = SaddleOperator::build(Kloc, {wloc});

  SECTION("zero rhs gives the zero solution") {
    SaddleSolution sol = op.solve(VecX::Zero(nloc));
    CHECK(sol.u.cwiseAbs().maxCoeff() < 1e-14);
    CHECK(sol.multipliers.cwiseAbs().maxCoeff() < 1e-14);
  }

  SECTION("constant source is absorbed by the multiplier") {
    SaddleSolution sol = op.solve(wloc);
    // Zero weighted mean and exact stationarity: K u + lambda w = w, and
    // pairing with the constant vector forces lambda = 1.
    CHECK(sol.constraint_violation < 1e-12 * sol.u.cwiseAbs().maxCoeff() + 1e-14);
    CHECK(sol.multipliers[0] == Catch::Approx(1.0).epsilon(1e-10));
    VecX res = Kloc * sol.u + sol.multipliers[0] * wloc - wloc;
    CHECK(res.cwiseAbs().maxCoeff() < 1e-12);
  }

  SECTION("wrong rhs length is rejected") {
    CHECK_THROWS_AS(op.solve(VecX::Zero(nloc + 1)), ValidationError);
  }

  SECTION("wrong constraint length is rejected") {
    CHECK_THROWS_AS(SaddleOperator::build(Kloc, {VecX::Zero(nloc + 1)}), ValidationError);
  }
}

TEST_CASE("discrete flux of a harmonic field balances") {
  const Mesh& mesh = square_mesh();
  SubdomainIndex idx = SubdomainIndex::build(mesh);
  InclusionBasis basis = compute_characteristics(mesh);
  const VecX& chi = basis.chi[0];
  SpMat Kbg = assemble_stiffness(mesh, std::vector<int>{0});

  VecX flux_in = discrete_flux(Kbg, chi, basis.idx.interface_nodes[0]);
  VecX flux_out = discrete_flux(Kbg, chi, basis.idx.outer_boundary);
  double total_in = flux_in.sum(), total_out = flux_out.sum();

  // chi is discrete harmonic in the background, so the boundary fluxes of the
  // background residual cancel.
  CHECK(total_in + total_out == Catch::Approx(0.0).margin(1e-9 * std::abs(total_in) + 1e-12));
  CHECK(std::abs(total_in) > 0.1);  // nondegenerate: chi actually leaks energy

  // A constant field carries no flux.
  VecX ones = VecX::Ones(int(mesh.nodes.size()));
  CHECK(discrete_flux(Kbg, ones, idx.outer_boundary).cwiseAbs().maxCoeff() < 1e-12);
}
