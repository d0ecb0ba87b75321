#include <hcx/fem.hpp>
#include <hcx/mesh_generate.hpp>

#include <catch2/catch_amalgamated.hpp>

#include "support.hpp"

#include <cmath>

using namespace hcx;

namespace {

Mesh unit_right_triangle() {
  Mesh mesh;
  mesh.nodes = {Vec2(0, 0), Vec2(1, 0), Vec2(0, 1)};
  mesh.triangles = {Triangle{{0, 1, 2}, 0}};
  mesh.boundary_edges = extract_boundary_edges(mesh);
  return mesh;
}

const Mesh& square_mesh() {
  static Mesh mesh = generate_mesh(preset_square_polygon());
  return mesh;
}

}  // namespace

TEST_CASE("stiffness of the unit right triangle") {
  SpMat K = assemble_stiffness(unit_right_triangle());
  MatX D = MatX(K);
  MatX want(3, 3);
  want << 2, -1, -1, -1, 1, 0, -1, 0, 1;
  want *= 0.5;
  CHECK((D - want).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("stiffness row sums vanish on constants") {
  SpMat K = assemble_stiffness(square_mesh());
  VecX ones = VecX::Ones(K.rows());
  CHECK((K * ones).cwiseAbs().maxCoeff() < 1e-12);
  MatX D = MatX(K);
  CHECK((D - D.transpose()).cwiseAbs().maxCoeff() < 1e-13 * D.cwiseAbs().maxCoeff());
}

TEST_CASE("coefficient scales the stiffness linearly") {
  const Mesh& mesh = square_mesh();
  SpMat K1 = assemble_stiffness(mesh);
  SpMat Ks = assemble_stiffness(mesh, [](int) { return 2.5; });
  SpMat diff = Ks - SpMat(2.5 * K1);
  CHECK(diff.coeffs().cwiseAbs().maxCoeff() < 1e-14 * K1.coeffs().cwiseAbs().maxCoeff());
}

TEST_CASE("tag filters split the stiffness additively") {
  const Mesh& mesh = square_mesh();
  SpMat K1 = assemble_stiffness(mesh);
  SpMat Kbg = assemble_stiffness(mesh, std::vector<int>{0});
  SpMat Kinc = assemble_stiffness(mesh, std::vector<int>{1});
  SpMat diff = SpMat(Kbg + Kinc) - K1;
  CHECK(diff.coeffs().cwiseAbs().maxCoeff() < 1e-14 * K1.coeffs().cwiseAbs().maxCoeff());
  CHECK_THROWS_AS(assemble_stiffness(mesh, std::vector<int>{7}), ValidationError);
}

TEST_CASE("mass matrix of a single element and the whole domain") {
  SpMat M = assemble_mass(unit_right_triangle());
  MatX D = MatX(M);
  double area = 0.5;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      CHECK(D(i, j) == Catch::Approx(i == j ? area / 6 : area / 12));

  SpMat Ms = assemble_mass(square_mesh());
  CHECK(MatX(Ms).sum() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("lumped mass equals the mass row sums") {
  const Mesh& mesh = square_mesh();
  SpMat M = assemble_mass(mesh);
  VecX lump = lumped_mass(mesh);
  VecX rows = M * VecX::Ones(M.rows());
  CHECK((lump - rows).cwiseAbs().maxCoeff() < 1e-14);
  CHECK(lump.sum() == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("load vector integrates low-order polynomials exactly") {
  const Mesh& mesh = square_mesh();
  VecX f1 = assemble_load(mesh, [](const Vec2&) { return 1.0; });
  CHECK(f1.sum() == Catch::Approx(1.0).epsilon(1e-12));
  VecX fx = assemble_load(mesh, [](const Vec2& p) { return p.x(); });
  CHECK(fx.sum() == Catch::Approx(0.5).epsilon(1e-12));
  // Edge-midpoint quadrature is exact through degree 2.
  VecX fq = assemble_load(mesh, [](const Vec2& p) { return p.x() * p.x(); });
  CHECK(fq.sum() == Catch::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("field norms of interpolants") {
  const Mesh& mesh = square_mesh();
  SpMat M = assemble_mass(mesh);
  SpMat K = assemble_stiffness(mesh);

  VecX c = interpolate(mesh, [](const Vec2&) { return 1.0; });
  FieldNorms nc = field_norms(c, M, K);
  CHECK(nc.l2 == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(nc.h1_semi < 1e-5);

  VecX x = interpolate(mesh, [](const Vec2& p) { return p.x(); });
  FieldNorms nx = field_norms(x, M, K);
  CHECK(nx.h1_semi == Catch::Approx(1.0).epsilon(1e-12));
  CHECK(nx.h1 == Catch::Approx(std::sqrt(1.0 + nx.l2 * nx.l2)).epsilon(1e-12));

  // Interpolated sin(pi x) sin(pi y) has Dirichlet energy close to pi^2 / 2.
  Mesh fine = refine_uniform(mesh);
  VecX s = interpolate(fine, [](const Vec2& p) {
    return std::sin(M_PI * p.x()) * std::sin(M_PI * p.y());
  });
  SpMat Kf = assemble_stiffness(fine);
  double energy = s.dot(Kf * s);
  CHECK(energy == Catch::Approx(M_PI * M_PI / 2).epsilon(0.02));
}

TEST_CASE("element geometry gradients reproduce linear functions") {
  const Mesh& mesh = square_mesh();
  VecX u = interpolate(mesh, [](const Vec2& p) { return 3 * p.x() - 2 * p.y() + 1; });
  for (std::size_t t = 0; t < mesh.triangles.size(); t += 97) {
    ElementGeometry g = ElementGeometry::of(mesh, int(t));
    Vec2 grad = Vec2::Zero();
    for (int k = 0; k < 3; ++k) grad += u[mesh.triangles[t].v[k]] * g.grad[k];
    CHECK(grad.x() == Catch::Approx(3.0).epsilon(1e-10));
    CHECK(grad.y() == Catch::Approx(-2.0).epsilon(1e-10));
  }
}
