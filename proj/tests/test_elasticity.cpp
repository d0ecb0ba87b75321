#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include <hcx/elasticity.hpp>
#include <hcx/fem.hpp>
#include <hcx/mesh_generate.hpp>

#include "support.hpp"

using namespace hcx;

namespace {

const Mesh& square_mesh() {
  static Mesh mesh = generate_mesh(preset_square_polygon());
  return mesh;
}

const ElasticBasis& square_basis() {
  static ElasticBasis basis = compute_elastic_basis(square_mesh(), 0.3);
  return basis;
}

ElasticProblem unit_problem() {
  ElasticProblem p;
  p.mesh = &square_mesh();
  p.f = [](const Vec2&) { return Vec2(1, 0); };
  p.g = [](const Vec2&) { return Vec2(0, 0); };
  return p;
}

double vector_energy(const SpMat& K, const VecX& u) { return u.dot(K * u); }

}  // namespace

TEST_CASE("normalized Lame constants for nu = 0.3") {
  auto [mu, lam] = normalized_lame(0.3);
  REQUIRE(mu == Catch::Approx(1.0 / 2.6).epsilon(1e-15));
  REQUIRE(lam == Catch::Approx(0.3 / (1.3 * 0.4)).epsilon(1e-15));
}

TEST_CASE("elastic problem validation") {
  ElasticProblem p = unit_problem();

  SECTION("null mesh") {
    p.mesh = nullptr;
    REQUIRE_THROWS_AS(check_elastic_problem(p), ValidationError);
  }
  SECTION("missing data") {
    p.g = nullptr;
    REQUIRE_THROWS_AS(check_elastic_problem(p), ValidationError);
  }
  SECTION("Poisson ratio outside (0, 1/2)") {
    p.nu = 0.6;
    REQUIRE_THROWS_AS(check_elastic_problem(p), GeometryError);
  }
  SECTION("stiff mode needs contrast above one") {
    p.contrast = 0.5;
    REQUIRE_THROWS_AS(check_elastic_problem(p), GeometryError);
  }
  SECTION("soft mode needs contrast below one") {
    p.mode = ElasticProblem::Mode::soft;
    p.contrast = 2.0;
    REQUIRE_THROWS_AS(check_elastic_problem(p), GeometryError);
    p.contrast = 0.1;
    REQUIRE_NOTHROW(check_elastic_problem(p));
  }
}

TEST_CASE("rigid body mode index validation") {
  REQUIRE_THROWS_AS(rigid_body_mode(3), ValidationError);
  REQUIRE_THROWS_AS(rigid_body_mode(-1), ValidationError);
}

TEST_CASE("elastic stiffness annihilates rigid body motions") {
  const Mesh& mesh = square_mesh();
  SpMat K = assemble_elastic_stiffness(mesh, [](int) { return 1.0; }, 0.3);

  // Symmetry.
  SpMat D = SpMat(K.transpose()) - K;
  double asym = 0;
  for (int c = 0; c < D.outerSize(); ++c)
    for (SpMat::InnerIterator it(D, c); it; ++it) asym = std::max(asym, std::abs(it.value()));
  REQUIRE(asym < 1e-13);

  // Translations and the rotation are exact P1 fields, so their discrete
  // energy is zero up to roundoff.
  for (int k = 0; k < 3; ++k) {
    VecX r = interpolate_vector(mesh, rigid_body_mode(k));
    REQUIRE(vector_energy(K, r) < 1e-12);
    REQUIRE((K * r).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("elastic stiffness scales linearly in the modulus") {
  const Mesh& mesh = square_mesh();
  SpMat K1 = assemble_elastic_stiffness(mesh, [](int) { return 1.0; }, 0.3);
  SpMat K3 = assemble_elastic_stiffness(mesh, [](int) { return 3.0; }, 0.3);
  SpMat D = K3 - 3.0 * K1;
  double err = 0, ref = 0;
  for (int c = 0; c < K1.outerSize(); ++c)
    for (SpMat::InnerIterator it(K1, c); it; ++it) ref = std::max(ref, std::abs(it.value()));
  for (int c = 0; c < D.outerSize(); ++c)
    for (SpMat::InnerIterator it(D, c); it; ++it) err = std::max(err, std::abs(it.value()));
  REQUIRE(err < 1e-14 * ref);
}

TEST_CASE("vectorized scalar matrix interleaves components") {
  const Mesh& mesh = square_mesh();
  SpMat M = assemble_mass(mesh);
  SpMat Mv = vectorize_scalar_matrix(M);
  REQUIRE(Mv.rows() == 2 * M.rows());
  REQUIRE(Mv.nonZeros() == 2 * M.nonZeros());

  // Each scalar entry appears on both components and nowhere across them.
  VecX ex = VecX::Zero(2 * M.rows());
  for (int i = 0; i < M.rows(); ++i) ex[2 * i] = 1.0;
  VecX prod = Mv * ex;
  double cross = 0;
  for (int i = 0; i < M.rows(); ++i) cross = std::max(cross, std::abs(prod[2 * i + 1]));
  REQUIRE(cross == 0.0);
  REQUIRE(ex.dot(prod) == Catch::Approx(1.0).epsilon(1e-12));  // total mass
}

TEST_CASE("vector load integrates componentwise") {
  const Mesh& mesh = square_mesh();
  VecX F = assemble_vector_load(mesh, [](const Vec2&) { return Vec2(1, 0); });
  double sx = 0, sy = 0;
  for (int i = 0; i < int(mesh.nodes.size()); ++i) {
    sx += F[2 * i];
    sy += F[2 * i + 1];
  }
  REQUIRE(sx == Catch::Approx(1.0).epsilon(1e-12));  // unit square area
  REQUIRE(std::abs(sy) < 1e-15);
}

TEST_CASE("direct elastic solve reproduces rigid body boundary data") {
  ElasticProblem p = unit_problem();
  p.f = [](const Vec2&) { return Vec2(0, 0); };
  p.g = rigid_body_mode(2);
  VecX u = solve_direct_elastic(p);
  VecX r = interpolate_vector(square_mesh(), p.g);
  REQUIRE((u - r).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("elastic basis fields are rigid on their inclusion and decay outside") {
  const Mesh& mesh = square_mesh();
  const ElasticBasis& basis = square_basis();
  REQUIRE(int(basis.chi.size()) == 3 * mesh.num_inclusions);

  for (int k = 0; k < 3; ++k) {
    const VecX& chi = basis.chi[std::size_t(k)];
    VecX mode = interpolate_vector(mesh, rigid_body_mode(k));

    // Exact mode values on the inclusion, zero on the outer boundary.
    for (int v : basis.idx.inclusion_nodes[0]) {
      REQUIRE(chi[2 * v] == mode[2 * v]);
      REQUIRE(chi[2 * v + 1] == mode[2 * v + 1]);
    }
    for (int v = 0; v < int(mesh.nodes.size()); ++v)
      if (basis.idx.is_outer[std::size_t(v)]) {
        REQUIRE(chi[2 * v] == 0.0);
        REQUIRE(chi[2 * v + 1] == 0.0);
      }

    // Elastically harmonic in the background: K1 chi vanishes at free
    // background dofs.
    VecX res = basis.K1 * chi;
    double worst = 0;
    for (int v : basis.idx.background_free)
      worst = std::max(worst, std::max(std::abs(res[2 * v]), std::abs(res[2 * v + 1])));
    REQUIRE(worst < 1e-8);
  }

  // Gram matrix of the basis: SPD and symmetric.
  REQUIRE(basis.A.rows() == 3 * mesh.num_inclusions);
  double asym = (basis.A - basis.A.transpose()).cwiseAbs().maxCoeff();
  REQUIRE(asym < 1e-13 * basis.A.cwiseAbs().maxCoeff());
  Eigen::LLT<MatX> llt(basis.A);
  REQUIRE(llt.info() == Eigen::Success);
}

TEST_CASE("stiff expansion leading term is rigid on the inclusion") {
  ElasticProblem p = unit_problem();
  ElasticSeries s = expand_stiff_elastic(p, square_basis(), 4);
  REQUIRE(s.j_min == 0);
  REQUIRE(s.terms.size() == 5);
  REQUIRE(s.max_constraint_violation < 1e-10);

  double fit = rigid_body_fit_residual(square_mesh(), square_basis().idx, 1, s.terms[0]);
  double scale = s.terms[0].cwiseAbs().maxCoeff();
  REQUIRE(fit < 1e-10 * std::max(scale, 1.0));
}

TEST_CASE("stiff expansion with rigid boundary data collapses to one term") {
  ElasticProblem p = unit_problem();
  p.f = [](const Vec2&) { return Vec2(0, 0); };
  p.g = [](const Vec2&) { return Vec2(0.5, -0.25); };
  ElasticSeries s = expand_stiff_elastic(p, square_basis(), 2);

  VecX r = interpolate_vector(square_mesh(), p.g);
  REQUIRE((s.terms[0] - r).cwiseAbs().maxCoeff() < 1e-9);
  REQUIRE(s.terms[1].cwiseAbs().maxCoeff() < 1e-9);
  REQUIRE(s.terms[2].cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("stiff partial sums converge to the direct solve") {
  ElasticProblem p = unit_problem();
  const ElasticBasis& basis = square_basis();
  ElasticSeries s = expand_stiff_elastic(p, basis, 4);

  std::vector<ElasticTruncationRow> rows = truncation_report_elastic(p, basis, s, {10.0}, 4);
  REQUIRE(rows.size() == 5);
  // The decay constant of this geometry eats part of the 1/contrast factor,
  // so each extra term buys a bit less than a full decade at contrast 10.
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (rows[i + 1].rel_err_h1 < 1e-11) break;  // error floor
    REQUIRE(rows[i + 1].rel_err_h1 < 0.8 * rows[i].rel_err_h1);
  }
  REQUIRE(rows[1].rel_err_h1 < 0.1);
}

TEST_CASE("balanced orthogonality bounds each term by its unbalanced part") {
  // u_j = tilde_u_j + sum_i x_i chi_i with a(u_j, chi_i) = 0, so the two
  // pieces are a-orthogonal and |u_j| <= |tilde_u_j| in the energy norm.
  ElasticProblem p = unit_problem();
  p.g = [](const Vec2& x) { return Vec2(x.y() * x.y(), 0); };
  const ElasticBasis& basis = square_basis();
  ElasticSeries s = expand_stiff_elastic(p, basis, 4);

  auto korn_ratio = [&](const ElasticBasis& b, const ElasticSeries& ser) {
    double worst = 0;
    for (std::size_t j = 1; j < ser.terms.size(); ++j) {
      VecX tilde = ser.terms[j];
      for (int i = 0; i < int(b.chi.size()); ++i)
        tilde -= ser.constants[j][i] * b.chi[std::size_t(i)];
      double eu = vector_energy(b.K1, ser.terms[j]);
      double et = vector_energy(b.K1, tilde);
      if (et < 1e-24) continue;
      worst = std::max(worst, std::sqrt(eu / et));
    }
    return worst;
  };

  double ratio = korn_ratio(basis, s);
  REQUIRE(ratio > 0.1);
  REQUIRE(ratio <= 1.0 + 1e-12);

  // The bound is a mesh-independent energy identity: it survives refinement.
  Mesh fine = refine_uniform(square_mesh());
  ElasticBasis fine_basis = compute_elastic_basis(fine, 0.3, 1e-10, 4);
  ElasticProblem pf = p;
  pf.mesh = &fine;
  ElasticSeries sf = expand_stiff_elastic(pf, fine_basis, 4, 1e-10, 4);
  double fine_ratio = korn_ratio(fine_basis, sf);
  REQUIRE(fine_ratio <= 1.0 + 1e-12);
  REQUIRE(fine_ratio == Catch::Approx(ratio).margin(0.2));
}

TEST_CASE("soft expansion leading term lives inside the inclusions") {
  ElasticProblem p = unit_problem();
  p.mode = ElasticProblem::Mode::soft;
  p.contrast = 0.1;
  const ElasticBasis& basis = square_basis();
  ElasticSeries s = expand_soft_elastic(p, basis, 3);
  REQUIRE(s.j_min == -1);
  REQUIRE(s.terms.size() == 5);

  const Mesh& mesh = square_mesh();
  const VecX& um1 = s.terms[0];
  std::vector<int> interior = basis.idx.inclusion_interior(1);
  std::vector<char> is_interior(mesh.nodes.size(), 0);
  for (int v : interior) is_interior[std::size_t(v)] = 1;
  for (int v = 0; v < int(mesh.nodes.size()); ++v)
    if (!is_interior[std::size_t(v)]) {
      REQUIRE(um1[2 * v] == 0.0);
      REQUIRE(um1[2 * v + 1] == 0.0);
    }
  REQUIRE(um1.cwiseAbs().maxCoeff() > 0.0);

  // Zero load kills the inclusion-local response entirely.
  ElasticProblem q = p;
  q.f = [](const Vec2&) { return Vec2(0, 0); };
  q.g = [](const Vec2& x) { return Vec2(x.x(), 0); };
  ElasticSeries sz = expand_soft_elastic(q, basis, 1);
  REQUIRE(sz.terms[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("soft partial sums converge as the contrast shrinks") {
  ElasticProblem p = unit_problem();
  p.mode = ElasticProblem::Mode::soft;
  p.contrast = 0.1;
  const ElasticBasis& basis = square_basis();
  ElasticSeries s = expand_soft_elastic(p, basis, 4);

  std::vector<ElasticTruncationRow> rows = truncation_report_elastic(p, basis, s, {0.1}, 3);
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    if (rows[i + 1].rel_err_h1 < 1e-11) break;
    REQUIRE(rows[i + 1].rel_err_h1 < 0.5 * rows[i].rel_err_h1);
  }
}

TEST_CASE("partial sum order is validated against the series range") {
  ElasticProblem p = unit_problem();
  ElasticSeries s = expand_stiff_elastic(p, square_basis(), 1);
  REQUIRE_THROWS_AS(partial_sum_elastic(s, p, -1), ValidationError);
  REQUIRE_THROWS_AS(partial_sum_elastic(s, p, 2), ValidationError);
  REQUIRE_NOTHROW(partial_sum_elastic(s, p, 1));
}

TEST_CASE("elastic energy decreases as the inclusions stiffen") {
  // With zero boundary data the energy is -2 min J_eta, and J_eta grows
  // pointwise in eta, so the stored energy can only go down.
  ElasticProblem p = unit_problem();
  auto energy_at = [&](double contrast) {
    ElasticProblem q = p;
    q.contrast = contrast;
    VecX u = solve_direct_elastic(q);
    SpMat K = assemble_elastic_stiffness(
        square_mesh(), [&](int tag) { return tag == 0 ? 1.0 : contrast; }, q.nu);
    return vector_energy(K, u);
  };
  double e10 = energy_at(10), e100 = energy_at(100), e1000 = energy_at(1000);
  REQUIRE(e10 > 0);
  REQUIRE(e100 <= e10 * (1 + 1e-12));
  REQUIRE(e1000 <= e100 * (1 + 1e-12));
}

TEST_CASE("rigid body fit residual detects non-rigid fields") {
  const Mesh& mesh = square_mesh();
  const SubdomainIndex& idx = square_basis().idx;

  VecX r = interpolate_vector(mesh, [](const Vec2& x) {
    return Vec2(0.3 + 2.0 * x.y(), -1.1 - 2.0 * x.x());
  });
  REQUIRE(rigid_body_fit_residual(mesh, idx, 1, r) < 1e-12);

  VecX bent = interpolate_vector(mesh, [](const Vec2& x) { return Vec2(x.x() * x.x(), 0); });
  REQUIRE(rigid_body_fit_residual(mesh, idx, 1, bent) > 1e-4);
}
