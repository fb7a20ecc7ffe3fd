#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <polymhd/basis.hpp>

#include "oracles.hpp"

using namespace polymhd;
using oracles::Poly3;

TEST_SUITE("basis") {

TEST_CASE("dimensions") {
  CHECK(dim_P3(0) == 1);
  CHECK(dim_P3(1) == 4);
  CHECK(dim_P3(2) == 10);
  CHECK(dim_P3(3) == 20);
  CHECK(dim_P2(0) == 1);
  CHECK(dim_P2(1) == 3);
  CHECK(dim_P2(2) == 6);
}

TEST_CASE("orthonormalized mass matrix is the identity") {
  std::mt19937 rng(5);
  for (int trial = 0; trial < 4; ++trial) {
    const PolyMesh mesh = oracles::random_cell(rng);
    const int k = 1 + static_cast<int>(rng() % 3);
    const CellBasis basis = CellBasis::orthonormal(mesh, 0, k);
    const MatrixXd M = mass_matrix(basis, cell_rule(mesh, 0, 2 * k));
    CHECK((M - MatrixXd::Identity(M.rows(), M.cols())).norm() <= 1e-12 * M.rows());

    const FaceBasis fb = FaceBasis::orthonormal(mesh, 0, k);
    const MatrixXd Mf = mass_matrix(fb, face_rule(mesh, 0, 2 * k));
    CHECK((Mf - MatrixXd::Identity(Mf.rows(), Mf.cols())).norm() <= 1e-12 * Mf.rows());
  }
}

TEST_CASE("rank-deficient Gram matrix raises a conditioning error") {
  const PolyMesh mesh = oracles::reference_tet();
  // A rule with fewer nodes than basis functions (violating the exactness
  // precondition) makes the Gram matrix singular.
  const CellBasis basis = CellBasis::monomials(2, mesh.cell(0).centroid, mesh.cell(0).diameter);
  CHECK_THROWS_AS(mass_matrix(basis, cell_rule(mesh, 0, 0)), ConditioningError);
}

TEST_CASE("monomial mass matrix on a symmetric cell decouples odd moments") {
  const PolyMesh mesh = oracles::unit_cube_cell();
  const CellBasis basis = CellBasis::monomials(1, mesh.cell(0).centroid, mesh.cell(0).diameter);
  const MatrixXd M = mass_matrix(basis, cell_rule(mesh, 0, 2));
  for (int j = 1; j < 4; ++j) {
    CHECK(std::abs(M(0, j)) <= 1e-14);  // (1, (x-x_T)/h_T) vanishes by symmetry
    CHECK(std::abs(M(j, 0)) <= 1e-14);
  }
}

TEST_CASE("degree-2 monomial mass matrix matches the exact simplex integrals") {
  const PolyMesh mesh = oracles::reference_tet();
  const Vector3d c = mesh.cell(0).centroid;
  const double h = mesh.cell(0).diameter;
  const CellBasis basis = CellBasis::monomials(2, c, h);
  const MatrixXd M = mass_matrix(basis, cell_rule(mesh, 0, 4));

  // Oracle: expand ((x-c)/h)^a ((x-c)/h)^b exactly and integrate termwise.
  std::vector<std::array<int, 3>> exps;
  for (int g = 0; g <= 2; ++g)
    for (int a = g; a >= 0; --a)
      for (int b = g - a; b >= 0; --b) exps.push_back({a, b, g - a - b});
  auto scaled_monomial = [&](const std::array<int, 3>& e) {
    Poly3 p = Poly3::monomial(0, 0, 0);
    const Poly3 lin[3] = {
        Poly3::monomial(1, 0, 0, 1.0 / h) + Poly3::monomial(0, 0, 0, -c.x() / h),
        Poly3::monomial(0, 1, 0, 1.0 / h) + Poly3::monomial(0, 0, 0, -c.y() / h),
        Poly3::monomial(0, 0, 1, 1.0 / h) + Poly3::monomial(0, 0, 0, -c.z() / h)};
    for (int d = 0; d < 3; ++d)
      for (int i = 0; i < e[d]; ++i) p = p * lin[d];
    return p;
  };
  for (std::size_t i = 0; i < exps.size(); ++i)
    for (std::size_t j = i; j < exps.size(); ++j) {
      const double exact =
          oracles::integrate_cell(scaled_monomial(exps[i]) * scaled_monomial(exps[j]), mesh, 0);
      CHECK(M(i, j) == doctest::Approx(exact).epsilon(1e-12));
    }
}

TEST_CASE("L2 projector") {
  std::mt19937 rng(23);
  SUBCASE("reproduces polynomials and is idempotent") {
    for (int trial = 0; trial < 4; ++trial) {
      const PolyMesh mesh = oracles::random_cell(rng);
      const int k = static_cast<int>(rng() % 3);
      const CellBasis basis = CellBasis::orthonormal(mesh, 0, k);
      std::uniform_real_distribution<double> unit(-1.0, 1.0);
      VectorXd coeffs(basis.size());
      for (int i = 0; i < coeffs.size(); ++i) coeffs(i) = unit(rng);
      ScalarField f = [&](const Vector3d& x) { return basis.values({x}).row(0).dot(coeffs); };
      const VectorXd proj = l2_project(f, basis, cell_rule(mesh, 0, 2 * k));
      CHECK((proj - coeffs).norm() <= 1e-12 * std::max(1.0, coeffs.norm()));
      // pi o pi = pi: project the projection.
      ScalarField fp = [&](const Vector3d& x) { return basis.values({x}).row(0).dot(proj); };
      const VectorXd proj2 = l2_project(fp, basis, cell_rule(mesh, 0, 2 * k));
      CHECK((proj2 - proj).norm() <= 1e-12 * std::max(1.0, proj.norm()));
    }
  }
  SUBCASE("constant projects to the cell average") {
    const PolyMesh mesh = oracles::reference_tet();
    const CellBasis basis = CellBasis::orthonormal(mesh, 0, 1);
    const VectorXd proj =
        l2_project([](const Vector3d&) { return 3.25; }, basis, cell_rule(mesh, 0, 2));
    // Constant basis function is 1/sqrt(|T|).
    CHECK(proj(0) == doctest::Approx(3.25 * std::sqrt(1.0 / 6.0)).epsilon(1e-13));
    CHECK(proj.tail(proj.size() - 1).norm() <= 1e-13);
  }
  SUBCASE("trig field matches a dense normal-equation oracle") {
    const PolyMesh mesh = oracles::reference_tet();
    const int k = 2;
    const CellBasis basis = CellBasis::orthonormal(mesh, 0, k);
    ScalarField f = [](const Vector3d& x) { return std::sin(std::numbers::pi * x.x()); };
    const VectorXd proj = l2_project(f, basis, cell_rule(mesh, 0, 20));

    // Oracle: raw scaled monomials, independent high-density rule, dense solve.
    const CellBasis raw = CellBasis::monomials(k, mesh.cell(0).centroid, mesh.cell(0).diameter);
    const QuadRule rule = cell_rule(mesh, 0, 24);
    const MatrixXd V = raw.values(rule.nodes);
    MatrixXd N = MatrixXd::Zero(raw.size(), raw.size());
    VectorXd rhs = VectorXd::Zero(raw.size());
    for (std::size_t q = 0; q < rule.size(); ++q) {
      N += rule.weights[q] * V.row(q).transpose() * V.row(q);
      rhs += rule.weights[q] * f(rule.nodes[q]) * V.row(q).transpose();
    }
    const VectorXd oracle = N.ldlt().solve(rhs);

    // Compare as functions at sample points.
    std::mt19937 rng2(9);
    std::uniform_real_distribution<double> unit(0.05, 0.3);
    for (int s = 0; s < 20; ++s) {
      const Vector3d x(unit(rng2), unit(rng2), unit(rng2));
      const double a = basis.values({x}).row(0).dot(proj);
      const double b = raw.values({x}).row(0).dot(oracle);
      CHECK(a == doctest::Approx(b).epsilon(1e-11));
    }
  }
}

TEST_CASE("projections agree between raw and orthonormal bases") {
  std::mt19937 rng(31);
  const PolyMesh mesh = oracles::random_hex_cell(rng);
  const int k = 2;
  const CellBasis on = CellBasis::orthonormal(mesh, 0, k);
  const CellBasis raw = CellBasis::monomials(k, mesh.cell(0).centroid, mesh.cell(0).diameter);
  ScalarField f = [](const Vector3d& x) { return std::cos(x.x() + 0.5 * x.y()) * x.z(); };
  const QuadRule rule = cell_rule(mesh, 0, 16);
  const VectorXd p_on = l2_project(f, on, rule);
  const VectorXd p_raw = l2_project(f, raw, rule);
  for (int s = 0; s < 10; ++s) {
    const Vector3d x = mesh.cell(0).centroid + 0.05 * Vector3d(s, 2 * s % 3, s % 2);
    CHECK(on.values({x}).row(0).dot(p_on) ==
          doctest::Approx(raw.values({x}).row(0).dot(p_raw)).epsilon(1e-11));
  }
}

TEST_CASE("interpolator") {
  SUBCASE("global polynomial: face blocks agree with cell traces") {
    const PolyMesh mesh = build_cube_tet_mesh(1);
    const int k = 1;
    const Bases bases = Bases::build(mesh, k);
    VectorField v = [](const Vector3d& x) {
      return Vector3d(1.0 + x.x() - 2.0 * x.y(), x.z() - x.x(), 0.5 * x.y() + x.z());
    };
    const HybridField f = interpolate(v, mesh, bases, 4);
    const int nk = dim_P3(k), nf = dim_P2(k);
    for (std::size_t iF = 0; iF < mesh.n_faces(); ++iF) {
      const Face& F = mesh.face(iF);
      const int iT = F.cells[0];
      const QuadRule rule = face_rule(mesh, iF, 2 * k + 2);
      const MatrixXd Vc = bases.cell[iT].values(rule.nodes).leftCols(nk);
      const MatrixXd Vf = bases.face[iF].values(rule.nodes);
      for (std::size_t q = 0; q < rule.size(); ++q)
        for (int c = 0; c < 3; ++c) {
          const double cell_val = Vc.row(q).dot(f.cell[iT].segment(c * nk, nk));
          const double face_val = Vf.row(q).dot(f.face[iF].segment(c * nf, nf));
          CHECK(cell_val == doctest::Approx(face_val).epsilon(1e-12));
        }
    }
  }
  SUBCASE("zero field interpolates to zero") {
    const PolyMesh mesh = build_cube_tet_mesh(1);
    const Bases bases = Bases::build(mesh, 0);
    const HybridField f =
        interpolate([](const Vector3d&) { return Vector3d::Zero(); }, mesh, bases, 2);
    for (const auto& c : f.cell) CHECK(c.norm() == 0.0);
    for (const auto& c : f.face) CHECK(c.norm() == 0.0);
  }
}

TEST_CASE("elliptic projector") {
  std::mt19937 rng(41);
  const PolyMesh mesh = oracles::random_tet_cell(rng);
  const int k = 1;
  const Bases bases = Bases::build(mesh, k);

  SUBCASE("identity on P^{k+1}") {
    // f = affine + quadratic combination expressed in the orthonormal basis.
    VectorXd coeffs = VectorXd::Zero(dim_P3(k + 1));
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    for (int i = 0; i < coeffs.size(); ++i) coeffs(i) = unit(rng);
    const CellBasis& cb = bases.cell[0];
    ScalarField f = [&](const Vector3d& x) {
      return cb.values({x}).row(0).head(coeffs.size()).dot(coeffs);
    };
    VectorField grad_f = [&](const Vector3d& x) {
      const auto D = cb.gradients({x});
      Vector3d g;
      for (int d = 0; d < 3; ++d) g[d] = D[d].row(0).head(coeffs.size()).dot(coeffs);
      return g;
    };
    const VectorXd proj = elliptic_project(f, grad_f, mesh, 0, bases, k + 1, 8);
    CHECK((proj - coeffs).norm() <= 1e-11 * coeffs.norm());
  }
  SUBCASE("constants are fixed points") {
    ScalarField f = [](const Vector3d&) { return -2.5; };
    VectorField g = [](const Vector3d&) { return Vector3d::Zero(); };
    const VectorXd proj = elliptic_project(f, g, mesh, 0, bases, k + 1, 4);
    const double vol = mesh.cell(0).volume;
    CHECK(proj(0) == doctest::Approx(-2.5 * std::sqrt(vol)).epsilon(1e-12));
    CHECK(proj.tail(proj.size() - 1).norm() <= 1e-12);
  }
}

}  // TEST_SUITE
