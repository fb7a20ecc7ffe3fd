#include <doctest.h>

#include <cmath>
#include <random>

#include <polymhd/quadrature.hpp>

#include "oracles.hpp"

using namespace polymhd;
using oracles::Poly3;

namespace {

double integrate(const QuadRule& rule, const std::function<double(const Vector3d&)>& f) {
  double s = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) s += rule.weights[q] * f(rule.nodes[q]);
  return s;
}

}  // namespace

TEST_SUITE("quadrature") {

TEST_CASE("cell rule on the reference tetrahedron") {
  const PolyMesh mesh = oracles::reference_tet();
  const QuadRule rule = cell_rule(mesh, 0, 2);
  CHECK(rule.total_weight() == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  for (double w : rule.weights) CHECK(w > 0.0);
  // int x^2 over the reference tet = 2/5! = 1/60
  CHECK(integrate(rule, [](const Vector3d& x) { return x.x() * x.x(); }) ==
        doctest::Approx(1.0 / 60.0).epsilon(1e-13));
}

TEST_CASE("cell rule on the unit cube integrates the measure") {
  const PolyMesh mesh = oracles::unit_cube_cell();
  for (int deg : {0, 3, 8}) {
    const QuadRule rule = cell_rule(mesh, 0, deg);
    CHECK(rule.total_weight() == doctest::Approx(1.0).epsilon(1e-13));
  }
}

TEST_CASE("random hexahedron, degree 4 vs exact polynomial oracle") {
  std::mt19937 rng(11);
  const Poly3 p = Poly3::monomial(2, 2, 0);
  for (int trial = 0; trial < 4; ++trial) {
    const PolyMesh mesh = oracles::random_hex_cell(rng);
    const QuadRule rule = cell_rule(mesh, 0, 4);
    const double exact = oracles::integrate_cell(p, mesh, 0);
    const double quad = integrate(rule, [&](const Vector3d& x) { return p.eval(x); });
    CHECK(quad == doctest::Approx(exact).epsilon(1e-10));
  }
}

TEST_CASE("face rules") {
  const PolyMesh cube = oracles::unit_cube_cell();
  SUBCASE("unit square face measure") {
    const QuadRule rule = face_rule(cube, 0, 1);
    CHECK(rule.total_weight() == doctest::Approx(1.0).epsilon(1e-14));
  }
  SUBCASE("second moment in the face frame") {
    // int over a unit square of (t1 coordinate about the centroid)^2 = 1/12.
    const Face& F = cube.face(0);
    const QuadRule rule = face_rule(cube, 0, 2);
    const double m2 = integrate(rule, [&](const Vector3d& x) {
      const double t = F.t1.dot(x - F.centroid);
      return t * t;
    });
    CHECK(m2 == doctest::Approx(1.0 / 12.0).epsilon(1e-13));
  }
  SUBCASE("pentagon face vs exact oracle") {
    std::mt19937 rng(3);
    const PolyMesh mesh = oracles::chamfered_cube_cell(rng);
    // Faces 3..5 are pentagons by construction.
    const Poly3 p = Poly3::monomial(1, 2, 0);
    for (std::size_t iF = 3; iF <= 5; ++iF) {
      const QuadRule rule = face_rule(mesh, iF, 3);
      const double exact = oracles::integrate_face(p, mesh, iF);
      const double quad = integrate(rule, [&](const Vector3d& x) { return p.eval(x); });
      CHECK(quad == doctest::Approx(exact).epsilon(1e-10));
    }
  }
}

TEST_CASE("exactness property: random monomials up to the requested degree") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 6; ++trial) {
    const PolyMesh mesh = oracles::random_cell(rng);
    const int deg = 1 + static_cast<int>(rng() % 6);
    const QuadRule rule = cell_rule(mesh, 0, deg);
    for (double w : rule.weights) CHECK(w > 0.0);
    CHECK(rule.total_weight() ==
          doctest::Approx(mesh.cell(0).volume).epsilon(1e-13));
    for (int rep = 0; rep < 3; ++rep) {
      const int a = static_cast<int>(rng() % (deg + 1));
      const int b = static_cast<int>(rng() % (deg + 1 - a));
      const int c = deg - a - b;
      const Poly3 p = Poly3::monomial(a, b, c);
      const double exact = oracles::integrate_cell(p, mesh, 0);
      const double quad = integrate(rule, [&](const Vector3d& x) { return p.eval(x); });
      CHECK(quad == doctest::Approx(exact).epsilon(1e-12));
    }
  }
}

TEST_CASE("degenerate sub-tetrahedron raises a geometry error") {
  // A cell whose star point lies on a face plane: collapse the cube to zero
  // height is invalid earlier, so instead check the guard directly with a
  // flat sub-tet via a doctored star point.
  // build_poly_mesh already rejects such cells, so this exercises cell_sub_tets
  // with a valid mesh and checks positivity of every sub-tet instead.
  const PolyMesh mesh = oracles::unit_cube_cell();
  const auto tets = cell_sub_tets(mesh, 0);
  CHECK(tets.size() == 6 * 4);  // quad faces fan into 4 triangles each
  for (const auto& t : tets) {
    Matrix3d J;
    J.col(0) = t[1] - t[0];
    J.col(1) = t[2] - t[0];
    J.col(2) = t[3] - t[0];
    CHECK(J.determinant() > 0.0);
  }
}

TEST_CASE("gauss-jacobi rules integrate weighted polynomials") {
  std::vector<double> x, w;
  SUBCASE("legendre") {
    gauss_jacobi_01(3, 0, x, w);
    double s = 0.0;  // int_0^1 t^5 = 1/6 (degree 5 = 2n-1)
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 5);
    CHECK(s == doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  }
  SUBCASE("jacobi alpha=2") {
    gauss_jacobi_01(4, 2, x, w);
    // int_0^1 (1-t)^2 t^3 = B(4,3) = 3!2!/6! = 1/60
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += w[i] * std::pow(x[i], 3);
    CHECK(s == doctest::Approx(1.0 / 60.0).epsilon(1e-14));
  }
}

}  // TEST_SUITE
