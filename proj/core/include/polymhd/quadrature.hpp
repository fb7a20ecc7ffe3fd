#ifndef POLYMHD_QUADRATURE_HPP
#define POLYMHD_QUADRATURE_HPP

#include <vector>

#include "polymhd/common.hpp"
#include "polymhd/mesh.hpp"

namespace polymhd {

/// A positive-weight quadrature rule on a cell or face, in physical coordinates.
struct QuadRule {
  std::vector<Vector3d> nodes;
  std::vector<double> weights;  ///< volume (cell) or area (face) units
  int exactness = 0;

  std::size_t size() const { return nodes.size(); }
  double total_weight() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
  }
};

/// Gauss nodes/weights on [0,1] for the weight (1-x)^alpha, exact for
/// polynomials of degree <= 2n-1 against that weight. alpha = 0 is
/// Gauss-Legendre.
void gauss_jacobi_01(int n, int alpha, std::vector<double>& nodes, std::vector<double>& weights);

/// Conical-product rule on the reference triangle {x,y >= 0, x+y <= 1};
/// weights sum to 1/2.
void reference_triangle_rule(int degree, std::vector<Eigen::Vector2d>& nodes,
                             std::vector<double>& weights);

/// Conical-product rule on the reference tetrahedron; weights sum to 1/6.
void reference_tet_rule(int degree, std::vector<Vector3d>& nodes, std::vector<double>& weights);

/// Sub-tetrahedra covering cell T: each face is fanned into triangles about
/// its centroid (a triangular face stays whole) and coned to the star point.
/// Throws GeometryError on a degenerate (non-positive volume) sub-tetrahedron.
std::vector<std::array<Vector3d, 4>> cell_sub_tets(const PolyMesh& mesh, std::size_t iT);

/// Fan triangles covering face F (about the centroid; a triangle stays whole).
std::vector<std::array<Vector3d, 3>> face_sub_triangles(const PolyMesh& mesh, std::size_t iF);

/// Rule exact for 3-variate polynomials of total degree <= deg on cell T.
QuadRule cell_rule(const PolyMesh& mesh, std::size_t iT, int deg);

/// Rule exact for polynomials of total degree <= deg on the planar face F.
QuadRule face_rule(const PolyMesh& mesh, std::size_t iF, int deg);

}  // namespace polymhd

#endif
