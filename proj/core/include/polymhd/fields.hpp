#ifndef POLYMHD_FIELDS_HPP
#define POLYMHD_FIELDS_HPP

#include <vector>

#include "polymhd/common.hpp"
#include "polymhd/mesh.hpp"

namespace polymhd {

/// A member of the hybrid space: one vector polynomial per cell and one per
/// face. Coefficient blocks are component-major: [all x, all y, all z]
/// against the scalar basis of the cell (degree k) or face (degree k).
struct HybridField {
  int k = 0;
  std::vector<VectorXd> cell;  ///< per cell, size 3*dim_P3(k)
  std::vector<VectorXd> face;  ///< per face, size 3*dim_P2(k)

  HybridField() = default;
  HybridField(const PolyMesh& mesh, int degree);

  HybridField& operator+=(const HybridField& other);
  HybridField& operator-=(const HybridField& other);
};

/// A member of the broken scalar space P^k with its global zero-mean
/// Lagrange multiplier.
struct CellScalarField {
  int k = 0;
  std::vector<VectorXd> cell;  ///< per cell, size dim_P3(k)
  double multiplier = 0.0;

  CellScalarField() = default;
  CellScalarField(const PolyMesh& mesh, int degree);

  CellScalarField& operator-=(const CellScalarField& other);
};

}  // namespace polymhd

#endif
