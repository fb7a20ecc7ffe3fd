#include "polymhd/fields.hpp"

#include "polymhd/basis.hpp"

namespace polymhd {

HybridField::HybridField(const PolyMesh& mesh, int degree) : k(degree) {
  cell.assign(mesh.n_cells(), VectorXd::Zero(3 * dim_P3(degree)));
  face.assign(mesh.n_faces(), VectorXd::Zero(3 * dim_P2(degree)));
}

HybridField& HybridField::operator+=(const HybridField& other) {
  for (std::size_t i = 0; i < cell.size(); ++i) cell[i] += other.cell[i];
  for (std::size_t i = 0; i < face.size(); ++i) face[i] += other.face[i];
  return *this;
}

HybridField& HybridField::operator-=(const HybridField& other) {
  for (std::size_t i = 0; i < cell.size(); ++i) cell[i] -= other.cell[i];
  for (std::size_t i = 0; i < face.size(); ++i) face[i] -= other.face[i];
  return *this;
}

CellScalarField::CellScalarField(const PolyMesh& mesh, int degree) : k(degree) {
  cell.assign(mesh.n_cells(), VectorXd::Zero(dim_P3(degree)));
}

CellScalarField& CellScalarField::operator-=(const CellScalarField& other) {
  for (std::size_t i = 0; i < cell.size(); ++i) cell[i] -= other.cell[i];
  multiplier -= other.multiplier;
  return *this;
}

}  // namespace polymhd
