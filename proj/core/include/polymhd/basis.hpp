#ifndef POLYMHD_BASIS_HPP
#define POLYMHD_BASIS_HPP

#include <array>
#include <functional>
#include <vector>

#include "polymhd/common.hpp"
#include "polymhd/fields.hpp"
#include "polymhd/mesh.hpp"
#include "polymhd/quadrature.hpp"

namespace polymhd {

inline int dim_P3(int k) { return (k + 1) * (k + 2) * (k + 3) / 6; }
inline int dim_P2(int k) { return (k + 1) * (k + 2) / 2; }

using ScalarField = std::function<double(const Vector3d&)>;
using VectorField = std::function<Vector3d(const Vector3d&)>;
using TensorField = std::function<Matrix3d(const Vector3d&)>;

/// Scaled-monomial basis of P^degree on a cell, optionally L2-orthonormalized.
///
/// Monomials are ((x - center)/scale)^a in graded lexicographic order, so the
/// first dim_P3(d) functions always span P^d. The stored change of basis is
/// lower triangular, which preserves that nesting after orthonormalization.
class CellBasis {
 public:
  static CellBasis monomials(int degree, const Vector3d& center, double scale);
  /// Orthonormalizes against the L2(T) inner product using a rule of
  /// exactness >= 2*degree. Throws ConditioningError when the monomial Gram
  /// matrix is numerically singular.
  static CellBasis orthonormal(const PolyMesh& mesh, std::size_t iT, int degree);

  int degree() const { return m_degree; }
  int size() const { return static_cast<int>(m_exponents.size()); }
  const Vector3d& center() const { return m_center; }
  double scale() const { return m_scale; }
  bool orthonormalized() const { return m_orthonormal; }
  const MatrixXd& change_of_basis() const { return m_coeff; }

  /// Basis values at the given points; rows are points, columns functions.
  MatrixXd values(const std::vector<Vector3d>& points) const;
  /// Componentwise gradients at the given points: one matrix per derivative axis.
  std::array<MatrixXd, 3> gradients(const std::vector<Vector3d>& points) const;

 private:
  int m_degree = 0;
  Vector3d m_center = Vector3d::Zero();
  double m_scale = 1.0;
  bool m_orthonormal = false;
  std::vector<std::array<int, 3>> m_exponents;
  MatrixXd m_coeff;  // phi_i = sum_j coeff(i,j) m_j, lower triangular
};

/// Scaled-monomial basis of P^degree on a planar face, in the (t1,t2) frame.
class FaceBasis {
 public:
  static FaceBasis monomials(const Face& face, int degree);
  static FaceBasis orthonormal(const PolyMesh& mesh, std::size_t iF, int degree);

  int degree() const { return m_degree; }
  int size() const { return static_cast<int>(m_exponents.size()); }
  bool orthonormalized() const { return m_orthonormal; }
  const MatrixXd& change_of_basis() const { return m_coeff; }

  MatrixXd values(const std::vector<Vector3d>& points) const;

 private:
  int m_degree = 0;
  Vector3d m_center = Vector3d::Zero();
  Vector3d m_t1 = Vector3d::Zero(), m_t2 = Vector3d::Zero();
  double m_scale = 1.0;
  bool m_orthonormal = false;
  std::vector<std::array<int, 2>> m_exponents;
  MatrixXd m_coeff;
};

/// Gram matrix of the basis under the rule; throws ConditioningError if the
/// factorization detects loss of positive-definiteness (orthonormalize first).
MatrixXd mass_matrix(const CellBasis& basis, const QuadRule& rule);
MatrixXd mass_matrix(const FaceBasis& basis, const QuadRule& rule);

/// L2 projection coefficients of f on span(basis) using the given rule.
VectorXd l2_project(const ScalarField& f, const CellBasis& basis, const QuadRule& rule);
VectorXd l2_project(const ScalarField& f, const FaceBasis& basis, const QuadRule& rule);

/// Per-mesh collection of orthonormal bases: one cell basis of degree
/// max(k+1, 2k) per cell (prefixes give P^k, P^{k+1}, P^{2k}), one face basis
/// of degree k per face. Shared by the interpolator and the local operators
/// so that coefficient blocks mean the same thing everywhere.
struct Bases {
  int k = 0;
  int cell_degree = 0;
  std::vector<CellBasis> cell;
  std::vector<FaceBasis> face;

  static Bases build(const PolyMesh& mesh, int k, unsigned workers = 1);
};

/// Quadrature exactness used for integrals involving non-polynomial
/// (manufactured-solution) fields.
constexpr int kMmsQuadratureDegree = 14;

/// Componentwise L2 projection of a vector field onto P^k(T)^3,
/// component-major coefficient layout.
VectorXd l2_project_cell(const VectorField& v, const PolyMesh& mesh, std::size_t iT,
                         const Bases& bases, int quad_degree = kMmsQuadratureDegree);
VectorXd l2_project_face(const VectorField& v, const PolyMesh& mesh, std::size_t iF,
                         const Bases& bases, int quad_degree = kMmsQuadratureDegree);

/// Global interpolator: cell blocks are cell L2 projections, face blocks are
/// face L2 projections.
HybridField interpolate(const VectorField& v, const PolyMesh& mesh, const Bases& bases,
                        int quad_degree = kMmsQuadratureDegree, unsigned workers = 1);

/// Scalar elliptic projection on P^{degree}(T): gradient L2-matched, cell
/// mean preserved. Needs the analytic gradient of f.
VectorXd elliptic_project(const ScalarField& f, const VectorField& grad_f, const PolyMesh& mesh,
                          std::size_t iT, const Bases& bases, int degree,
                          int quad_degree = kMmsQuadratureDegree);

/// Evaluates a component-major vector polynomial at a point.
Vector3d eval_cell_vector(const CellBasis& basis, int n_scalar, const VectorXd& coeffs,
                          const Vector3d& x);

}  // namespace polymhd

#endif
