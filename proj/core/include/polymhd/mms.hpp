#ifndef POLYMHD_MMS_HPP
#define POLYMHD_MMS_HPP

#include <vector>

#include "polymhd/assembly.hpp"

namespace polymhd {

/// One trigonometric factor sin/cos(a.x + phase) of a product term.
struct TrigFactor {
  Vector3d wave = Vector3d::Zero();
  double phase = 0.0;
  bool is_sin = true;
};

/// amplitude * product of trigonometric factors; value, gradient and
/// Laplacian are evaluated by exact product-rule differentiation.
struct TrigProduct {
  double amplitude = 1.0;
  std::vector<TrigFactor> factors;

  double value(const Vector3d& x) const;
  Vector3d gradient(const Vector3d& x) const;
  double laplacian(const Vector3d& x) const;
};

/// A scalar field given as a sum of trigonometric products.
struct TrigField {
  std::vector<TrigProduct> terms;

  double value(const Vector3d& x) const;
  Vector3d gradient(const Vector3d& x) const;
  double laplacian(const Vector3d& x) const;
};

/// The closed-form manufactured solution on the unit cube: a divergence-free
/// velocity vanishing on the boundary, a divergence-free magnetic field with
/// zero normal trace, a trigonometric fluid multiplier and r = 0.
struct ExactSolution {
  TrigField u_comp[3], b_comp[3], q_field;

  static ExactSolution standard();

  Vector3d u(const Vector3d& x) const;
  Matrix3d grad_u(const Vector3d& x) const;  ///< (i,j) entry: d_j u_i
  Vector3d lap_u(const Vector3d& x) const;
  Vector3d b(const Vector3d& x) const;
  Matrix3d grad_b(const Vector3d& x) const;
  Vector3d lap_b(const Vector3d& x) const;
  double q(const Vector3d& x) const;
  Vector3d grad_q(const Vector3d& x) const;
  double r(const Vector3d&) const { return 0.0; }

  VectorField u_field() const;
  VectorField b_field() const;
  ScalarField q_scalar() const;
  /// Fluid pressure p = rho q - rho/2 b.b.
  ScalarField p_scalar(double rho) const;
};

/// Sources assembled from the analytic derivatives:
/// f = -nu_k lap u + (u.grad)u - (b.grad)b + grad q,
/// g = -nu_m lap b + (u.grad)b - (b.grad)u  (grad r = 0).
std::pair<VectorField, VectorField> exact_sources(const ExactSolution& sol, double nu_k,
                                                  double nu_m);

/// ModelParams for the manufactured problem.
ModelParams mms_params(const ExactSolution& sol, double nu_k, double nu_m, double rho = 1.0);

/// The relative errors of a discrete state against the exact solution.
struct ErrorReport {
  double E_a_u = 0.0, E_a_b = 0.0;  ///< relative energy errors
  double E_q = 0.0;                 ///< relative L2 error of the fluid multiplier
  double E_p = 0.0;                 ///< relative L2 error of the recovered fluid pressure
  double E_0_u = 0.0, E_0_b = 0.0;  ///< relative L2-like hybrid errors
  double h = 0.0;
  std::ptrdiff_t dofs_retained = 0;
};

/// Empirical convergence rate between two reports: log(e0/e1)/log(h0/h1).
double convergence_rate(double e_coarse, double e_fine, double h_coarse, double h_fine);

/// All six relative errors; denominators are the interpolant norms.
/// Throws DegenerateProblemError on a vanishing denominator.
ErrorReport compute_errors(const Assembler& assembler, const VectorXd& U,
                           const ExactSolution& sol);

/// Pointwise recovered fluid pressure p_h = rho q_h - rho/2 b_h.b_h (cell
/// polynomials, no projection) and its relative L2 error.
struct FluidPressure {
  std::function<double(std::size_t, const Vector3d&)> value;  ///< (cell id, point)
  double error = 0.0;
};
FluidPressure recover_fluid_pressure(const Assembler& assembler, const VectorXd& U,
                                     const ExactSolution& sol, double rho);

}  // namespace polymhd

#endif
