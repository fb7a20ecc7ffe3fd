#ifndef POLYMHD_LOCAL_OPS_HPP
#define POLYMHD_LOCAL_OPS_HPP

#include <array>
#include <vector>

#include "polymhd/basis.hpp"
#include "polymhd/common.hpp"
#include "polymhd/mesh.hpp"
#include "polymhd/quadrature.hpp"

namespace polymhd {

/// Per-cell realization of the local HHO operators at degree k.
///
/// Local vector DOF layout (frozen; condensation and assembly depend on it):
/// cell block first with the x-coefficients, then y, then z against the cell
/// scalar basis, followed by one block per face in F_T order with the same
/// component-major layout. The scalar layout drops the component dimension:
/// [cell scalar dofs | face 0 scalar dofs | ...].
///
/// Vector operators that act componentwise (potential reconstruction,
/// stabilized diffusion form, gradient reconstruction) are stored in their
/// scalar form; expand_componentwise() lifts a scalar bilinear form to the
/// vector layout.
class LocalOps {
 public:
  LocalOps(const PolyMesh& mesh, std::size_t iT, const Bases& bases);

  int k() const { return m_k; }
  std::size_t cell_index() const { return m_iT; }
  int n_cell_scalar() const { return m_nk; }        ///< dim P^k(T)
  int n_high_scalar() const { return m_nk1; }       ///< dim P^{k+1}(T)
  int n_grad_scalar() const { return m_n2k; }       ///< dim P^{2k}(T)
  int n_face_scalar() const { return m_nf; }        ///< dim P^k(F)
  int n_faces() const { return m_n_faces; }
  int n_scalar() const { return m_ns; }             ///< scalar hybrid dofs
  int n_local() const { return 3 * m_ns; }          ///< vector hybrid dofs
  double h() const { return m_hT; }
  double volume() const { return m_vol; }

  /// Index of component c of scalar hybrid dof s in the vector layout.
  int vdof(int c, int s) const {
    if (s < m_nk) return c * m_nk + s;
    const int f = (s - m_nk) / m_nf;
    const int i = (s - m_nk) % m_nf;
    return 3 * m_nk + f * 3 * m_nf + c * m_nf + i;
  }

  /// Scalar potential reconstruction r_T^{k+1}: (dim P^{k+1}) x n_scalar.
  const MatrixXd& potential() const { return m_potential; }
  /// Vector potential reconstruction: (3 dim P^{k+1}) x n_local, component-major rows.
  MatrixXd potential_vec() const;
  /// Divergence reconstruction D_T^k: (dim P^k) x n_local.
  const MatrixXd& divergence() const { return m_divergence; }
  /// Scalar gradient reconstruction, component j of the reconstructed
  /// gradient: (dim P^{2k}) x n_scalar. Row a holds the coefficient of the
  /// degree-2k basis function a. The full tensor reconstruction of a vector
  /// field is (G v)_{ij} = gradient(j) applied to the component-i slice.
  const MatrixXd& gradient(int j) const { return m_gradient[j]; }
  /// Scalar diffusion form a_T (consistency + stabilization): n_scalar square, SPD.
  const MatrixXd& diffusion_scalar() const { return m_a; }
  /// Vector diffusion form on the full local layout.
  const MatrixXd& diffusion_vec() const { return m_a_vec; }
  /// Velocity-pressure coupling d_T as a (dim P^k pressure) x n_local matrix:
  /// d_T(v, q) = -q^T divergence() v = q^T coupling() v.
  const MatrixXd& pressure_coupling() const { return m_d; }
  /// Gram matrix of the local H1-like seminorm, scalar layout.
  const MatrixXd& seminorm_scalar() const { return m_norm1; }
  /// Stiffness matrix of the degree-(k+1) cell basis.
  const MatrixXd& high_stiffness() const { return m_K1; }
  /// pi_F^k of the trace of the degree-(k+1) cell basis on face f.
  const MatrixXd& face_trace(int f) const { return m_trace[f]; }

  /// Lifts a scalar bilinear form to the vector layout (block-diagonal per component).
  MatrixXd expand_componentwise(const MatrixXd& scalar_form) const;

  /// Restriction of a vector-layout local vector to the scalar slice of component c.
  VectorXd component_slice(const VectorXd& v, int c) const;

  /// Trilinear convection form t_T(v, w, z); v enters through its cell part only.
  double apply_tT(const VectorXd& v, const VectorXd& w, const VectorXd& z) const;

  /// Matrix A with t_T(v, w, z) = z^T A w for the fixed first slot v;
  /// skew-symmetric by construction, so t_T(v, w, w) vanishes identically.
  MatrixXd t_second_slot(const VectorXd& v) const;

  /// Matrix B with t_T(v, w, z) = z^T B v for the fixed second slot w;
  /// only cell columns are nonzero.
  MatrixXd t_first_slot(const VectorXd& w) const;

  /// Both exact linearizations of t_T: (d/dv, d/dw) with the third slot as
  /// the test direction.
  std::pair<MatrixXd, MatrixXd> tT_partials(const VectorXd& v, const VectorXd& w) const {
    return {t_first_slot(w), t_second_slot(v)};
  }

  /// Cell values of the degree-k scalar basis at the cached cell quadrature nodes.
  const MatrixXd& cell_values() const { return m_phi_k; }
  const std::vector<double>& cell_weights() const { return m_wq; }

 private:
  MatrixXd grad_combos(const VectorXd& v) const;  // npts x 3 values of the cell part

  int m_k, m_nk, m_nk1, m_n2k, m_nf, m_n_faces, m_ns;
  std::size_t m_iT;
  double m_hT, m_vol;

  MatrixXd m_potential;                // Nk1 x Ns
  MatrixXd m_K1;                       // Nk1 x Nk1
  MatrixXd m_a;                        // Ns x Ns
  MatrixXd m_a_vec;                    // 3Ns x 3Ns
  MatrixXd m_divergence;               // Nk x 3Ns
  MatrixXd m_d;                        // Nk x 3Ns
  std::array<MatrixXd, 3> m_gradient;  // each N2k x Ns
  MatrixXd m_norm1;                    // Ns x Ns
  std::vector<MatrixXd> m_trace;       // per face: Nf x Nk1

  MatrixXd m_phi_k;   // cell rule values of P^k basis
  MatrixXd m_psi_2k;  // cell rule values of P^{2k} basis
  std::vector<double> m_wq;
};

/// Builds the local operators for every cell, in parallel.
std::vector<LocalOps> build_local_ops(const PolyMesh& mesh, const Bases& bases,
                                      unsigned workers = 1);

}  // namespace polymhd

#endif
