#ifndef POLYMHD_DOF_LAYOUT_HPP
#define POLYMHD_DOF_LAYOUT_HPP

#include <cstddef>
#include <vector>

#include "polymhd/basis.hpp"
#include "polymhd/common.hpp"
#include "polymhd/fields.hpp"
#include "polymhd/mesh.hpp"

namespace polymhd {

/// State of the coupled system: velocity and magnetic hybrid fields plus the
/// two broken pressures, each carrying its zero-mean multiplier.
struct SystemState {
  HybridField u, b;
  CellScalarField q, r;
};

/// Model data: viscosities and volumetric sources.
struct ModelParams {
  double nu_k = 0.1;  ///< kinematic viscosity
  double nu_m = 0.1;  ///< magnetic diffusivity
  double rho = 1.0;   ///< mass density (fluid-pressure recovery only)
  VectorField f;      ///< momentum source
  VectorField g;      ///< induction source
};

/// Global numbering of the unknowns with the condensation split baked in.
///
/// Eliminated DOFs come first, cell by cell: the velocity and magnetic cell
/// blocks and all non-mean pressure coefficients of both pressures. Retained
/// DOFs follow: velocity face blocks (interior faces only; the no-slip
/// condition removes boundary blocks), magnetic face blocks (two tangential
/// components per scalar basis function on boundary faces), one mean
/// coefficient per cell for each pressure, and the two zero-mean multipliers.
class DofLayout {
 public:
  /// Boundary handling; Unconstrained keeps every face DOF (test harnesses
  /// and consistency probes on the full hybrid space).
  enum class Bc { Strong, Unconstrained };

  DofLayout(const PolyMesh& mesh, int k, Bc bc = Bc::Strong);

  int k() const { return m_k; }
  const PolyMesh& mesh() const { return *m_mesh; }

  std::ptrdiff_t n_total() const { return m_n_total; }
  std::ptrdiff_t n_eliminated() const { return m_n_eliminated; }
  std::ptrdiff_t n_retained() const { return m_n_total - m_n_eliminated; }
  int eliminated_per_cell() const { return m_elim_per_cell; }

  std::ptrdiff_t cell_of_eliminated(std::ptrdiff_t gid) const { return gid / m_elim_per_cell; }

  // Per-cell assembly data.
  /// Reduction from the full local vector layout of cell iT to its unknowns:
  /// u_local = R * gathered; identity columns except on boundary magnetic
  /// faces where the columns hold the tangential frame.
  const MatrixXd& reduction_u(std::size_t iT) const { return m_Ru[iT]; }
  const MatrixXd& reduction_b(std::size_t iT) const { return m_Rb[iT]; }
  const std::vector<std::ptrdiff_t>& dofs_u(std::size_t iT) const { return m_gids_u[iT]; }
  const std::vector<std::ptrdiff_t>& dofs_b(std::size_t iT) const { return m_gids_b[iT]; }
  /// Pressure DOF ids of cell iT in basis order (mean first, then eliminated).
  const std::vector<std::ptrdiff_t>& dofs_q(std::size_t iT) const { return m_gids_q[iT]; }
  const std::vector<std::ptrdiff_t>& dofs_r(std::size_t iT) const { return m_gids_r[iT]; }

  std::ptrdiff_t lambda_q() const { return m_lambda_q; }
  std::ptrdiff_t lambda_r() const { return m_lambda_r; }
  std::ptrdiff_t u_face_id(std::size_t iF) const { return m_u_face_id[iF]; }
  std::ptrdiff_t b_face_id(std::size_t iF) const { return m_b_face_id[iF]; }
  int b_face_width(std::size_t iF) const { return m_b_face_width[iF]; }
  std::ptrdiff_t q_mean_id(std::size_t iT) const { return m_q_mean_base + std::ptrdiff_t(iT); }
  std::ptrdiff_t r_mean_id(std::size_t iT) const { return m_r_mean_base + std::ptrdiff_t(iT); }

  VectorXd gather(const VectorXd& global, const std::vector<std::ptrdiff_t>& ids) const {
    VectorXd out(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) out(i) = global(ids[i]);
    return out;
  }

  /// Packs structured fields into the global unknown vector (boundary
  /// velocity blocks are dropped, boundary magnetic blocks projected onto
  /// their tangential frame).
  VectorXd to_global(const SystemState& state) const;
  SystemState from_global(const VectorXd& U) const;

 private:
  const PolyMesh* m_mesh;
  int m_k, m_nk, m_nf, m_elim_per_cell;
  std::ptrdiff_t m_n_eliminated = 0, m_n_total = 0;
  std::ptrdiff_t m_q_mean_base = 0, m_r_mean_base = 0, m_lambda_q = 0, m_lambda_r = 0;
  std::vector<std::ptrdiff_t> m_u_face_id, m_b_face_id;
  std::vector<int> m_b_face_width;
  std::vector<MatrixXd> m_Ru, m_Rb;
  std::vector<std::vector<std::ptrdiff_t>> m_gids_u, m_gids_b, m_gids_q, m_gids_r;
};

DofLayout build_layout(const PolyMesh& mesh, int k);

}  // namespace polymhd

#endif
