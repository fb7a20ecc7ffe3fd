#ifndef POLYMHD_ASSEMBLY_HPP
#define POLYMHD_ASSEMBLY_HPP

#include <vector>

#include <Eigen/Sparse>

#include "polymhd/dof_layout.hpp"
#include "polymhd/local_ops.hpp"

namespace polymhd {

using SparseMat = Eigen::SparseMatrix<double>;

/// Assembles the nonlinear residual G(U) and its exact Jacobian DG(U) of the
/// coupled discrete system over the DofLayout numbering.
///
/// Rows, per cell: momentum (velocity test functions), induction (magnetic
/// test functions), the two divergence rows tested with each pressure basis
/// function, and globally the two zero-mean multiplier rows. Source terms
/// pair with cell test components only.
///
/// Local contributions are computed concurrently per cell and merged in cell
/// order, so assembled objects are identical for any worker count.
class Assembler {
 public:
  Assembler(const PolyMesh& mesh, const Bases& bases, const std::vector<LocalOps>& ops,
            const DofLayout& layout, const ModelParams& params, unsigned workers = 1);

  const DofLayout& layout() const { return *m_layout; }
  const Bases& bases() const { return *m_bases; }
  const PolyMesh& mesh() const { return *m_mesh; }
  const std::vector<LocalOps>& ops() const { return *m_ops; }
  const ModelParams& params() const { return m_params; }
  unsigned workers() const { return m_workers; }

  /// Global load vector F_h (momentum and induction cell rows only).
  const VectorXd& load() const { return m_load; }

  VectorXd residual(const VectorXd& U) const;
  SparseMat jacobian(const VectorXd& U) const;
  /// One-pass variant sharing the state-dependent convection matrices.
  void residual_and_jacobian(const VectorXd& U, VectorXd& G, SparseMat& J) const;

  /// a_h restricted to one hybrid field of the state: field 0 = velocity, 1 = magnetic.
  double energy_a(const VectorXd& U, int field) const;
  /// Squared H1-like seminorm of one hybrid field of the state.
  double seminorm1_sq(const VectorXd& U, int field) const;
  /// T_h evaluated at three states (diagnostics and property tests).
  double trilinear(const VectorXd& X, const VectorXd& Y, const VectorXd& Z) const;

 private:
  void assemble(const VectorXd& U, VectorXd* G_out, SparseMat* J_out) const;
  void local_state(const VectorXd& U, std::size_t iT, VectorXd& u_loc, VectorXd& b_loc,
                   VectorXd& q_loc, VectorXd& r_loc) const;

  const PolyMesh* m_mesh;
  const Bases* m_bases;
  const std::vector<LocalOps>* m_ops;
  const DofLayout* m_layout;
  ModelParams m_params;
  unsigned m_workers;

  std::vector<VectorXd> m_load_f, m_load_g;  // per cell, 3*dim P^k
  VectorXd m_load;
};

/// Elimination record of one static condensation: everything needed to
/// recover the eliminated sub-vector after the retained solve.
struct EliminationRecord {
  std::vector<Eigen::PartialPivLU<MatrixXd>> lu;    // per cell, J_EE factor
  std::vector<MatrixXd> coupling;                   // per cell, J_ER
  std::vector<std::vector<std::ptrdiff_t>> retained_ids;  // per cell
  std::vector<VectorXd> rhs_elim;                   // per cell slice of the rhs
  std::ptrdiff_t n_eliminated = 0;
  std::ptrdiff_t n_retained = 0;
};

/// Schur complement of the (block-diagonal) eliminated unknowns for the
/// linear system J x = rhs. The returned matrix and vector are indexed by
/// retained DOF (global id minus n_eliminated).
/// Throws CondensationError naming the cell when a local block is singular.
void static_condense(const SparseMat& J, const VectorXd& rhs, const DofLayout& layout,
                     SparseMat& schur, VectorXd& schur_rhs, EliminationRecord& record);

/// Completes the retained solution to the full vector, reproducing the
/// eliminated unknowns exactly.
VectorXd recover_interior(const EliminationRecord& record, const VectorXd& retained);

/// Smallest nonzero generalized singular value of the velocity-pressure
/// coupling: a numerical stand-in for the inf-sup constant. Dense; intended
/// for small meshes.
double infsup_probe(const PolyMesh& mesh, const Bases& bases, const std::vector<LocalOps>& ops,
                    const DofLayout& layout);

}  // namespace polymhd

#endif
