#ifndef POLYMHD_NEWTON_HPP
#define POLYMHD_NEWTON_HPP

#include <vector>

#include "polymhd/assembly.hpp"

namespace polymhd {

struct NewtonConfig {
  double rel_tol = 1e-6;     ///< exit when ||G|| relative to the initial value drops below this
  double abs_floor = 1e-13;  ///< absolute fallback (zero-source problems)
  int max_iters = 25;

  void validate() const {
    if (!(rel_tol > 0.0 && rel_tol < 1.0))
      throw std::invalid_argument("Newton tolerance must lie in (0,1)");
    if (max_iters < 1) throw std::invalid_argument("Newton needs at least one iteration");
  }
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> residual_history;  ///< entry 0 is ||G(0)||, then one entry per step
  std::ptrdiff_t n_retained = 0;
  std::ptrdiff_t schur_nonzeros = 0;
  double wall_seconds = 0.0;
};

/// Newton on the condensed system, initialized with the zero vector: each
/// step factorizes the Schur complement with a sparse direct solver (symbolic
/// analysis reused across iterations) and recovers the eliminated unknowns
/// exactly. Full steps are taken whenever they reduce the residual; a
/// halving fallback guards the earliest iterations on very coarse meshes.
/// Throws SolveError (carrying the residual history) when max_iters is
/// exceeded or the factorization fails.
VectorXd solve_newton(const Assembler& assembler, const NewtonConfig& config, SolveReport& report);

/// Convenience driver: builds bases, local operators, layout and assembler,
/// then runs solve_newton. Deterministic for any fixed inputs; the worker
/// count does not change the result.
std::pair<SystemState, SolveReport> solve(const PolyMesh& mesh, int k, const ModelParams& params,
                                          const NewtonConfig& config = {}, unsigned workers = 1);

}  // namespace polymhd

#endif
