#include "polymhd/newton.hpp"

#include <chrono>

#include <Eigen/SparseLU>

namespace polymhd {

VectorXd solve_newton(const Assembler& assembler, const NewtonConfig& config, SolveReport& report) {
  config.validate();
  const auto t0 = std::chrono::steady_clock::now();
  const DofLayout& layout = assembler.layout();

  VectorXd U = VectorXd::Zero(layout.n_total());
  VectorXd G = assembler.residual(U);
  const double r0 = G.norm();
  report = SolveReport{};
  report.n_retained = layout.n_retained();
  report.residual_history.push_back(r0);
  const double stop = std::max(config.rel_tol * r0, config.abs_floor);

  Eigen::SparseLU<SparseMat, Eigen::COLAMDOrdering<int>> solver;
  bool analyzed = false;
  double r_prev = r0;

  for (int n = 1; n <= config.max_iters; ++n) {
    SparseMat J;
    assembler.residual_and_jacobian(U, G, J);

    SparseMat S;
    VectorXd rhs;
    EliminationRecord record;
    static_condense(J, VectorXd(-G), layout, S, rhs, record);
    report.schur_nonzeros = S.nonZeros();

    if (!analyzed) {
      solver.analyzePattern(S);
      analyzed = true;
    }
    solver.factorize(S);
    if (solver.info() != Eigen::Success)
      throw SolveError("singular Schur factorization in Newton step " + std::to_string(n),
                       report.residual_history);
    const VectorXd delta = recover_interior(record, VectorXd(solver.solve(rhs)));

    // Full step when it reduces the residual (the common case, leaving the
    // quadratic tail untouched); halve as a fallback on very coarse meshes
    // where the Stokes initial guess overshoots.
    double step = 1.0;
    VectorXd U_best = U + delta;
    VectorXd G_best = assembler.residual(U_best);
    double r_best = G_best.norm();
    for (int halving = 0; halving < 12 && r_best > (1.0 - 1e-4 * step) * r_prev; ++halving) {
      step *= 0.5;
      VectorXd U_try = U + step * delta;
      VectorXd G_try = assembler.residual(U_try);
      if (G_try.norm() < r_best) {
        U_best.swap(U_try);
        G_best.swap(G_try);
        r_best = G_best.norm();
      }
    }
    U.swap(U_best);
    G.swap(G_best);
    const double rn = r_best;
    r_prev = rn;
    report.residual_history.push_back(rn);
    report.iterations = n;
    if (rn <= stop) {
      report.wall_seconds =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      return U;
    }
  }
  throw SolveError("Newton failed to reach tolerance " + std::to_string(config.rel_tol) + " in " +
                       std::to_string(config.max_iters) + " iterations",
                   report.residual_history);
}

std::pair<SystemState, SolveReport> solve(const PolyMesh& mesh, int k, const ModelParams& params,
                                          const NewtonConfig& config, unsigned workers) {
  const Bases bases = Bases::build(mesh, k, workers);
  const std::vector<LocalOps> ops = build_local_ops(mesh, bases, workers);
  const DofLayout layout(mesh, k);
  const Assembler assembler(mesh, bases, ops, layout, params, workers);
  SolveReport report;
  const VectorXd U = solve_newton(assembler, config, report);
  return {layout.from_global(U), report};
}

}  // namespace polymhd
