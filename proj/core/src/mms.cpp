#include "polymhd/mms.hpp"

#include <cmath>
#include <numbers>
#include <tuple>

namespace polymhd {

namespace {
struct FactorEval {
  double v;
  Vector3d g;
  double lap;
};

FactorEval eval_factor(const TrigFactor& f, const Vector3d& x) {
  const double arg = f.wave.dot(x) + f.phase;
  FactorEval e;
  if (f.is_sin) {
    e.v = std::sin(arg);
    e.g = std::cos(arg) * f.wave;
  } else {
    e.v = std::cos(arg);
    e.g = -std::sin(arg) * f.wave;
  }
  e.lap = -f.wave.squaredNorm() * e.v;
  return e;
}
}  // namespace

double TrigProduct::value(const Vector3d& x) const {
  double p = amplitude;
  for (const auto& f : factors) p *= eval_factor(f, x).v;
  return p;
}

Vector3d TrigProduct::gradient(const Vector3d& x) const {
  const std::size_t n = factors.size();
  std::vector<FactorEval> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = eval_factor(factors[i], x);
  Vector3d g = Vector3d::Zero();
  for (std::size_t m = 0; m < n; ++m) {
    double rest = amplitude;
    for (std::size_t l = 0; l < n; ++l)
      if (l != m) rest *= e[l].v;
    g += rest * e[m].g;
  }
  return g;
}

double TrigProduct::laplacian(const Vector3d& x) const {
  const std::size_t n = factors.size();
  std::vector<FactorEval> e(n);
  for (std::size_t i = 0; i < n; ++i) e[i] = eval_factor(factors[i], x);
  double lap = 0.0;
  for (std::size_t m = 0; m < n; ++m) {
    double rest = amplitude;
    for (std::size_t l = 0; l < n; ++l)
      if (l != m) rest *= e[l].v;
    lap += rest * e[m].lap;
  }
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t p = m + 1; p < n; ++p) {
      double rest = 2.0 * amplitude;
      for (std::size_t l = 0; l < n; ++l)
        if (l != m && l != p) rest *= e[l].v;
      lap += rest * e[m].g.dot(e[p].g);
    }
  return lap;
}

double TrigField::value(const Vector3d& x) const {
  double s = 0.0;
  for (const auto& t : terms) s += t.value(x);
  return s;
}

Vector3d TrigField::gradient(const Vector3d& x) const {
  Vector3d s = Vector3d::Zero();
  for (const auto& t : terms) s += t.gradient(x);
  return s;
}

double TrigField::laplacian(const Vector3d& x) const {
  double s = 0.0;
  for (const auto& t : terms) s += t.laplacian(x);
  return s;
}

ExactSolution ExactSolution::standard() {
  constexpr double pi = std::numbers::pi;
  auto S = [](const Vector3d& a) { return TrigFactor{a, 0.0, true}; };
  auto C = [](const Vector3d& a) { return TrigFactor{a, 0.0, false}; };
  const Vector3d e1 = pi * Vector3d::UnitX();
  const Vector3d e2 = pi * Vector3d::UnitY();
  const Vector3d e3 = pi * Vector3d::UnitZ();

  ExactSolution sol;
  sol.u_comp[0].terms = {{1.0, {S(e1), S(e1), S(e2), S(e3), S(e2 - e3)}}};
  sol.u_comp[1].terms = {{1.0, {S(e2), S(e2), S(e1), S(e3), S(e3 - e1)}}};
  sol.u_comp[2].terms = {{1.0, {S(e3), S(e3), S(e1), S(e2), S(e1 - e2)}}};
  sol.b_comp[0].terms = {{-0.5, {S(e1), C(e2), C(e3)}}};
  sol.b_comp[1].terms = {{1.0, {C(e1), S(e2), C(e3)}}};
  sol.b_comp[2].terms = {{-0.5, {C(e1), C(e2), S(e3)}}};
  sol.q_field.terms = {{1.0, {S(2.0 * e1), S(2.0 * e2), S(2.0 * e3)}}};
  return sol;
}

Vector3d ExactSolution::u(const Vector3d& x) const {
  return {u_comp[0].value(x), u_comp[1].value(x), u_comp[2].value(x)};
}

Matrix3d ExactSolution::grad_u(const Vector3d& x) const {
  Matrix3d G;
  for (int i = 0; i < 3; ++i) G.row(i) = u_comp[i].gradient(x).transpose();
  return G;
}

Vector3d ExactSolution::lap_u(const Vector3d& x) const {
  return {u_comp[0].laplacian(x), u_comp[1].laplacian(x), u_comp[2].laplacian(x)};
}

Vector3d ExactSolution::b(const Vector3d& x) const {
  return {b_comp[0].value(x), b_comp[1].value(x), b_comp[2].value(x)};
}

Matrix3d ExactSolution::grad_b(const Vector3d& x) const {
  Matrix3d G;
  for (int i = 0; i < 3; ++i) G.row(i) = b_comp[i].gradient(x).transpose();
  return G;
}

Vector3d ExactSolution::lap_b(const Vector3d& x) const {
  return {b_comp[0].laplacian(x), b_comp[1].laplacian(x), b_comp[2].laplacian(x)};
}

double ExactSolution::q(const Vector3d& x) const { return q_field.value(x); }
Vector3d ExactSolution::grad_q(const Vector3d& x) const { return q_field.gradient(x); }

VectorField ExactSolution::u_field() const {
  return [this](const Vector3d& x) { return u(x); };
}
VectorField ExactSolution::b_field() const {
  return [this](const Vector3d& x) { return b(x); };
}
ScalarField ExactSolution::q_scalar() const {
  return [this](const Vector3d& x) { return q(x); };
}
ScalarField ExactSolution::p_scalar(double rho) const {
  return [this, rho](const Vector3d& x) { return rho * q(x) - 0.5 * rho * b(x).squaredNorm(); };
}

std::pair<VectorField, VectorField> exact_sources(const ExactSolution& sol, double nu_k,
                                                  double nu_m) {
  // The lambdas own a copy of the solution data.
  VectorField f = [sol, nu_k](const Vector3d& x) -> Vector3d {
    const Vector3d uu = sol.u(x), bb = sol.b(x);
    return -nu_k * sol.lap_u(x) + sol.grad_u(x) * uu - sol.grad_b(x) * bb + sol.grad_q(x);
  };
  VectorField g = [sol, nu_m](const Vector3d& x) -> Vector3d {
    const Vector3d uu = sol.u(x), bb = sol.b(x);
    return -nu_m * sol.lap_b(x) + sol.grad_b(x) * uu - sol.grad_u(x) * bb;
  };
  return {f, g};
}

ModelParams mms_params(const ExactSolution& sol, double nu_k, double nu_m, double rho) {
  ModelParams p;
  p.nu_k = nu_k;
  p.nu_m = nu_m;
  p.rho = rho;
  std::tie(p.f, p.g) = exact_sources(sol, nu_k, nu_m);
  return p;
}

double convergence_rate(double e_coarse, double e_fine, double h_coarse, double h_fine) {
  return std::log(e_coarse / e_fine) / std::log(h_coarse / h_fine);
}

ErrorReport compute_errors(const Assembler& assembler, const VectorXd& U,
                           const ExactSolution& sol) {
  const PolyMesh& mesh = assembler.mesh();
  const DofLayout& layout = assembler.layout();
  const Bases* bases = &assembler.bases();
  const int k = layout.k();
  const int nk = dim_P3(k);
  const unsigned workers = assembler.workers();

  // Interpolant of the exact solution in the same coefficient language.
  SystemState interp;
  interp.u = interpolate(sol.u_field(), mesh, *bases, kMmsQuadratureDegree, workers);
  interp.b = interpolate(sol.b_field(), mesh, *bases, kMmsQuadratureDegree, workers);
  interp.q = CellScalarField(mesh, k);
  interp.r = CellScalarField(mesh, k);
  const ScalarField q_exact = sol.q_scalar();
  parallel_for(
      mesh.n_cells(),
      [&](std::size_t iT) {
        const QuadRule rule = cell_rule(mesh, iT, kMmsQuadratureDegree);
        const MatrixXd V = bases->cell[iT].values(rule.nodes).leftCols(nk);
        VectorXd rhs = VectorXd::Zero(nk);
        for (std::size_t qq = 0; qq < rule.size(); ++qq)
          rhs.noalias() += rule.weights[qq] * q_exact(rule.nodes[qq]) * V.row(qq).transpose();
        interp.q.cell[iT] = rhs;
      },
      workers);

  const VectorXd UI = layout.to_global(interp);
  const VectorXd e = U - UI;

  ErrorReport rep;
  rep.h = mesh.h();
  rep.dofs_retained = layout.n_retained();

  const double den_au = assembler.energy_a(UI, 0);
  const double den_ab = assembler.energy_a(UI, 1);
  if (den_au <= 0.0 || den_ab <= 0.0)
    throw DegenerateProblemError("interpolant energy norm vanishes");
  rep.E_a_u = std::sqrt(assembler.params().nu_k * assembler.energy_a(e, 0) / den_au);
  rep.E_a_b = std::sqrt(assembler.params().nu_m * assembler.energy_a(e, 1) / den_ab);

  // L2-like hybrid norm and the multiplier error, cell by cell.
  double num_q = 0.0, den_q = 0.0;
  double num_0u = 0.0, den_0u = 0.0, num_0b = 0.0, den_0b = 0.0;
  for (std::size_t iT = 0; iT < mesh.n_cells(); ++iT) {
    const double hT = mesh.cell(iT).diameter;
    auto norm0_sq = [&](const VectorXd& vec, const std::vector<std::ptrdiff_t>& ids) {
      const VectorXd v = layout.gather(vec, ids);
      return v.head(3 * nk).squaredNorm() + hT * v.tail(v.size() - 3 * nk).squaredNorm();
    };
    num_0u += norm0_sq(e, layout.dofs_u(iT));
    den_0u += norm0_sq(UI, layout.dofs_u(iT));
    num_0b += norm0_sq(e, layout.dofs_b(iT));
    den_0b += norm0_sq(UI, layout.dofs_b(iT));
    const VectorXd qh = layout.gather(U, layout.dofs_q(iT));
    const VectorXd qi = layout.gather(UI, layout.dofs_q(iT));
    num_q += (qh - qi).squaredNorm();
    den_q += qi.squaredNorm();
  }
  if (den_0u <= 0.0 || den_0b <= 0.0 || den_q <= 0.0)
    throw DegenerateProblemError("interpolant L2 norm vanishes");
  rep.E_0_u = std::sqrt(num_0u / den_0u);
  rep.E_0_b = std::sqrt(num_0b / den_0b);
  rep.E_q = std::sqrt(num_q / den_q);

  rep.E_p = recover_fluid_pressure(assembler, U, sol, assembler.params().rho).error;
  return rep;
}

FluidPressure recover_fluid_pressure(const Assembler& assembler, const VectorXd& U,
                                     const ExactSolution& sol, double rho) {
  const PolyMesh& mesh = assembler.mesh();
  const DofLayout& layout = assembler.layout();
  const Bases& bases = assembler.bases();
  const int nk = dim_P3(layout.k());

  const SystemState state = layout.from_global(U);
  FluidPressure out;
  out.value = [state, &bases, nk, rho](std::size_t iT, const Vector3d& x) {
    const MatrixXd V = bases.cell[iT].values({x}).leftCols(nk);
    const double qh = V.row(0).dot(state.q.cell[iT]);
    Vector3d bh;
    for (int c = 0; c < 3; ++c) bh[c] = V.row(0).dot(state.b.cell[iT].segment(c * nk, nk));
    return rho * qh - 0.5 * rho * bh.squaredNorm();
  };

  const ScalarField p_exact = sol.p_scalar(rho);
  std::vector<double> num(mesh.n_cells(), 0.0), den(mesh.n_cells(), 0.0);
  parallel_for(
      mesh.n_cells(),
      [&](std::size_t iT) {
        const QuadRule rule = cell_rule(mesh, iT, kMmsQuadratureDegree);
        const MatrixXd V = bases.cell[iT].values(rule.nodes).leftCols(nk);
        for (std::size_t q = 0; q < rule.size(); ++q) {
          const double qh = V.row(q).dot(state.q.cell[iT]);
          Vector3d bh;
          for (int c = 0; c < 3; ++c) bh[c] = V.row(q).dot(state.b.cell[iT].segment(c * nk, nk));
          const double ph = rho * qh - 0.5 * rho * bh.squaredNorm();
          const double pe = p_exact(rule.nodes[q]);
          num[iT] += rule.weights[q] * (ph - pe) * (ph - pe);
          den[iT] += rule.weights[q] * pe * pe;
        }
      },
      assembler.workers());
  double num_sum = 0.0, den_sum = 0.0;
  for (std::size_t iT = 0; iT < mesh.n_cells(); ++iT) {
    num_sum += num[iT];
    den_sum += den[iT];
  }
  if (den_sum <= 0.0) {
    if (num_sum > 0.0) throw DegenerateProblemError("exact fluid pressure vanishes");
    out.error = 0.0;  // zero field against itself
  } else {
    out.error = std::sqrt(num_sum / den_sum);
  }
  return out;
}

}  // namespace polymhd
