// Command-line driver: single solves, convergence studies over the built-in
// cube meshes, and property probes. Emits machine-readable CSV tables.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <polymhd/mms.hpp>
#include <polymhd/newton.hpp>

using namespace polymhd;

namespace {

struct RunConfig {
  std::string mode = "solve";
  std::string mesh_path;
  std::vector<int> cube_sizes;
  int degree = 0;
  double nu_k = 0.1;
  double nu_m = 0.1;
  double rho = 1.0;
  double tol = 1e-6;
  int max_iters = 25;
  std::string out_dir = ".";
  unsigned workers = 1;
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.11e", v);
  return buf;
}

const char* kResultsHeader =
    "h,cells,ifaces,rho,dofs_retained,E_a_u,E_a_b,E_q,E_p,E_0_u,E_0_b,newton_iters,wall_s\n";

struct RunRow {
  MeshStats stats;
  ErrorReport errors;
  SolveReport report;
};

void write_row(std::ostream& out, const RunRow& r) {
  out << fmt(r.stats.h) << ',' << r.stats.n_cells << ',' << r.stats.n_interior_faces << ','
      << fmt(r.stats.regularity) << ',' << r.errors.dofs_retained << ',' << fmt(r.errors.E_a_u)
      << ',' << fmt(r.errors.E_a_b) << ',' << fmt(r.errors.E_q) << ',' << fmt(r.errors.E_p) << ','
      << fmt(r.errors.E_0_u) << ',' << fmt(r.errors.E_0_b) << ',' << r.report.iterations << ','
      << fmt(r.report.wall_seconds) << '\n';
}

RunRow run_single(const PolyMesh& mesh, const RunConfig& cfg, const ExactSolution& sol) {
  NewtonConfig newton;
  newton.rel_tol = cfg.tol;
  newton.max_iters = cfg.max_iters;
  const ModelParams params = mms_params(sol, cfg.nu_k, cfg.nu_m, cfg.rho);

  const Bases bases = Bases::build(mesh, cfg.degree, cfg.workers);
  const auto ops = build_local_ops(mesh, bases, cfg.workers);
  const DofLayout layout(mesh, cfg.degree);
  const Assembler assembler(mesh, bases, ops, layout, params, cfg.workers);
  SolveReport report;
  const VectorXd U = solve_newton(assembler, newton, report);

  RunRow row;
  row.stats = compute_stats(mesh);
  row.errors = compute_errors(assembler, U, sol);
  row.report = report;
  return row;
}

int run_solve(const RunConfig& cfg) {
  const ExactSolution sol = ExactSolution::standard();
  const PolyMesh mesh = cfg.mesh_path.empty() ? build_cube_tet_mesh(cfg.cube_sizes.at(0))
                                              : load_mesh(cfg.mesh_path);
  const RunRow row = run_single(mesh, cfg, sol);

  std::ofstream csv(std::filesystem::path(cfg.out_dir) / "results.csv");
  csv << kResultsHeader;
  write_row(csv, row);

  std::ofstream rep(std::filesystem::path(cfg.out_dir) / "report.txt");
  rep << "mode: solve\n"
      << "degree: " << cfg.degree << "\n"
      << "nu_k: " << cfg.nu_k << "  nu_m: " << cfg.nu_m << "  rho: " << cfg.rho << "\n"
      << "h: " << fmt(row.stats.h) << "  cells: " << row.stats.n_cells
      << "  regularity: " << fmt(row.stats.regularity) << "\n"
      << "newton iterations: " << row.report.iterations << "\n"
      << "final relative residual: "
      << fmt(row.report.residual_history.back() /
             std::max(row.report.residual_history.front(), 1e-300))
      << "\n"
      << "retained dofs: " << row.errors.dofs_retained
      << "  schur nonzeros: " << row.report.schur_nonzeros << "\n"
      << "E_a_u: " << fmt(row.errors.E_a_u) << "\nE_a_b: " << fmt(row.errors.E_a_b)
      << "\nE_q:   " << fmt(row.errors.E_q) << "\nE_p:   " << fmt(row.errors.E_p)
      << "\nE_0_u: " << fmt(row.errors.E_0_u) << "\nE_0_b: " << fmt(row.errors.E_0_b) << "\n";
  std::cout << "solve: h=" << row.stats.h << " iters=" << row.report.iterations
            << " E_a_u=" << row.errors.E_a_u << "\n";
  return 0;
}

int run_converge(const RunConfig& cfg) {
  const ExactSolution sol = ExactSolution::standard();
  std::vector<RunRow> rows;
  for (int n : cfg.cube_sizes) {
    const PolyMesh mesh = build_cube_tet_mesh(n);
    rows.push_back(run_single(mesh, cfg, sol));
    const RunRow& r = rows.back();
    std::cout << "n=" << n << " h=" << r.stats.h << " iters=" << r.report.iterations
              << " E_a_u=" << r.errors.E_a_u << " E_0_u=" << r.errors.E_0_u << "\n";
  }

  std::ofstream csv(std::filesystem::path(cfg.out_dir) / "results.csv");
  csv << kResultsHeader;
  for (const auto& r : rows) write_row(csv, r);

  std::ofstream rates(std::filesystem::path(cfg.out_dir) / "rates.csv");
  rates << "h_coarse,h_fine,rate_E_a_u,rate_E_a_b,rate_E_q,rate_E_p,rate_E_0_u,rate_E_0_b\n";
  for (std::size_t i = 0; i + 1 < rows.size(); ++i) {
    const ErrorReport& c = rows[i].errors;
    const ErrorReport& f = rows[i + 1].errors;
    rates << fmt(c.h) << ',' << fmt(f.h);
    for (auto field : {&ErrorReport::E_a_u, &ErrorReport::E_a_b, &ErrorReport::E_q,
                       &ErrorReport::E_p, &ErrorReport::E_0_u, &ErrorReport::E_0_b})
      rates << ',' << fmt(convergence_rate(c.*field, f.*field, c.h, f.h));
    rates << '\n';
  }

  std::ofstream rep(std::filesystem::path(cfg.out_dir) / "report.txt");
  rep << "mode: converge\ndegree: " << cfg.degree << "\nmeshes:";
  for (int n : cfg.cube_sizes) rep << ' ' << n;
  rep << "\nrows: " << rows.size() << "\n";
  return 0;
}

int run_probe(const RunConfig& cfg) {
  const ExactSolution sol = ExactSolution::standard();
  const PolyMesh mesh = cfg.mesh_path.empty()
                            ? build_cube_tet_mesh(cfg.cube_sizes.empty() ? 1 : cfg.cube_sizes[0])
                            : load_mesh(cfg.mesh_path);
  const int k = cfg.degree;
  const ModelParams params = mms_params(sol, cfg.nu_k, cfg.nu_m, cfg.rho);
  const Bases bases = Bases::build(mesh, k, cfg.workers);
  const auto ops = build_local_ops(mesh, bases, cfg.workers);
  const DofLayout layout(mesh, k);
  const Assembler assembler(mesh, bases, ops, layout, params, cfg.workers);

  std::ofstream rep(std::filesystem::path(cfg.out_dir) / "report.txt");
  bool all_ok = true;
  auto check = [&](const std::string& name, bool ok, const std::string& detail) {
    rep << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << ": " << detail << "\n";
    all_ok = all_ok && ok;
  };

  // Commutation of the potential reconstruction with the interpolator.
  // Oracle-grade quadrature so integration error cannot mask a defect on
  // coarse cells.
  {
    const int oracle_deg = 20;
    double worst = 0.0;
    const HybridField Iu = interpolate(sol.u_field(), mesh, bases, oracle_deg, cfg.workers);
    for (std::size_t iT = 0; iT < std::min<std::size_t>(mesh.n_cells(), 8); ++iT) {
      const LocalOps& op = ops[iT];
      const int nk = dim_P3(k), nf = dim_P2(k);
      VectorXd v(op.n_local());
      v.head(3 * nk) = Iu.cell[iT];
      const Cell& T = mesh.cell(iT);
      for (std::size_t f = 0; f < T.faces.size(); ++f)
        v.segment(3 * nk + f * 3 * nf, 3 * nf) = Iu.face[T.faces[f]];
      for (int c = 0; c < 3; ++c) {
        const ExactSolution* s = &sol;
        const VectorXd proj = elliptic_project(
            [s, c](const Vector3d& x) { return s->u(x)[c]; },
            [s, c](const Vector3d& x) -> Vector3d { return s->grad_u(x).row(c).transpose(); },
            mesh, iT, bases, k + 1, oracle_deg);
        const VectorXd rec = op.potential() * op.component_slice(v, c);
        worst = std::max(worst, (rec - proj).norm() / std::max(1.0, proj.norm()));
      }
    }
    check("potential-interpolator commutation", worst <= 1e-10, "max residual " + fmt(worst));
  }

  // Skew-symmetry of the convection form on random states.
  {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double worst = 0.0, scale = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
      VectorXd x(layout.n_total()), y(layout.n_total());
      for (int i = 0; i < x.size(); ++i) x(i) = unit(rng);
      for (int i = 0; i < y.size(); ++i) y(i) = unit(rng);
      scale = std::max(scale, std::abs(assembler.trilinear(x, y, x)));
      worst = std::max(worst, std::abs(assembler.trilinear(x, y, y)));
    }
    check("trilinear skew-symmetry", worst <= 1e-12 * std::max(1.0, scale),
          "max |T_h(x,y,y)| " + fmt(worst));
  }

  // Inf-sup probe (dense; intended for small meshes).
  {
    const double sigma = infsup_probe(mesh, bases, ops, layout);
    check("inf-sup probe", sigma > 0.0, "smallest nonzero singular value " + fmt(sigma));
  }

  // Energy identity at a tightly converged state.
  {
    NewtonConfig newton;
    newton.rel_tol = 1e-11;
    newton.max_iters = cfg.max_iters + 10;
    SolveReport report;
    const VectorXd U = solve_newton(assembler, newton, report);
    const double lhs = cfg.nu_k * assembler.energy_a(U, 0) + cfg.nu_m * assembler.energy_a(U, 1);
    const double rhs = assembler.load().dot(U);
    const double rel = std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
    check("energy identity", rel <= 1e-9, "relative defect " + fmt(rel));
  }

  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid high-order solver for stationary incompressible MHD"};
  app.set_config("--config", "", "key=value configuration file (flags win)");

  RunConfig cfg;
  app.add_option("--mode", cfg.mode, "solve | converge | probe")
      ->check(CLI::IsMember({"solve", "converge", "probe"}));
  auto* mesh_opt = app.add_option("--mesh", cfg.mesh_path, "mesh JSON file");
  auto* cube_opt =
      app.add_option("--cube", cfg.cube_sizes, "built-in cube mesh subdivisions (list)")
          ->delimiter(',');
  app.add_option("--degree", cfg.degree, "polynomial degree k")->check(CLI::Range(0, 2));
  app.add_option("--nu-k", cfg.nu_k, "kinematic viscosity")->check(CLI::PositiveNumber);
  app.add_option("--nu-m", cfg.nu_m, "magnetic diffusivity")->check(CLI::PositiveNumber);
  app.add_option("--rho", cfg.rho, "mass density");
  app.add_option("--tol", cfg.tol, "Newton relative tolerance");
  app.add_option("--max-iters", cfg.max_iters, "Newton iteration cap");
  app.add_option("--out", cfg.out_dir, "output directory");
  app.add_option("--workers", cfg.workers, "worker threads for assembly");

  CLI11_PARSE(app, argc, argv);

  try {
    if (cfg.mode != "probe" && mesh_opt->count() == 0 && cube_opt->count() == 0)
      throw std::invalid_argument("need --mesh or --cube");
    if (cfg.mode == "converge" && mesh_opt->count() > 0)
      throw std::invalid_argument("converge mode uses --cube mesh lists");
    if (!cfg.cube_sizes.empty()) {
      for (std::size_t i = 0; i + 1 < cfg.cube_sizes.size(); ++i)
        if (cfg.cube_sizes[i] >= cfg.cube_sizes[i + 1])
          throw std::invalid_argument("--cube list must be strictly increasing");
      if (cfg.cube_sizes.front() < 1) throw std::invalid_argument("--cube entries must be >= 1");
    }
    std::filesystem::create_directories(cfg.out_dir);

    if (cfg.mode == "solve") return run_solve(cfg);
    if (cfg.mode == "converge") return run_converge(cfg);
    return run_probe(cfg);
  } catch (const SolveError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
