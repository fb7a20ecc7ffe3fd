#include "polymhd/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include <Eigen/SVD>

namespace polymhd {

namespace {
using Triplet = Eigen::Triplet<double>;

void add_block(std::vector<Triplet>& out, const MatrixXd& block,
               const std::vector<std::ptrdiff_t>& rows, const std::vector<std::ptrdiff_t>& cols) {
  for (Eigen::Index i = 0; i < block.rows(); ++i)
    for (Eigen::Index j = 0; j < block.cols(); ++j)
      out.emplace_back(static_cast<int>(rows[i]), static_cast<int>(cols[j]), block(i, j));
}
}  // namespace

Assembler::Assembler(const PolyMesh& mesh, const Bases& bases, const std::vector<LocalOps>& ops,
                     const DofLayout& layout, const ModelParams& params, unsigned workers)
    : m_mesh(&mesh),
      m_bases(&bases),
      m_ops(&ops),
      m_layout(&layout),
      m_params(params),
      m_workers(workers) {
  if (!(params.nu_k > 0.0) || !(params.nu_m > 0.0))
    throw std::invalid_argument("viscosities must be positive");

  const int nk = dim_P3(bases.k);
  m_load_f.resize(mesh.n_cells());
  m_load_g.resize(mesh.n_cells());
  const int deg = std::max(kMmsQuadratureDegree, 2 * bases.k);
  parallel_for(
      mesh.n_cells(),
      [&](std::size_t iT) {
        m_load_f[iT] = params.f ? l2_project_cell(params.f, mesh, iT, bases, deg)
                                : VectorXd::Zero(3 * nk);
        m_load_g[iT] = params.g ? l2_project_cell(params.g, mesh, iT, bases, deg)
                                : VectorXd::Zero(3 * nk);
      },
      m_workers);

  // Orthonormal cell bases: the projection coefficients are exactly the
  // moments (f, phi)_T, which is what the load functional needs.
  m_load = VectorXd::Zero(layout.n_total());
  for (std::size_t iT = 0; iT < mesh.n_cells(); ++iT) {
    const std::ptrdiff_t elim0 = std::ptrdiff_t(iT) * layout.eliminated_per_cell();
    m_load.segment(elim0, 3 * nk) = m_load_f[iT];
    m_load.segment(elim0 + 3 * nk, 3 * nk) = m_load_g[iT];
  }
}

void Assembler::local_state(const VectorXd& U, std::size_t iT, VectorXd& u_loc, VectorXd& b_loc,
                            VectorXd& q_loc, VectorXd& r_loc) const {
  const DofLayout& L = *m_layout;
  u_loc = L.reduction_u(iT) * L.gather(U, L.dofs_u(iT));
  b_loc = L.reduction_b(iT) * L.gather(U, L.dofs_b(iT));
  q_loc = L.gather(U, L.dofs_q(iT));
  r_loc = L.gather(U, L.dofs_r(iT));
}

void Assembler::residual_and_jacobian(const VectorXd& U, VectorXd& G, SparseMat& J) const {
  assemble(U, &G, &J);
}

VectorXd Assembler::residual(const VectorXd& U) const {
  VectorXd G;
  assemble(U, &G, nullptr);
  return G;
}

SparseMat Assembler::jacobian(const VectorXd& U) const {
  VectorXd G;
  SparseMat J;
  assemble(U, &G, &J);
  return J;
}

void Assembler::assemble(const VectorXd& U, VectorXd* G_out, SparseMat* J_out) const {
  const PolyMesh& mesh = *m_mesh;
  const DofLayout& L = *m_layout;
  const std::size_t n_cells = mesh.n_cells();
  const int nk = dim_P3(m_bases->k);

  struct CellWork {
    VectorXd r_u, r_b, r_q, r_r;
    std::vector<Triplet> triplets;
  };
  std::vector<CellWork> work(n_cells);

  parallel_for(
      n_cells,
      [&](std::size_t iT) {
        const LocalOps& op = (*m_ops)[iT];
        CellWork& w = work[iT];
        VectorXd u_loc, b_loc, q_loc, r_loc;
        local_state(U, iT, u_loc, b_loc, q_loc, r_loc);

        const MatrixXd A_u = op.t_second_slot(u_loc);
        const MatrixXd A_b = op.t_second_slot(b_loc);
        const MatrixXd& a = op.diffusion_vec();
        const MatrixXd& d = op.pressure_coupling();
        const double nu_k = m_params.nu_k, nu_m = m_params.nu_m;
        const double sqrtV = std::sqrt(op.volume());

        VectorXd mom = nu_k * (a * u_loc) + A_u * u_loc - A_b * b_loc + d.transpose() * q_loc;
        VectorXd mag = nu_m * (a * b_loc) + A_u * b_loc - A_b * u_loc + d.transpose() * r_loc;
        mom.head(3 * nk) -= m_load_f[iT];
        mag.head(3 * nk) -= m_load_g[iT];

        const MatrixXd& Ru = L.reduction_u(iT);
        const MatrixXd& Rb = L.reduction_b(iT);
        w.r_u = Ru.transpose() * mom;
        w.r_b = Rb.transpose() * mag;
        w.r_q = -(d * u_loc);
        w.r_r = -(d * b_loc);
        w.r_q(0) += U(L.lambda_q()) * sqrtV;
        w.r_r(0) += U(L.lambda_r()) * sqrtV;

        if (J_out != nullptr) {
          const MatrixXd B_u = op.t_first_slot(u_loc);
          const MatrixXd B_b = op.t_first_slot(b_loc);

          const auto& gu = L.dofs_u(iT);
          const auto& gb = L.dofs_b(iT);
          const auto& gq = L.dofs_q(iT);
          const auto& gr = L.dofs_r(iT);

          add_block(w.triplets, Ru.transpose() * (nu_k * a + A_u + B_u) * Ru, gu, gu);
          add_block(w.triplets, Ru.transpose() * (-A_b - B_b) * Rb, gu, gb);
          add_block(w.triplets, Ru.transpose() * d.transpose(), gu, gq);
          add_block(w.triplets, Rb.transpose() * (B_b - A_b) * Ru, gb, gu);
          add_block(w.triplets, Rb.transpose() * (nu_m * a + A_u - B_u) * Rb, gb, gb);
          add_block(w.triplets, Rb.transpose() * d.transpose(), gb, gr);
          add_block(w.triplets, -(d * Ru), gq, gu);
          add_block(w.triplets, -(d * Rb), gr, gb);

          // Zero-mean multipliers: +sqrt|T| in the divergence mean rows,
          // -sqrt|T| in the multiplier rows (residual-energy neutral).
          w.triplets.emplace_back(static_cast<int>(gq[0]), static_cast<int>(L.lambda_q()), sqrtV);
          w.triplets.emplace_back(static_cast<int>(L.lambda_q()), static_cast<int>(gq[0]), -sqrtV);
          w.triplets.emplace_back(static_cast<int>(gr[0]), static_cast<int>(L.lambda_r()), sqrtV);
          w.triplets.emplace_back(static_cast<int>(L.lambda_r()), static_cast<int>(gr[0]), -sqrtV);
        }
      },
      m_workers);

  if (G_out != nullptr) {
    VectorXd& G = *G_out;
    G = VectorXd::Zero(L.n_total());
    for (std::size_t iT = 0; iT < n_cells; ++iT) {
      const CellWork& w = work[iT];
      const auto scatter = [&G](const VectorXd& v, const std::vector<std::ptrdiff_t>& ids) {
        for (std::size_t i = 0; i < ids.size(); ++i) G(ids[i]) += v(i);
      };
      scatter(w.r_u, L.dofs_u(iT));
      scatter(w.r_b, L.dofs_b(iT));
      scatter(w.r_q, L.dofs_q(iT));
      scatter(w.r_r, L.dofs_r(iT));
      const double sqrtV = std::sqrt(mesh.cell(iT).volume);
      G(L.lambda_q()) -= sqrtV * U(L.q_mean_id(iT));
      G(L.lambda_r()) -= sqrtV * U(L.r_mean_id(iT));
    }
  }

  if (J_out != nullptr) {
    std::vector<Triplet> all;
    std::size_t total = 0;
    for (const auto& w : work) total += w.triplets.size();
    all.reserve(total);
    for (const auto& w : work) all.insert(all.end(), w.triplets.begin(), w.triplets.end());
    J_out->resize(L.n_total(), L.n_total());
    J_out->setFromTriplets(all.begin(), all.end());
  }
}

double Assembler::energy_a(const VectorXd& U, int field) const {
  double total = 0.0;
  std::vector<double> per_cell(m_mesh->n_cells(), 0.0);
  parallel_for(
      m_mesh->n_cells(),
      [&](std::size_t iT) {
        const DofLayout& L = *m_layout;
        const MatrixXd& R = (field == 0) ? L.reduction_u(iT) : L.reduction_b(iT);
        const auto& ids = (field == 0) ? L.dofs_u(iT) : L.dofs_b(iT);
        const VectorXd v = R * L.gather(U, ids);
        per_cell[iT] = v.dot((*m_ops)[iT].diffusion_vec() * v);
      },
      m_workers);
  for (double c : per_cell) total += c;
  return total;
}

double Assembler::seminorm1_sq(const VectorXd& U, int field) const {
  double total = 0.0;
  for (std::size_t iT = 0; iT < m_mesh->n_cells(); ++iT) {
    const DofLayout& L = *m_layout;
    const LocalOps& op = (*m_ops)[iT];
    const MatrixXd& R = (field == 0) ? L.reduction_u(iT) : L.reduction_b(iT);
    const auto& ids = (field == 0) ? L.dofs_u(iT) : L.dofs_b(iT);
    const VectorXd v = R * L.gather(U, ids);
    const MatrixXd n1 = op.expand_componentwise(op.seminorm_scalar());
    total += v.dot(n1 * v);
  }
  return total;
}

double Assembler::trilinear(const VectorXd& X, const VectorXd& Y, const VectorXd& Z) const {
  // T_h(x, y, z) = t_h(u_x, u_y, v_z) - t_h(b_x, b_y, v_z)
  //              + t_h(u_x, b_y, w_z) - t_h(b_x, u_y, w_z)
  double total = 0.0;
  for (std::size_t iT = 0; iT < m_mesh->n_cells(); ++iT) {
    const LocalOps& op = (*m_ops)[iT];
    VectorXd ux, bx, qx, rx, uy, by, qy, ry, uz, bz, qz, rz;
    local_state(X, iT, ux, bx, qx, rx);
    local_state(Y, iT, uy, by, qy, ry);
    local_state(Z, iT, uz, bz, qz, rz);
    const MatrixXd A_ux = op.t_second_slot(ux);
    const MatrixXd A_bx = op.t_second_slot(bx);
    total += uz.dot(A_ux * uy) - uz.dot(A_bx * by) + bz.dot(A_ux * by) - bz.dot(A_bx * uy);
  }
  return total;
}

void static_condense(const SparseMat& J, const VectorXd& rhs, const DofLayout& layout,
                     SparseMat& schur, VectorXd& schur_rhs, EliminationRecord& record) {
  const std::ptrdiff_t E = layout.n_eliminated();
  const std::ptrdiff_t R = layout.n_retained();
  const int m = layout.eliminated_per_cell();
  const std::size_t n_cells = static_cast<std::size_t>(E / std::max(m, 1));

  record.lu.assign(n_cells, Eigen::PartialPivLU<MatrixXd>());
  record.coupling.assign(n_cells, MatrixXd());
  record.retained_ids.assign(n_cells, {});
  record.rhs_elim.assign(n_cells, VectorXd());
  record.n_eliminated = E;
  record.n_retained = R;

  // Column maps: retained ids coupled to each cell's eliminated block.
  std::vector<std::map<std::ptrdiff_t, int>> col_map(n_cells);
  std::vector<MatrixXd> EE(n_cells, MatrixXd::Zero(m, m));
  std::vector<std::vector<Triplet>> ER_entries(n_cells), RE_entries(n_cells);
  std::vector<Triplet> schur_triplets;

  for (int col = 0; col < J.outerSize(); ++col) {
    for (SparseMat::InnerIterator it(J, col); it; ++it) {
      const std::ptrdiff_t r = it.row(), c = it.col();
      if (r < E && c < E) {
        const std::size_t t = static_cast<std::size_t>(r / m);
        if (c / m != static_cast<std::ptrdiff_t>(t))
          throw CondensationError("eliminated blocks are not cell-local");
        EE[t](r - t * m, c - t * m) += it.value();
      } else if (r < E) {
        const std::size_t t = static_cast<std::size_t>(r / m);
        auto [pos, inserted] = col_map[t].try_emplace(c, static_cast<int>(col_map[t].size()));
        ER_entries[t].emplace_back(static_cast<int>(r - t * m), pos->second, it.value());
      } else if (c < E) {
        const std::size_t t = static_cast<std::size_t>(c / m);
        auto [pos, inserted] = col_map[t].try_emplace(r, static_cast<int>(col_map[t].size()));
        RE_entries[t].emplace_back(pos->second, static_cast<int>(c - t * m), it.value());
      } else {
        schur_triplets.emplace_back(static_cast<int>(r - E), static_cast<int>(c - E), it.value());
      }
    }
  }

  schur_rhs = rhs.tail(R);
  std::vector<std::vector<Triplet>> cell_schur(n_cells);
  std::vector<VectorXd> cell_rhs(n_cells);
  parallel_for(n_cells, [&](std::size_t t) {
    const int w = static_cast<int>(col_map[t].size());
    record.retained_ids[t].resize(w);
    for (const auto& [gid, pos] : col_map[t]) record.retained_ids[t][pos] = gid;

    MatrixXd ER = MatrixXd::Zero(m, w);
    for (const auto& e : ER_entries[t]) ER(e.row(), e.col()) += e.value();
    MatrixXd RE = MatrixXd::Zero(w, m);
    for (const auto& e : RE_entries[t]) RE(e.row(), e.col()) += e.value();

    Eigen::PartialPivLU<MatrixXd> lu(EE[t]);
    const MatrixXd X = lu.solve(ER);
    const VectorXd gE = rhs.segment(std::ptrdiff_t(t) * m, m);
    const VectorXd y = lu.solve(gE);
    const VectorXd probe = lu.solve(VectorXd::Ones(m));
    if (!X.allFinite() || !y.allFinite() || !probe.allFinite())
      throw CondensationError("singular eliminated block on cell " + std::to_string(t));

    record.lu[t] = std::move(lu);
    record.coupling[t] = ER;
    record.rhs_elim[t] = gE;

    const MatrixXd S = -RE * X;
    cell_schur[t].reserve(static_cast<std::size_t>(w) * w);
    for (int i = 0; i < w; ++i)
      for (int j = 0; j < w; ++j)
        cell_schur[t].emplace_back(static_cast<int>(record.retained_ids[t][i] - E),
                                   static_cast<int>(record.retained_ids[t][j] - E), S(i, j));
    cell_rhs[t] = RE * y;
  });
  for (std::size_t t = 0; t < n_cells; ++t) {
    schur_triplets.insert(schur_triplets.end(), cell_schur[t].begin(), cell_schur[t].end());
    for (int i = 0; i < cell_rhs[t].size(); ++i)
      schur_rhs(record.retained_ids[t][i] - E) -= cell_rhs[t](i);
  }

  schur.resize(R, R);
  schur.setFromTriplets(schur_triplets.begin(), schur_triplets.end());
}

VectorXd recover_interior(const EliminationRecord& record, const VectorXd& retained) {
  VectorXd full(record.n_eliminated + record.n_retained);
  full.tail(record.n_retained) = retained;
  const std::size_t n_cells = record.lu.size();
  const int m = n_cells > 0 ? static_cast<int>(record.rhs_elim[0].size()) : 0;
  for (std::size_t t = 0; t < n_cells; ++t) {
    VectorXd coupled(record.retained_ids[t].size());
    for (std::size_t i = 0; i < record.retained_ids[t].size(); ++i)
      coupled(i) = retained(record.retained_ids[t][i] - record.n_eliminated);
    full.segment(std::ptrdiff_t(t) * m, m) =
        record.lu[t].solve(record.rhs_elim[t] - record.coupling[t] * coupled);
  }
  return full;
}

double infsup_probe(const PolyMesh& mesh, const Bases& bases, const std::vector<LocalOps>& ops,
                    const DofLayout& layout) {
  const int nk = dim_P3(bases.k);

  // Compact velocity numbering: every u DOF of the layout.
  std::vector<std::ptrdiff_t> remap(layout.n_total(), -1);
  std::ptrdiff_t nu = 0;
  for (std::size_t iT = 0; iT < mesh.n_cells(); ++iT)
    for (std::ptrdiff_t gid : layout.dofs_u(iT))
      if (remap[gid] < 0) remap[gid] = nu++;

  const std::ptrdiff_t nq = std::ptrdiff_t(mesh.n_cells()) * nk;
  MatrixXd D = MatrixXd::Zero(nq, nu);
  MatrixXd N = MatrixXd::Zero(nu, nu);
  for (std::size_t iT = 0; iT < mesh.n_cells(); ++iT) {
    const LocalOps& op = ops[iT];
    const MatrixXd& Ru = layout.reduction_u(iT);
    const auto& gu = layout.dofs_u(iT);
    const MatrixXd dR = op.pressure_coupling() * Ru;
    const MatrixXd n1 = Ru.transpose() * op.expand_componentwise(op.seminorm_scalar()) * Ru;
    for (std::size_t j = 0; j < gu.size(); ++j) {
      const std::ptrdiff_t cj = remap[gu[j]];
      for (int i = 0; i < nk; ++i) D(std::ptrdiff_t(iT) * nk + i, cj) += dR(i, j);
      for (std::size_t i = 0; i < gu.size(); ++i) N(remap[gu[i]], cj) += n1(i, j);
    }
  }

  Eigen::LLT<MatrixXd> llt(N);
  if (llt.info() != Eigen::Success)
    throw ConditioningError("seminorm Gram matrix is singular in the inf-sup probe");
  // M = D N^{-1/2}: sup_v d(v,q)/|v|_{1,h} = ||M^T q||.
  MatrixXd M = llt.matrixU().solve<Eigen::OnTheRight>(D);

  // Remove the constant-pressure direction (the kernel of d_h).
  VectorXd c = VectorXd::Zero(nq);
  for (std::size_t iT = 0; iT < mesh.n_cells(); ++iT)
    c(std::ptrdiff_t(iT) * nk) = std::sqrt(mesh.cell(iT).volume);
  c.normalize();
  M -= c * (c.transpose() * M);

  Eigen::BDCSVD<MatrixXd> svd(M);
  VectorXd sv = svd.singularValues();
  std::sort(sv.data(), sv.data() + sv.size());
  // Smallest value is the projected-out constant mode (numerically zero).
  return sv.size() > 1 ? sv(1) : 0.0;
}

}  // namespace polymhd
