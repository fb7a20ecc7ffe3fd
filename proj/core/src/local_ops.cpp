#include "polymhd/local_ops.hpp"

#include <cmath>
#include <optional>

namespace polymhd {

namespace {
int operator_quadrature_degree(int k) { return std::max(2 * (k + 1), 4 * k); }
}

LocalOps::LocalOps(const PolyMesh& mesh, std::size_t iT, const Bases& bases)
    : m_k(bases.k),
      m_nk(dim_P3(bases.k)),
      m_nk1(dim_P3(bases.k + 1)),
      m_n2k(dim_P3(2 * bases.k)),
      m_nf(dim_P2(bases.k)),
      m_n_faces(static_cast<int>(mesh.cell(iT).faces.size())),
      m_ns(0),
      m_iT(iT),
      m_hT(mesh.cell(iT).diameter),
      m_vol(mesh.cell(iT).volume) {
  m_ns = m_nk + m_n_faces * m_nf;
  const Cell& T = mesh.cell(iT);
  const CellBasis& cb = bases.cell[iT];
  const int deg = operator_quadrature_degree(m_k);

  // Cell quadrature caches.
  const QuadRule qT = cell_rule(mesh, iT, deg);
  const MatrixXd V = cb.values(qT.nodes);
  const auto Dv = cb.gradients(qT.nodes);
  m_phi_k = V.leftCols(m_nk);
  m_psi_2k = V.leftCols(m_n2k);
  m_wq = qT.weights;

  // Stiffness of P^{k+1} and its mean functional.
  m_K1 = MatrixXd::Zero(m_nk1, m_nk1);
  VectorXd mean1 = VectorXd::Zero(m_nk1);
  for (std::size_t q = 0; q < qT.size(); ++q) {
    const double w = qT.weights[q];
    for (int d = 0; d < 3; ++d) {
      const auto row = Dv[d].row(q).head(m_nk1);
      m_K1.noalias() += w * row.transpose() * row;
    }
    mean1.noalias() += w * V.row(q).head(m_nk1).transpose();
  }

  // Right-hand side of the potential reconstruction and the divergence /
  // gradient reconstructions; cell integral parts first.
  MatrixXd BR = MatrixXd::Zero(m_nk1, m_ns);
  BR.leftCols(m_nk) = m_K1.leftCols(m_nk);

  m_divergence = MatrixXd::Zero(m_nk, 3 * m_ns);
  for (int j = 0; j < 3; ++j) m_gradient[j] = MatrixXd::Zero(m_n2k, m_ns);
  for (std::size_t q = 0; q < qT.size(); ++q) {
    const double w = qT.weights[q];
    for (int c = 0; c < 3; ++c) {
      // -int phi_s d_c phi_j  and  -int phi_s d_j psi_a
      const auto dphi = Dv[c].row(q);
      for (int s = 0; s < m_nk; ++s) {
        const double phis = w * m_phi_k(q, s);
        for (int j = 0; j < m_nk; ++j) m_divergence(j, vdof(c, s)) -= phis * dphi(j);
        for (int a = 0; a < m_n2k; ++a) m_gradient[c](a, s) -= phis * dphi(a);
      }
    }
  }

  // Face contributions.
  m_trace.resize(m_n_faces);
  std::vector<MatrixXd> face_vals_cell(m_n_faces);   // cell basis on face points
  std::vector<MatrixXd> face_vals(m_n_faces);        // face basis
  std::vector<std::vector<double>> face_w(m_n_faces);
  std::vector<MatrixXd> face_ndg(m_n_faces);         // n_TF . grad of cell basis
  for (int f = 0; f < m_n_faces; ++f) {
    const int iF = T.faces[f];
    const QuadRule qF = face_rule(mesh, iF, deg);
    const Vector3d nTF = mesh.outward_normal(iT, f);
    const MatrixXd Vc = cb.values(qF.nodes);
    const auto Dc = cb.gradients(qF.nodes);
    const MatrixXd Vf = bases.face[iF].values(qF.nodes);
    face_vals_cell[f] = Vc;
    face_vals[f] = Vf;
    face_w[f] = qF.weights;
    face_ndg[f] = nTF.x() * Dc[0] + nTF.y() * Dc[1] + nTF.z() * Dc[2];

    m_trace[f] = MatrixXd::Zero(m_nf, m_nk1);
    for (std::size_t q = 0; q < qF.size(); ++q) {
      const double w = qF.weights[q];
      m_trace[f].noalias() += w * Vf.row(q).transpose() * Vc.row(q).head(m_nk1);

      // r_T: -int_F phi_s (n.grad phi_i) on cell columns, + on face columns
      BR.leftCols(m_nk).noalias() -=
          w * face_ndg[f].row(q).head(m_nk1).transpose() * Vc.row(q).head(m_nk);
      BR.middleCols(m_nk + f * m_nf, m_nf).noalias() +=
          w * face_ndg[f].row(q).head(m_nk1).transpose() * Vf.row(q);

      for (int c = 0; c < 3; ++c) {
        const double nc = nTF[c] * w;
        // D_T and G_T face terms: (v_F . n) against P^k and P^{2k} tests
        for (int s = 0; s < m_nf; ++s) {
          const double vfs = nc * Vf(q, s);
          for (int j = 0; j < m_nk; ++j)
            m_divergence(j, vdof(c, m_nk + f * m_nf + s)) += vfs * Vc(q, j);
          for (int a = 0; a < m_n2k; ++a)
            m_gradient[c](a, m_nk + f * m_nf + s) += vfs * Vc(q, a);
        }
      }
    }
  }

  // Potential reconstruction via the bordered (mean-pinned) stiffness system.
  {
    MatrixXd bordered = MatrixXd::Zero(m_nk1 + 1, m_nk1 + 1);
    bordered.topLeftCorner(m_nk1, m_nk1) = m_K1;
    bordered.topRightCorner(m_nk1, 1) = mean1;
    bordered.bottomLeftCorner(1, m_nk1) = mean1.transpose();
    MatrixXd rhs = MatrixXd::Zero(m_nk1 + 1, m_ns);
    rhs.topRows(m_nk1) = BR;
    rhs.bottomRows(1).leftCols(m_nk) = mean1.head(m_nk).transpose();
    Eigen::PartialPivLU<MatrixXd> lu(bordered);
    const MatrixXd sol = lu.solve(rhs);
    if (!sol.allFinite())
      throw ConditioningError("singular potential-reconstruction solve on cell " +
                              std::to_string(iT));
    m_potential = sol.topRows(m_nk1);
  }

  // Diffusion form: consistency + stabilization.
  m_a = m_potential.transpose() * m_K1 * m_potential;
  {
    // Cell residual v_T - pi_T^k r_T v; orthonormal nesting makes pi_T^k a truncation.
    MatrixXd Mc = -m_potential.topRows(m_nk);
    for (int s = 0; s < m_nk; ++s) Mc(s, s) += 1.0;
    m_a.noalias() += Mc.transpose() * m_K1.topLeftCorner(m_nk, m_nk) * Mc;

    for (int f = 0; f < m_n_faces; ++f) {
      MatrixXd Mf = -m_trace[f] * m_potential;  // Nf x Ns
      for (int s = 0; s < m_nf; ++s) Mf(s, m_nk + f * m_nf + s) += 1.0;
      m_a.noalias() += (1.0 / m_hT) * Mf.transpose() * Mf;
    }
  }
  {
    const double asym = (m_a - m_a.transpose()).norm();
    if (asym > 1e-12 * std::max(1.0, m_a.norm()))
      throw std::logic_error("assembly bug: a_T asymmetric on cell " + std::to_string(iT));
    m_a = 0.5 * (m_a + m_a.transpose());
  }
  m_a_vec = expand_componentwise(m_a);

  // d_T(v, q) = -(D_T v, q)_T; orthonormal pressure basis, so the mass is the identity.
  m_d = -m_divergence;

  // H1-like seminorm Gram.
  m_norm1 = MatrixXd::Zero(m_ns, m_ns);
  m_norm1.topLeftCorner(m_nk, m_nk) = m_K1.topLeftCorner(m_nk, m_nk);
  for (int f = 0; f < m_n_faces; ++f) {
    const MatrixXd& Vc = face_vals_cell[f];
    const MatrixXd& Vf = face_vals[f];
    MatrixXd Mff = MatrixXd::Zero(m_nf, m_nf);
    MatrixXd Mfc = MatrixXd::Zero(m_nf, m_nk);
    MatrixXd Mcc = MatrixXd::Zero(m_nk, m_nk);
    for (std::size_t q = 0; q < face_w[f].size(); ++q) {
      const double w = face_w[f][q];
      Mff.noalias() += w * Vf.row(q).transpose() * Vf.row(q);
      Mfc.noalias() += w * Vf.row(q).transpose() * Vc.row(q).head(m_nk);
      Mcc.noalias() += w * Vc.row(q).head(m_nk).transpose() * Vc.row(q).head(m_nk);
    }
    const double s = 1.0 / m_hT;
    const int off = m_nk + f * m_nf;
    m_norm1.block(off, off, m_nf, m_nf) += s * Mff;
    m_norm1.block(off, 0, m_nf, m_nk) -= s * Mfc;
    m_norm1.block(0, off, m_nk, m_nf) -= s * Mfc.transpose();
    m_norm1.topLeftCorner(m_nk, m_nk) += s * Mcc;
  }
}

MatrixXd LocalOps::potential_vec() const {
  MatrixXd R = MatrixXd::Zero(3 * m_nk1, n_local());
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < m_nk1; ++i)
      for (int s = 0; s < m_ns; ++s) R(c * m_nk1 + i, vdof(c, s)) = m_potential(i, s);
  return R;
}

MatrixXd LocalOps::expand_componentwise(const MatrixXd& scalar_form) const {
  MatrixXd M = MatrixXd::Zero(n_local(), n_local());
  for (int c = 0; c < 3; ++c)
    for (int s = 0; s < m_ns; ++s)
      for (int t = 0; t < m_ns; ++t) M(vdof(c, s), vdof(c, t)) = scalar_form(s, t);
  return M;
}

VectorXd LocalOps::component_slice(const VectorXd& v, int c) const {
  VectorXd out(m_ns);
  for (int s = 0; s < m_ns; ++s) out(s) = v(vdof(c, s));
  return out;
}

MatrixXd LocalOps::grad_combos(const VectorXd& v) const {
  // Values of the cell part of v at the cached cell quadrature nodes.
  MatrixXd W(m_phi_k.rows(), 3);
  for (int c = 0; c < 3; ++c) W.col(c) = m_phi_k * v.segment(c * m_nk, m_nk);
  return W;
}

MatrixXd LocalOps::t_second_slot(const VectorXd& v) const {
  const Eigen::Index npts = m_phi_k.rows();
  const MatrixXd W = grad_combos(v);

  // S(q, s) = sum_j v_j(x_q) * (G e_s)_j(x_q)
  MatrixXd S = MatrixXd::Zero(npts, m_ns);
  for (int j = 0; j < 3; ++j) {
    const MatrixXd GQ = m_psi_2k * m_gradient[j];  // npts x Ns
    S.noalias() += W.col(j).asDiagonal() * GQ;
  }
  for (Eigen::Index q = 0; q < npts; ++q) S.row(q) *= m_wq[q];
  const MatrixXd C = m_phi_k.transpose() * S;  // Nk x Ns

  MatrixXd As = MatrixXd::Zero(m_ns, m_ns);
  As.topRows(m_nk) = 0.5 * C;
  As.leftCols(m_nk) -= 0.5 * C.transpose();
  return expand_componentwise(As);
}

MatrixXd LocalOps::t_first_slot(const VectorXd& w) const {
  const Eigen::Index npts = m_phi_k.rows();
  const MatrixXd W = grad_combos(w);

  std::array<MatrixXd, 3> GQ;
  std::array<VectorXd, 3> wslice;
  for (int j = 0; j < 3; ++j) {
    GQ[j] = m_psi_2k * m_gradient[j];
    wslice[j] = component_slice(w, j);
  }
  // (G w)_{ij}(x_q)
  std::array<std::array<VectorXd, 3>, 3> GW;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) GW[i][j] = GQ[j] * wslice[i];

  MatrixXd B = MatrixXd::Zero(n_local(), n_local());
  VectorXd wtmp(npts);
  for (int cm = 0; cm < 3; ++cm) {
    for (int cn = 0; cn < 3; ++cn) {
      // term 1: int phi_{sm} phi_{sn} (G w)_{cm,cn}
      for (Eigen::Index q = 0; q < npts; ++q) wtmp(q) = m_wq[q] * GW[cm][cn](q);
      const MatrixXd T1 = m_phi_k.transpose() * wtmp.asDiagonal() * m_phi_k;
      // term 2: -int phi_{sn} (G e_{sm})_{cn} w_{cm}
      for (Eigen::Index q = 0; q < npts; ++q) wtmp(q) = m_wq[q] * W(q, cm);
      const MatrixXd T2 = GQ[cn].transpose() * wtmp.asDiagonal() * m_phi_k;  // Ns x Nk
      for (int sn = 0; sn < m_nk; ++sn) {
        const int col = vdof(cn, sn);
        for (int sm = 0; sm < m_nk; ++sm) B(vdof(cm, sm), col) += 0.5 * T1(sm, sn);
        for (int sm = 0; sm < m_ns; ++sm) B(vdof(cm, sm), col) -= 0.5 * T2(sm, sn);
      }
    }
  }
  return B;
}

double LocalOps::apply_tT(const VectorXd& v, const VectorXd& w, const VectorXd& z) const {
  return z.dot(t_second_slot(v) * w);
}

std::vector<LocalOps> build_local_ops(const PolyMesh& mesh, const Bases& bases, unsigned workers) {
  std::vector<LocalOps> ops;
  ops.reserve(mesh.n_cells());
  // Placement is order-dependent; construct in parallel into stable storage.
  std::vector<std::optional<LocalOps>> tmp(mesh.n_cells());
  parallel_for(mesh.n_cells(), [&](std::size_t iT) { tmp[iT].emplace(mesh, iT, bases); },
               workers);
  for (auto& o : tmp) ops.push_back(std::move(*o));
  return ops;
}

}  // namespace polymhd
