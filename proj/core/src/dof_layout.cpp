#include "polymhd/dof_layout.hpp"

namespace polymhd {

DofLayout::DofLayout(const PolyMesh& mesh, int k, Bc bc)
    : m_mesh(&mesh), m_k(k), m_nk(dim_P3(k)), m_nf(dim_P2(k)) {
  const bool constrain = (bc == Bc::Strong);
  const std::size_t n_cells = mesh.n_cells();
  const std::size_t n_faces = mesh.n_faces();
  m_elim_per_cell = 6 * m_nk + 2 * (m_nk - 1);
  m_n_eliminated = std::ptrdiff_t(n_cells) * m_elim_per_cell;

  // Retained numbering after the eliminated block.
  std::ptrdiff_t next = m_n_eliminated;
  m_u_face_id.assign(n_faces, -1);
  m_b_face_id.assign(n_faces, -1);
  m_b_face_width.assign(n_faces, 0);
  for (std::size_t f = 0; f < n_faces; ++f) {
    if (!(constrain && mesh.face(f).boundary)) {
      m_u_face_id[f] = next;
      next += 3 * m_nf;
    }
  }
  for (std::size_t f = 0; f < n_faces; ++f) {
    m_b_face_width[f] = (constrain && mesh.face(f).boundary) ? 2 * m_nf : 3 * m_nf;
    m_b_face_id[f] = next;
    next += m_b_face_width[f];
  }
  m_q_mean_base = next;
  next += std::ptrdiff_t(n_cells);
  m_r_mean_base = next;
  next += std::ptrdiff_t(n_cells);
  m_lambda_q = next++;
  m_lambda_r = next++;
  m_n_total = next;

  // Per-cell reductions and DOF lists.
  m_Ru.resize(n_cells);
  m_Rb.resize(n_cells);
  m_gids_u.resize(n_cells);
  m_gids_b.resize(n_cells);
  m_gids_q.resize(n_cells);
  m_gids_r.resize(n_cells);
  for (std::size_t iT = 0; iT < n_cells; ++iT) {
    const Cell& T = mesh.cell(iT);
    const int n_loc_faces = static_cast<int>(T.faces.size());
    const int n_loc = 3 * m_nk + n_loc_faces * 3 * m_nf;
    const std::ptrdiff_t elim0 = std::ptrdiff_t(iT) * m_elim_per_cell;

    auto build = [&](bool is_velocity, MatrixXd& R, std::vector<std::ptrdiff_t>& gids) {
      struct Entry {
        int row, col;
        double value;
      };
      std::vector<Entry> entries;
      gids.clear();
      const std::ptrdiff_t cell0 = elim0 + (is_velocity ? 0 : 3 * m_nk);
      for (int i = 0; i < 3 * m_nk; ++i) {
        entries.push_back({i, static_cast<int>(gids.size()), 1.0});
        gids.push_back(cell0 + i);
      }
      for (int f = 0; f < n_loc_faces; ++f) {
        const std::size_t iF = T.faces[f];
        const Face& F = mesh.face(iF);
        const int row0 = 3 * m_nk + f * 3 * m_nf;
        if (is_velocity && F.boundary && constrain) continue;  // strong no-slip
        if (!is_velocity && F.boundary && constrain) {
          const int col0 = static_cast<int>(gids.size());
          for (int i = 0; i < 2 * m_nf; ++i) gids.push_back(m_b_face_id[iF] + i);
          const Vector3d frame[2] = {F.t1, F.t2};
          for (int t = 0; t < 2; ++t)
            for (int c = 0; c < 3; ++c)
              for (int i = 0; i < m_nf; ++i)
                entries.push_back({row0 + c * m_nf + i, col0 + t * m_nf + i, frame[t][c]});
          continue;
        }
        const std::ptrdiff_t base = is_velocity ? m_u_face_id[iF] : m_b_face_id[iF];
        for (int i = 0; i < 3 * m_nf; ++i) {
          entries.push_back({row0 + i, static_cast<int>(gids.size()), 1.0});
          gids.push_back(base + i);
        }
      }
      R = MatrixXd::Zero(n_loc, static_cast<int>(gids.size()));
      for (const auto& e : entries) R(e.row, e.col) = e.value;
    };
    build(true, m_Ru[iT], m_gids_u[iT]);
    build(false, m_Rb[iT], m_gids_b[iT]);

    m_gids_q[iT].clear();
    m_gids_r[iT].clear();
    m_gids_q[iT].push_back(q_mean_id(iT));
    m_gids_r[iT].push_back(r_mean_id(iT));
    for (int i = 1; i < m_nk; ++i) {
      m_gids_q[iT].push_back(elim0 + 6 * m_nk + (i - 1));
      m_gids_r[iT].push_back(elim0 + 6 * m_nk + (m_nk - 1) + (i - 1));
    }
  }
}

VectorXd DofLayout::to_global(const SystemState& state) const {
  const PolyMesh& mesh = *m_mesh;
  VectorXd U = VectorXd::Zero(m_n_total);
  for (std::size_t iT = 0; iT < mesh.n_cells(); ++iT) {
    const std::ptrdiff_t elim0 = std::ptrdiff_t(iT) * m_elim_per_cell;
    U.segment(elim0, 3 * m_nk) = state.u.cell[iT];
    U.segment(elim0 + 3 * m_nk, 3 * m_nk) = state.b.cell[iT];
    for (int i = 1; i < m_nk; ++i) {
      U(m_gids_q[iT][i]) = state.q.cell[iT](i);
      U(m_gids_r[iT][i]) = state.r.cell[iT](i);
    }
    U(q_mean_id(iT)) = state.q.cell[iT](0);
    U(r_mean_id(iT)) = state.r.cell[iT](0);
  }
  for (std::size_t iF = 0; iF < mesh.n_faces(); ++iF) {
    const Face& F = mesh.face(iF);
    if (m_u_face_id[iF] >= 0) U.segment(m_u_face_id[iF], 3 * m_nf) = state.u.face[iF];
    if (m_b_face_width[iF] == 3 * m_nf) {
      U.segment(m_b_face_id[iF], 3 * m_nf) = state.b.face[iF];
    } else {
      const Vector3d frame[2] = {F.t1, F.t2};
      for (int t = 0; t < 2; ++t)
        for (int i = 0; i < m_nf; ++i) {
          double v = 0.0;
          for (int c = 0; c < 3; ++c) v += frame[t][c] * state.b.face[iF](c * m_nf + i);
          U(m_b_face_id[iF] + t * m_nf + i) = v;
        }
    }
  }
  U(m_lambda_q) = state.q.multiplier;
  U(m_lambda_r) = state.r.multiplier;
  return U;
}

SystemState DofLayout::from_global(const VectorXd& U) const {
  const PolyMesh& mesh = *m_mesh;
  SystemState s;
  s.u = HybridField(mesh, m_k);
  s.b = HybridField(mesh, m_k);
  s.q = CellScalarField(mesh, m_k);
  s.r = CellScalarField(mesh, m_k);
  for (std::size_t iT = 0; iT < mesh.n_cells(); ++iT) {
    const std::ptrdiff_t elim0 = std::ptrdiff_t(iT) * m_elim_per_cell;
    s.u.cell[iT] = U.segment(elim0, 3 * m_nk);
    s.b.cell[iT] = U.segment(elim0 + 3 * m_nk, 3 * m_nk);
    for (int i = 0; i < m_nk; ++i) {
      s.q.cell[iT](i) = U(m_gids_q[iT][i]);
      s.r.cell[iT](i) = U(m_gids_r[iT][i]);
    }
  }
  for (std::size_t iF = 0; iF < mesh.n_faces(); ++iF) {
    const Face& F = mesh.face(iF);
    if (m_u_face_id[iF] >= 0) s.u.face[iF] = U.segment(m_u_face_id[iF], 3 * m_nf);
    if (m_b_face_width[iF] == 3 * m_nf) {
      s.b.face[iF] = U.segment(m_b_face_id[iF], 3 * m_nf);
    } else {
      const Vector3d frame[2] = {F.t1, F.t2};
      for (int t = 0; t < 2; ++t)
        for (int i = 0; i < m_nf; ++i)
          for (int c = 0; c < 3; ++c)
            s.b.face[iF](c * m_nf + i) += frame[t][c] * U(m_b_face_id[iF] + t * m_nf + i);
    }
  }
  s.q.multiplier = U(m_lambda_q);
  s.r.multiplier = U(m_lambda_r);
  return s;
}

DofLayout build_layout(const PolyMesh& mesh, int k) { return DofLayout(mesh, k); }


}  // namespace polymhd
