#include "polymhd/basis.hpp"

#include <cmath>

#include <Eigen/Cholesky>

namespace polymhd {

namespace {

std::vector<std::array<int, 3>> exponents_3d(int degree) {
  std::vector<std::array<int, 3>> exps;
  for (int g = 0; g <= degree; ++g)
    for (int a = g; a >= 0; --a)
      for (int b = g - a; b >= 0; --b) exps.push_back({a, b, g - a - b});
  return exps;
}

std::vector<std::array<int, 2>> exponents_2d(int degree) {
  std::vector<std::array<int, 2>> exps;
  for (int g = 0; g <= degree; ++g)
    for (int a = g; a >= 0; --a) exps.push_back({a, g - a});
  return exps;
}

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// Lower-triangular C with C G C^T = I, via Cholesky with one refinement pass
// (a stabilized Gram-Schmidt in the coefficient representation).
MatrixXd orthonormalize_gram(const MatrixXd& G) {
  const int n = static_cast<int>(G.rows());
  Eigen::LLT<MatrixXd> llt(G);
  if (llt.info() != Eigen::Success)
    throw ConditioningError("monomial Gram matrix is numerically singular; "
                            "reduce the degree or improve the cell shape");
  MatrixXd C = MatrixXd::Identity(n, n);
  llt.matrixL().solveInPlace<Eigen::OnTheLeft>(C);

  MatrixXd G2 = C * G * C.transpose();
  Eigen::LLT<MatrixXd> llt2(G2);
  if (llt2.info() != Eigen::Success)
    throw ConditioningError("orthonormalization refinement failed");
  llt2.matrixL().solveInPlace<Eigen::OnTheLeft>(C);
  return C;
}

}  // namespace

CellBasis CellBasis::monomials(int degree, const Vector3d& center, double scale) {
  CellBasis b;
  b.m_degree = degree;
  b.m_center = center;
  b.m_scale = scale;
  b.m_exponents = exponents_3d(degree);
  b.m_coeff = MatrixXd::Identity(b.size(), b.size());
  return b;
}

CellBasis CellBasis::orthonormal(const PolyMesh& mesh, std::size_t iT, int degree) {
  const Cell& T = mesh.cell(iT);
  CellBasis b = monomials(degree, T.centroid, T.diameter);
  const QuadRule rule = cell_rule(mesh, iT, 2 * degree);
  const MatrixXd V = b.values(rule.nodes);
  MatrixXd G = MatrixXd::Zero(b.size(), b.size());
  for (std::size_t q = 0; q < rule.size(); ++q)
    G.noalias() += rule.weights[q] * V.row(q).transpose() * V.row(q);
  b.m_coeff = orthonormalize_gram(G);
  b.m_orthonormal = true;
  return b;
}

MatrixXd CellBasis::values(const std::vector<Vector3d>& points) const {
  const int n = size();
  MatrixXd M(points.size(), n);
  for (std::size_t q = 0; q < points.size(); ++q) {
    const Vector3d xi = (points[q] - m_center) / m_scale;
    for (int j = 0; j < n; ++j) {
      const auto& e = m_exponents[j];
      M(q, j) = ipow(xi.x(), e[0]) * ipow(xi.y(), e[1]) * ipow(xi.z(), e[2]);
    }
  }
  return M * m_coeff.transpose();
}

std::array<MatrixXd, 3> CellBasis::gradients(const std::vector<Vector3d>& points) const {
  const int n = size();
  std::array<MatrixXd, 3> D = {MatrixXd(points.size(), n), MatrixXd(points.size(), n),
                               MatrixXd(points.size(), n)};
  for (std::size_t q = 0; q < points.size(); ++q) {
    const Vector3d xi = (points[q] - m_center) / m_scale;
    for (int j = 0; j < n; ++j) {
      const auto& e = m_exponents[j];
      const double px = ipow(xi.x(), e[0]);
      const double py = ipow(xi.y(), e[1]);
      const double pz = ipow(xi.z(), e[2]);
      D[0](q, j) = e[0] > 0 ? e[0] / m_scale * ipow(xi.x(), e[0] - 1) * py * pz : 0.0;
      D[1](q, j) = e[1] > 0 ? e[1] / m_scale * px * ipow(xi.y(), e[1] - 1) * pz : 0.0;
      D[2](q, j) = e[2] > 0 ? e[2] / m_scale * px * py * ipow(xi.z(), e[2] - 1) : 0.0;
    }
  }
  for (auto& M : D) M = M * m_coeff.transpose();
  return D;
}

FaceBasis FaceBasis::monomials(const Face& face, int degree) {
  FaceBasis b;
  b.m_degree = degree;
  b.m_center = face.centroid;
  b.m_t1 = face.t1;
  b.m_t2 = face.t2;
  b.m_scale = face.diameter;
  b.m_exponents = exponents_2d(degree);
  b.m_coeff = MatrixXd::Identity(b.size(), b.size());
  return b;
}

FaceBasis FaceBasis::orthonormal(const PolyMesh& mesh, std::size_t iF, int degree) {
  FaceBasis b = monomials(mesh.face(iF), degree);
  const QuadRule rule = face_rule(mesh, iF, 2 * degree);
  const MatrixXd V = b.values(rule.nodes);
  MatrixXd G = MatrixXd::Zero(b.size(), b.size());
  for (std::size_t q = 0; q < rule.size(); ++q)
    G.noalias() += rule.weights[q] * V.row(q).transpose() * V.row(q);
  b.m_coeff = orthonormalize_gram(G);
  b.m_orthonormal = true;
  return b;
}

MatrixXd FaceBasis::values(const std::vector<Vector3d>& points) const {
  const int n = size();
  MatrixXd M(points.size(), n);
  for (std::size_t q = 0; q < points.size(); ++q) {
    const Vector3d d = points[q] - m_center;
    const double xi = m_t1.dot(d) / m_scale;
    const double eta = m_t2.dot(d) / m_scale;
    for (int j = 0; j < n; ++j) {
      const auto& e = m_exponents[j];
      M(q, j) = ipow(xi, e[0]) * ipow(eta, e[1]);
    }
  }
  return M * m_coeff.transpose();
}

namespace {

template <class Basis>
MatrixXd mass_matrix_impl(const Basis& basis, const QuadRule& rule) {
  const MatrixXd V = basis.values(rule.nodes);
  MatrixXd M = MatrixXd::Zero(basis.size(), basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q)
    M.noalias() += rule.weights[q] * V.row(q).transpose() * V.row(q);
  Eigen::LLT<MatrixXd> llt(M);
  if (llt.info() != Eigen::Success)
    throw ConditioningError("mass matrix is not numerically SPD; orthonormalize the basis");
  return M;
}

template <class Basis>
VectorXd l2_project_impl(const ScalarField& f, const Basis& basis, const QuadRule& rule) {
  const MatrixXd V = basis.values(rule.nodes);
  MatrixXd M = MatrixXd::Zero(basis.size(), basis.size());
  VectorXd rhs = VectorXd::Zero(basis.size());
  for (std::size_t q = 0; q < rule.size(); ++q) {
    M.noalias() += rule.weights[q] * V.row(q).transpose() * V.row(q);
    rhs.noalias() += rule.weights[q] * f(rule.nodes[q]) * V.row(q).transpose();
  }
  return M.ldlt().solve(rhs);
}

}  // namespace

MatrixXd mass_matrix(const CellBasis& basis, const QuadRule& rule) {
  return mass_matrix_impl(basis, rule);
}
MatrixXd mass_matrix(const FaceBasis& basis, const QuadRule& rule) {
  return mass_matrix_impl(basis, rule);
}

VectorXd l2_project(const ScalarField& f, const CellBasis& basis, const QuadRule& rule) {
  return l2_project_impl(f, basis, rule);
}
VectorXd l2_project(const ScalarField& f, const FaceBasis& basis, const QuadRule& rule) {
  return l2_project_impl(f, basis, rule);
}

Bases Bases::build(const PolyMesh& mesh, int k, unsigned workers) {
  Bases b;
  b.k = k;
  b.cell_degree = std::max(k + 1, 2 * k);
  b.cell.resize(mesh.n_cells());
  b.face.resize(mesh.n_faces());
  parallel_for(mesh.n_cells(),
               [&](std::size_t iT) { b.cell[iT] = CellBasis::orthonormal(mesh, iT, b.cell_degree); },
               workers);
  parallel_for(mesh.n_faces(),
               [&](std::size_t iF) { b.face[iF] = FaceBasis::orthonormal(mesh, iF, k); },
               workers);
  return b;
}

VectorXd l2_project_cell(const VectorField& v, const PolyMesh& mesh, std::size_t iT,
                         const Bases& bases, int quad_degree) {
  const int nk = dim_P3(bases.k);
  const QuadRule rule = cell_rule(mesh, iT, std::max(quad_degree, 2 * bases.k));
  const MatrixXd V = bases.cell[iT].values(rule.nodes).leftCols(nk);
  VectorXd out = VectorXd::Zero(3 * nk);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vector3d val = rule.weights[q] * v(rule.nodes[q]);
    for (int c = 0; c < 3; ++c) out.segment(c * nk, nk).noalias() += val[c] * V.row(q).transpose();
  }
  return out;  // orthonormal basis: mass matrix is the identity
}

VectorXd l2_project_face(const VectorField& v, const PolyMesh& mesh, std::size_t iF,
                         const Bases& bases, int quad_degree) {
  const int nf = dim_P2(bases.k);
  const QuadRule rule = face_rule(mesh, iF, std::max(quad_degree, 2 * bases.k));
  const MatrixXd V = bases.face[iF].values(rule.nodes);
  VectorXd out = VectorXd::Zero(3 * nf);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const Vector3d val = rule.weights[q] * v(rule.nodes[q]);
    for (int c = 0; c < 3; ++c) out.segment(c * nf, nf).noalias() += val[c] * V.row(q).transpose();
  }
  return out;
}

HybridField interpolate(const VectorField& v, const PolyMesh& mesh, const Bases& bases,
                        int quad_degree, unsigned workers) {
  HybridField f(mesh, bases.k);
  parallel_for(mesh.n_cells(),
               [&](std::size_t iT) { f.cell[iT] = l2_project_cell(v, mesh, iT, bases, quad_degree); },
               workers);
  parallel_for(mesh.n_faces(),
               [&](std::size_t iF) { f.face[iF] = l2_project_face(v, mesh, iF, bases, quad_degree); },
               workers);
  return f;
}

VectorXd elliptic_project(const ScalarField& f, const VectorField& grad_f, const PolyMesh& mesh,
                          std::size_t iT, const Bases& bases, int degree, int quad_degree) {
  const int n = dim_P3(degree);
  const QuadRule rule = cell_rule(mesh, iT, std::max(quad_degree, 2 * degree));
  const CellBasis& basis = bases.cell[iT];
  const auto D = basis.gradients(rule.nodes);
  const MatrixXd V = basis.values(rule.nodes).leftCols(n);

  MatrixXd K = MatrixXd::Zero(n, n);
  VectorXd rhs = VectorXd::Zero(n);
  double mean_f = 0.0;
  VectorXd mean_phi = VectorXd::Zero(n);
  for (std::size_t q = 0; q < rule.size(); ++q) {
    const double w = rule.weights[q];
    const Vector3d g = grad_f(rule.nodes[q]);
    for (int d = 0; d < 3; ++d) {
      const auto row = D[d].row(q).head(n);
      K.noalias() += w * row.transpose() * row;
      rhs.noalias() += w * g[d] * row.transpose();
    }
    mean_f += w * f(rule.nodes[q]);
    mean_phi.noalias() += w * V.row(q).transpose();
  }

  MatrixXd bordered = MatrixXd::Zero(n + 1, n + 1);
  bordered.topLeftCorner(n, n) = K;
  bordered.topRightCorner(n, 1) = mean_phi;
  bordered.bottomLeftCorner(1, n) = mean_phi.transpose();
  VectorXd full_rhs(n + 1);
  full_rhs.head(n) = rhs;
  full_rhs(n) = mean_f;
  Eigen::PartialPivLU<MatrixXd> lu(bordered);
  const VectorXd sol = lu.solve(full_rhs);
  return sol.head(n);
}

Vector3d eval_cell_vector(const CellBasis& basis, int n_scalar, const VectorXd& coeffs,
                          const Vector3d& x) {
  const MatrixXd V = basis.values({x}).leftCols(n_scalar);
  Vector3d out;
  for (int c = 0; c < 3; ++c) out[c] = V.row(0).dot(coeffs.segment(c * n_scalar, n_scalar));
  return out;
}

}  // namespace polymhd
