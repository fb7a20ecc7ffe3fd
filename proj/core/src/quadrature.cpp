#include "polymhd/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>

#include <Eigen/Eigenvalues>

namespace polymhd {

namespace {

// Golub-Welsch on the Jacobi weight (1-t)^alpha (1+t)^0 over [-1,1],
// remapped to [0,1] with the weight (1-x)^alpha.
void gauss_jacobi_impl(int n, int alpha, std::vector<double>& nodes, std::vector<double>& weights) {
  const double a = alpha;
  VectorXd diag(n);
  VectorXd sub(std::max(n - 1, 0));
  for (int k = 0; k < n; ++k) {
    if (k == 0)
      diag(k) = -a / (a + 2.0);
    else {
      const double s = 2.0 * k + a;
      diag(k) = -(a * a) / (s * (s + 2.0));
    }
  }
  for (int k = 1; k < n; ++k) {
    const double s = 2.0 * k + a;
    sub(k - 1) = std::sqrt(4.0 * k * (k + a) * k * (k + a) / (s * s * (s + 1.0) * (s - 1.0)));
  }
  const double mu0 = std::pow(2.0, a + 1.0) / (a + 1.0);

  Eigen::SelfAdjointEigenSolver<MatrixXd> es;
  es.computeFromTridiagonal(diag, sub);
  nodes.resize(n);
  weights.resize(n);
  for (int i = 0; i < n; ++i) {
    const double t = es.eigenvalues()(i);
    const double w = mu0 * es.eigenvectors()(0, i) * es.eigenvectors()(0, i);
    nodes[i] = 0.5 * (1.0 + t);
    weights[i] = std::pow(2.0, -(a + 1.0)) * w;
  }
}

struct Rule1d {
  std::vector<double> x, w;
};

const Rule1d& cached_rule_1d(int n, int alpha) {
  static std::map<std::pair<int, int>, Rule1d> cache;
  static std::mutex mtx;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(n, alpha);
  auto it = cache.find(key);
  if (it == cache.end()) {
    Rule1d r;
    gauss_jacobi_impl(n, alpha, r.x, r.w);
    it = cache.emplace(key, std::move(r)).first;
  }
  return it->second;
}

int points_for_degree(int degree) { return std::max(1, (degree + 2) / 2); }

}  // namespace

void gauss_jacobi_01(int n, int alpha, std::vector<double>& nodes, std::vector<double>& weights) {
  const Rule1d& r = cached_rule_1d(n, alpha);
  nodes = r.x;
  weights = r.w;
}

void reference_triangle_rule(int degree, std::vector<Eigen::Vector2d>& nodes,
                             std::vector<double>& weights) {
  const int n = points_for_degree(degree);
  const Rule1d& gu = cached_rule_1d(n, 0);
  const Rule1d& gv = cached_rule_1d(n, 1);
  nodes.clear();
  weights.clear();
  nodes.reserve(n * n);
  weights.reserve(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double v = gv.x[j];
      const double u = gu.x[i];
      nodes.emplace_back(u * (1.0 - v), v);
      weights.push_back(gu.w[i] * gv.w[j]);
    }
}

void reference_tet_rule(int degree, std::vector<Vector3d>& nodes, std::vector<double>& weights) {
  const int n = points_for_degree(degree);
  const Rule1d& gu = cached_rule_1d(n, 0);
  const Rule1d& gv = cached_rule_1d(n, 1);
  const Rule1d& gw = cached_rule_1d(n, 2);
  nodes.clear();
  weights.clear();
  nodes.reserve(n * n * n);
  weights.reserve(n * n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double u = gu.x[i], v = gv.x[j], w = gw.x[k];
        nodes.emplace_back(u * (1.0 - v) * (1.0 - w), v * (1.0 - w), w);
        weights.push_back(gu.w[i] * gv.w[j] * gw.w[k]);
      }
}

std::vector<std::array<Vector3d, 4>> cell_sub_tets(const PolyMesh& mesh, std::size_t iT) {
  const Cell& T = mesh.cell(iT);
  std::vector<std::array<Vector3d, 4>> tets;
  for (std::size_t iTF = 0; iTF < T.faces.size(); ++iTF) {
    const Face& F = mesh.face(T.faces[iTF]);
    const int sign = T.face_signs[iTF];
    const std::size_t nv = F.vertices.size();
    auto push_tet = [&](Vector3d a, Vector3d b, const Vector3d& c) {
      if (sign < 0) std::swap(a, b);
      const double det =
          ((a - T.star_point).cross(b - T.star_point)).dot(c - T.star_point);
      if (det <= 0.0)
        throw GeometryError("degenerate sub-tetrahedron in cell " + std::to_string(iT));
      tets.push_back({T.star_point, a, b, c});
    };
    if (nv == 3) {
      push_tet(mesh.vertex(F.vertices[0]), mesh.vertex(F.vertices[1]), mesh.vertex(F.vertices[2]));
    } else {
      for (std::size_t i = 0; i < nv; ++i)
        push_tet(mesh.vertex(F.vertices[i]), mesh.vertex(F.vertices[(i + 1) % nv]), F.centroid);
    }
  }
  return tets;
}

std::vector<std::array<Vector3d, 3>> face_sub_triangles(const PolyMesh& mesh, std::size_t iF) {
  const Face& F = mesh.face(iF);
  const std::size_t nv = F.vertices.size();
  std::vector<std::array<Vector3d, 3>> tris;
  if (nv == 3) {
    tris.push_back({mesh.vertex(F.vertices[0]), mesh.vertex(F.vertices[1]),
                    mesh.vertex(F.vertices[2])});
  } else {
    for (std::size_t i = 0; i < nv; ++i)
      tris.push_back({F.centroid, mesh.vertex(F.vertices[i]),
                      mesh.vertex(F.vertices[(i + 1) % nv])});
  }
  return tris;
}

QuadRule cell_rule(const PolyMesh& mesh, std::size_t iT, int deg) {
  std::vector<Vector3d> ref_nodes;
  std::vector<double> ref_weights;
  reference_tet_rule(deg, ref_nodes, ref_weights);

  QuadRule rule;
  rule.exactness = deg;
  const auto tets = cell_sub_tets(mesh, iT);
  rule.nodes.reserve(tets.size() * ref_nodes.size());
  rule.weights.reserve(tets.size() * ref_nodes.size());
  for (const auto& t : tets) {
    Matrix3d J;
    J.col(0) = t[1] - t[0];
    J.col(1) = t[2] - t[0];
    J.col(2) = t[3] - t[0];
    const double det = J.determinant();
    for (std::size_t q = 0; q < ref_nodes.size(); ++q) {
      rule.nodes.push_back(t[0] + J * ref_nodes[q]);
      rule.weights.push_back(ref_weights[q] * det);
    }
  }
  return rule;
}

QuadRule face_rule(const PolyMesh& mesh, std::size_t iF, int deg) {
  std::vector<Eigen::Vector2d> ref_nodes;
  std::vector<double> ref_weights;
  reference_triangle_rule(deg, ref_nodes, ref_weights);

  QuadRule rule;
  rule.exactness = deg;
  const auto tris = face_sub_triangles(mesh, iF);
  rule.nodes.reserve(tris.size() * ref_nodes.size());
  rule.weights.reserve(tris.size() * ref_nodes.size());
  for (const auto& t : tris) {
    const Vector3d e1 = t[1] - t[0];
    const Vector3d e2 = t[2] - t[0];
    const double scale = e1.cross(e2).norm();  // twice the triangle area
    if (scale <= 0.0)
      throw GeometryError("degenerate sub-triangle on face " + std::to_string(iF));
    for (std::size_t q = 0; q < ref_nodes.size(); ++q) {
      rule.nodes.push_back(t[0] + ref_nodes[q].x() * e1 + ref_nodes[q].y() * e2);
      rule.weights.push_back(ref_weights[q] * scale);
    }
  }
  return rule;
}

}  // namespace polymhd
