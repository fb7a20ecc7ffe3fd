#include "polymhd/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace polymhd {

namespace {

double max_pairwise_distance(const std::vector<Vector3d>& pts) {
  double d2 = 0.0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (std::size_t j = i + 1; j < pts.size(); ++j)
      d2 = std::max(d2, (pts[i] - pts[j]).squaredNorm());
  return std::sqrt(d2);
}

// Newell's formula; robust for planar polygons in any orientation.
Vector3d newell_normal(const std::vector<Vector3d>& loop) {
  Vector3d n = Vector3d::Zero();
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vector3d& a = loop[i];
    const Vector3d& b = loop[(i + 1) % loop.size()];
    n.x() += (a.y() - b.y()) * (a.z() + b.z());
    n.y() += (a.z() - b.z()) * (a.x() + b.x());
    n.z() += (a.x() - b.x()) * (a.y() + b.y());
  }
  return n;
}

void compute_face_geometry(Face& F, const std::vector<Vector3d>& verts, std::size_t face_id) {
  if (F.vertices.size() < 3)
    throw TopologyError("face " + std::to_string(face_id) + " has fewer than 3 vertices");

  std::vector<Vector3d> loop;
  loop.reserve(F.vertices.size());
  for (int v : F.vertices) loop.push_back(verts[v]);

  Vector3d n = newell_normal(loop);
  const double n_norm = n.norm();
  if (n_norm <= 0.0)
    throw GeometryError("face " + std::to_string(face_id) + " has zero area");
  F.normal = n / n_norm;
  F.diameter = max_pairwise_distance(loop);

  // Area and centroid from a fan about the vertex mean.
  Vector3d mean = Vector3d::Zero();
  for (const auto& p : loop) mean += p;
  mean /= double(loop.size());

  double area = 0.0;
  Vector3d centroid = Vector3d::Zero();
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vector3d& a = loop[i];
    const Vector3d& b = loop[(i + 1) % loop.size()];
    const double tri_area = 0.5 * ((a - mean).cross(b - mean)).dot(F.normal);
    area += tri_area;
    centroid += tri_area * (mean + a + b) / 3.0;
  }
  if (area <= 0.0)
    throw GeometryError("face " + std::to_string(face_id) + " has non-positive area");
  F.area = area;
  F.centroid = centroid / area;

  double deviation = 0.0;
  for (const auto& p : loop) deviation = std::max(deviation, std::abs((p - F.centroid).dot(F.normal)));
  if (deviation > 1e-9 * F.diameter)
    throw TopologyError("face " + std::to_string(face_id) + " is non-planar (deviation " +
                        std::to_string(deviation) + ")");

  // In-plane frame: t1 from the global axis least aligned with n, t2 = n x t1.
  int axis = 0;
  double best = std::abs(F.normal.x());
  for (int j = 1; j < 3; ++j) {
    const double c = std::abs(F.normal[j]);
    if (c < best - 1e-14) {
      best = c;
      axis = j;
    }
  }
  Vector3d e = Vector3d::Zero();
  e[axis] = 1.0;
  F.t1 = (e - e.dot(F.normal) * F.normal).normalized();
  F.t2 = F.normal.cross(F.t1);
}

void compute_cell_geometry(Cell& T, const std::vector<Face>& faces,
                           const std::vector<Vector3d>& verts, std::size_t cell_id) {
  // Unique vertex set.
  T.vertices.clear();
  for (int f : T.faces)
    for (int v : faces[f].vertices) T.vertices.push_back(v);
  std::sort(T.vertices.begin(), T.vertices.end());
  T.vertices.erase(std::unique(T.vertices.begin(), T.vertices.end()), T.vertices.end());

  std::vector<Vector3d> pts;
  pts.reserve(T.vertices.size());
  for (int v : T.vertices) pts.push_back(verts[v]);
  T.diameter = max_pairwise_distance(pts);

  Vector3d apex = Vector3d::Zero();
  for (const auto& p : pts) apex += p;
  apex /= double(pts.size());

  // Signed tetrahedra: face fans coned to the vertex mean.
  double vol = 0.0;
  Vector3d centroid = Vector3d::Zero();
  for (std::size_t iTF = 0; iTF < T.faces.size(); ++iTF) {
    const Face& F = faces[T.faces[iTF]];
    const int sign = T.face_signs[iTF];
    const std::size_t nv = F.vertices.size();
    for (std::size_t i = 0; i < nv; ++i) {
      Vector3d a = verts[F.vertices[i]];
      Vector3d b = verts[F.vertices[(i + 1) % nv]];
      if (sign < 0) std::swap(a, b);
      const Vector3d& c = F.centroid;
      const double v6 = ((a - apex).cross(b - apex)).dot(c - apex);
      vol += v6 / 6.0;
      centroid += (v6 / 6.0) * (apex + a + b + c) / 4.0;
    }
  }
  if (vol <= 0.0)
    throw GeometryError("cell " + std::to_string(cell_id) + " has non-positive volume " +
                        std::to_string(vol));
  T.volume = vol;
  T.centroid = centroid / vol;
  T.star_point = T.centroid;
}

void validate_cell_identities(const PolyMesh& mesh, std::size_t iT) {
  const Cell& T = mesh.cell(iT);
  Vector3d closure = Vector3d::Zero();
  double total_area = 0.0;
  double flux = 0.0;
  for (std::size_t iTF = 0; iTF < T.faces.size(); ++iTF) {
    const Face& F = mesh.face(T.faces[iTF]);
    const Vector3d nTF = mesh.outward_normal(iT, iTF);
    closure += F.area * nTF;
    total_area += F.area;
    flux += F.area * F.centroid.dot(nTF);
  }
  if (closure.norm() > 1e-12 * total_area)
    throw GeometryError("cell " + std::to_string(iT) + " violates the closed-boundary identity");
  if (std::abs(flux - 3.0 * T.volume) > 1e-10 * 3.0 * T.volume)
    throw GeometryError("cell " + std::to_string(iT) + " violates the divergence identity");
}

}  // namespace

PolyMesh build_poly_mesh(std::vector<Vector3d> vertices,
                         std::vector<std::vector<int>> face_loops,
                         std::vector<std::vector<int>> signed_cells) {
  PolyMesh mesh;
  mesh.m_vertices = std::move(vertices);

  const int nv = static_cast<int>(mesh.m_vertices.size());
  mesh.m_faces.resize(face_loops.size());
  for (std::size_t f = 0; f < face_loops.size(); ++f) {
    for (int v : face_loops[f])
      if (v < 0 || v >= nv)
        throw ParseError("face " + std::to_string(f) + " references vertex " + std::to_string(v));
    mesh.m_faces[f].vertices = std::move(face_loops[f]);
    compute_face_geometry(mesh.m_faces[f], mesh.m_vertices, f);
  }

  const int nf = static_cast<int>(mesh.m_faces.size());
  mesh.m_cells.resize(signed_cells.size());
  for (std::size_t c = 0; c < signed_cells.size(); ++c) {
    Cell& T = mesh.m_cells[c];
    for (int ref : signed_cells[c]) {
      if (ref == 0 || std::abs(ref) > nf)
        throw ParseError("cell " + std::to_string(c) + " has invalid face reference " +
                         std::to_string(ref));
      T.faces.push_back(std::abs(ref) - 1);
      T.face_signs.push_back(ref > 0 ? 1 : -1);
    }
    if (T.faces.size() < 4)
      throw TopologyError("cell " + std::to_string(c) + " has fewer than 4 faces");

    for (std::size_t iTF = 0; iTF < T.faces.size(); ++iTF) {
      Face& F = mesh.m_faces[T.faces[iTF]];
      if (F.cells[0] < 0)
        F.cells[0] = static_cast<int>(c);
      else if (F.cells[1] < 0)
        F.cells[1] = static_cast<int>(c);
      else
        throw TopologyError("face " + std::to_string(T.faces[iTF]) +
                            " is referenced by more than 2 cells");
    }
  }

  std::size_t n_boundary = 0;
  for (std::size_t f = 0; f < mesh.m_faces.size(); ++f) {
    Face& F = mesh.m_faces[f];
    if (F.cells[0] < 0)
      throw TopologyError("face " + std::to_string(f) + " belongs to no cell");
    F.boundary = (F.cells[1] < 0);
    if (F.boundary) ++n_boundary;
  }
  mesh.m_n_boundary_faces = n_boundary;

  for (std::size_t c = 0; c < signed_cells.size(); ++c)
    compute_cell_geometry(mesh.m_cells[c], mesh.m_faces, mesh.m_vertices, c);

  // Interior faces must be seen with opposite orientations by their two cells.
  for (std::size_t c = 0; c < mesh.m_cells.size(); ++c) {
    const Cell& T = mesh.m_cells[c];
    for (std::size_t iTF = 0; iTF < T.faces.size(); ++iTF) {
      const Face& F = mesh.m_faces[T.faces[iTF]];
      if (F.boundary) continue;
      const int other = (F.cells[0] == static_cast<int>(c)) ? F.cells[1] : F.cells[0];
      const Cell& T2 = mesh.m_cells[other];
      for (std::size_t jTF = 0; jTF < T2.faces.size(); ++jTF) {
        if (T2.faces[jTF] == T.faces[iTF] &&
            T2.face_signs[jTF] == T.face_signs[iTF])
          throw TopologyError("interior face " + std::to_string(T.faces[iTF]) +
                              " has matching orientation signs in both cells");
      }
    }
  }

  mesh.m_h = 0.0;
  bool star_warned = false;
  for (std::size_t c = 0; c < mesh.m_cells.size(); ++c) {
    validate_cell_identities(mesh, c);
    mesh.m_h = std::max(mesh.m_h, mesh.m_cells[c].diameter);

    if (!star_warned) {
      const Cell& T = mesh.m_cells[c];
      for (std::size_t iTF = 0; iTF < T.faces.size() && !star_warned; ++iTF) {
        const Face& F = mesh.m_faces[T.faces[iTF]];
        const Vector3d nTF = mesh.outward_normal(c, iTF);
        for (int v : F.vertices) {
          if ((mesh.m_vertices[v] - T.star_point).dot(nTF) <= 0.0) {
            std::cerr << "polymhd: warning: cell " << c
                      << " may not be star-shaped about its centroid\n";
            star_warned = true;
            break;
          }
        }
      }
    }
  }
  return mesh;
}

PolyMesh build_from_tets(const std::vector<Vector3d>& vertices,
                         const std::vector<std::array<int, 4>>& tets) {
  // Outward-oriented face loops of a positively oriented tetrahedron.
  static const std::array<std::array<int, 3>, 4> local_faces = {
      {{1, 2, 3}, {0, 3, 2}, {0, 1, 3}, {0, 2, 1}}};

  std::map<std::array<int, 3>, int> face_of_triple;
  std::vector<std::vector<int>> face_loops;
  std::vector<std::vector<int>> signed_cells(tets.size());

  for (std::size_t c = 0; c < tets.size(); ++c) {
    std::array<int, 4> t = tets[c];
    const Vector3d d1 = vertices[t[1]] - vertices[t[0]];
    const Vector3d d2 = vertices[t[2]] - vertices[t[0]];
    const Vector3d d3 = vertices[t[3]] - vertices[t[0]];
    if (d1.cross(d2).dot(d3) < 0.0) std::swap(t[2], t[3]);

    for (const auto& lf : local_faces) {
      std::array<int, 3> loop = {t[lf[0]], t[lf[1]], t[lf[2]]};
      std::array<int, 3> key = loop;
      std::sort(key.begin(), key.end());
      auto it = face_of_triple.find(key);
      if (it == face_of_triple.end()) {
        const int id = static_cast<int>(face_loops.size());
        face_of_triple.emplace(key, id);
        face_loops.push_back({loop[0], loop[1], loop[2]});
        signed_cells[c].push_back(id + 1);
      } else {
        signed_cells[c].push_back(-(it->second + 1));
      }
    }
  }
  return build_poly_mesh(vertices, std::move(face_loops), std::move(signed_cells));
}

PolyMesh build_cube_tet_mesh(int n) {
  if (n < 1) throw std::invalid_argument("build_cube_tet_mesh: n must be >= 1");

  const int m = n + 1;
  std::vector<Vector3d> vertices;
  vertices.reserve(static_cast<std::size_t>(m) * m * m);
  for (int k = 0; k < m; ++k)
    for (int j = 0; j < m; ++j)
      for (int i = 0; i < m; ++i)
        vertices.emplace_back(double(i) / n, double(j) / n, double(k) / n);

  auto vid = [m](int i, int j, int k) { return i + m * (j + m * k); };

  // Kuhn split: one tetrahedron per permutation of the axes, all sharing the
  // main diagonal of the subcube; translation-consistent, hence conforming.
  static const std::array<std::array<int, 3>, 6> perms = {
      {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}}};

  std::vector<std::array<int, 4>> tets;
  tets.reserve(static_cast<std::size_t>(n) * n * n * 6);
  for (int k = 0; k < n; ++k)
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        for (const auto& p : perms) {
          std::array<int, 3> corner = {i, j, k};
          std::array<int, 4> tet;
          tet[0] = vid(corner[0], corner[1], corner[2]);
          for (int s = 0; s < 3; ++s) {
            corner[p[s]] += 1;
            tet[s + 1] = vid(corner[0], corner[1], corner[2]);
          }
          tets.push_back(tet);
        }
      }
  return build_from_tets(vertices, tets);
}

PolyMesh parse_mesh_json(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("mesh JSON: ") + e.what());
  }
  try {
    std::vector<Vector3d> vertices;
    for (const auto& v : doc.at("vertices")) {
      if (!v.is_array() || v.size() != 3) throw ParseError("mesh JSON: vertex is not [x,y,z]");
      vertices.emplace_back(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
    }
    std::vector<std::vector<int>> faces;
    for (const auto& f : doc.at("faces")) faces.push_back(f.get<std::vector<int>>());
    std::vector<std::vector<int>> cells;
    for (const auto& c : doc.at("cells")) cells.push_back(c.get<std::vector<int>>());
    return build_poly_mesh(std::move(vertices), std::move(faces), std::move(cells));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("mesh JSON: ") + e.what());
  }
}

PolyMesh load_mesh(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open mesh file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_mesh_json(buf.str());
}

double cell_inradius(const PolyMesh& mesh, std::size_t iT) {
  const Cell& T = mesh.cell(iT);

  const bool is_tet = (T.faces.size() == 4 && T.vertices.size() == 4);
  if (is_tet) {
    double area = 0.0;
    for (int f : T.faces) area += mesh.face(f).area;
    return 3.0 * T.volume / area;
  }
  double r = std::numeric_limits<double>::max();
  for (std::size_t iTF = 0; iTF < T.faces.size(); ++iTF) {
    const Face& F = mesh.face(T.faces[iTF]);
    const Vector3d nTF = mesh.outward_normal(iT, iTF);
    r = std::min(r, (F.centroid - T.star_point).dot(nTF));
  }
  return r;
}

MeshStats compute_stats(const PolyMesh& mesh) {
  MeshStats s;
  s.h = mesh.h();
  s.n_cells = mesh.n_cells();
  s.n_interior_faces = mesh.n_interior_faces();
  for (std::size_t c = 0; c < mesh.n_cells(); ++c)
    s.regularity = std::max(s.regularity, mesh.cell(c).diameter / cell_inradius(mesh, c));
  return s;
}

}  // namespace polymhd
