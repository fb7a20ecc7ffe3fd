#ifndef POLYMHD_MESH_HPP
#define POLYMHD_MESH_HPP

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "polymhd/common.hpp"

namespace polymhd {

/// A planar polygonal face of a polyhedral mesh.
struct Face {
  std::vector<int> vertices;  ///< ordered loop, counter-clockwise seen from the normal side
  Vector3d centroid = Vector3d::Zero();
  Vector3d normal = Vector3d::Zero();  ///< unit normal on the side the loop is CCW from
  Vector3d t1 = Vector3d::Zero();      ///< first in-plane frame vector
  Vector3d t2 = Vector3d::Zero();      ///< second in-plane frame vector, t2 = n x t1
  double area = 0.0;
  double diameter = 0.0;
  bool boundary = false;
  std::array<int, 2> cells = {-1, -1};  ///< adjacent cells, second entry -1 on the boundary
};

/// A polyhedral cell described by its oriented faces.
struct Cell {
  std::vector<int> faces;       ///< face ids in local order
  std::vector<int> face_signs;  ///< +1 if the stored face normal points out of this cell, -1 otherwise
  std::vector<int> vertices;    ///< unique vertex ids (unordered)
  Vector3d centroid = Vector3d::Zero();
  Vector3d star_point = Vector3d::Zero();  ///< point the cell is assumed star-shaped about
  double volume = 0.0;
  double diameter = 0.0;
};

/// Immutable polyhedral mesh with full geometry and connectivity.
///
/// Construction goes through build_poly_mesh (or the loaders below), which
/// computes all derived geometry and validates the per-cell closure and
/// divergence identities. After construction the mesh is read-only and safe
/// to share across threads.
class PolyMesh {
 public:
  PolyMesh() = default;

  std::size_t n_vertices() const { return m_vertices.size(); }
  std::size_t n_faces() const { return m_faces.size(); }
  std::size_t n_cells() const { return m_cells.size(); }

  const Vector3d& vertex(std::size_t i) const { return m_vertices[i]; }
  const Face& face(std::size_t i) const { return m_faces[i]; }
  const Cell& cell(std::size_t i) const { return m_cells[i]; }
  const std::vector<Vector3d>& vertices() const { return m_vertices; }
  const std::vector<Face>& faces() const { return m_faces; }
  const std::vector<Cell>& cells() const { return m_cells; }

  /// Unit normal to the iTF-th face of cell iT, pointing out of the cell.
  Vector3d outward_normal(std::size_t iT, std::size_t iTF) const {
    const Cell& T = m_cells[iT];
    return T.face_signs[iTF] * m_faces[T.faces[iTF]].normal;
  }

  double h() const { return m_h; }  ///< largest cell diameter

  std::size_t n_boundary_faces() const { return m_n_boundary_faces; }
  std::size_t n_interior_faces() const { return m_faces.size() - m_n_boundary_faces; }

 private:
  friend PolyMesh build_poly_mesh(std::vector<Vector3d> vertices,
                                  std::vector<std::vector<int>> face_loops,
                                  std::vector<std::vector<int>> signed_cells);
  std::vector<Vector3d> m_vertices;
  std::vector<Face> m_faces;
  std::vector<Cell> m_cells;
  double m_h = 0.0;
  std::size_t m_n_boundary_faces = 0;
};

/// Summary statistics of a mesh, matching the quantities reported for mesh families.
struct MeshStats {
  double h = 0.0;                    ///< max cell diameter
  std::size_t n_cells = 0;
  std::size_t n_interior_faces = 0;
  double regularity = 0.0;           ///< max over cells of h_T / r_T
};

/// Builds a mesh from raw data: vertex coordinates, face vertex loops, and
/// per-cell signed 1-based face references (sign +: stored normal is outward).
///
/// Throws TopologyError for connectivity defects (face shared by 0 or >2
/// cells, non-planar face beyond 1e-9*h_F, mismatched interior orientation),
/// GeometryError for non-positive volumes or violated closure identities.
PolyMesh build_poly_mesh(std::vector<Vector3d> vertices,
                         std::vector<std::vector<int>> face_loops,
                         std::vector<std::vector<int>> signed_cells);

/// Builds a conforming mesh from a tetrahedron soup; faces are deduplicated
/// and oriented so the first incident cell sees an outward stored normal.
PolyMesh build_from_tets(const std::vector<Vector3d>& vertices,
                         const std::vector<std::array<int, 4>>& tets);

/// Reads the JSON mesh format: {"vertices": [[x,y,z],...],
/// "faces": [[v0,v1,...],...], "cells": [[+-(f+1),...],...]}.
PolyMesh load_mesh(const std::string& path);

/// Parses the JSON mesh format from an in-memory string.
PolyMesh parse_mesh_json(const std::string& text);

/// Unit cube (0,1)^3 split into n^3 subcubes of 6 Kuhn tetrahedra each.
PolyMesh build_cube_tet_mesh(int n);

MeshStats compute_stats(const PolyMesh& mesh);

/// Inscribed-ball radius about the star point: exact inradius for tetrahedra,
/// otherwise the distance from the star point to the nearest face plane.
double cell_inradius(const PolyMesh& mesh, std::size_t iT);

}  // namespace polymhd

#endif
