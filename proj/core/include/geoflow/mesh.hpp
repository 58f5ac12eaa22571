#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "geoflow/types.hpp"

namespace geoflow {

struct MeshQualityReport {
  /// max over triangles of circumdiameter / inscribed-circle diameter
  double sigma_max = 0.0;
  int sigma_max_triangle = -1;
  double min_area = 0.0;
  int min_area_triangle = -1;
  double max_area = 0.0;
  /// max circumdiameter over triangles
  double mesh_size = 0.0;
};

struct AdmissibilityReport {
  /// (A1): every triangle area exceeds the degeneracy floor
  bool nondegenerate = false;
  /// (A2): averaged vertex normals span R^3 numerically
  bool normals_span = false;
  double min_area = 0.0;
  int worst_triangle = -1;
  /// smallest / largest singular value of the 3 x n_vertices normal matrix
  double normal_rank_ratio = 0.0;
  bool admissible() const { return nondegenerate && normals_span; }
};

struct DegeneracyEvent {
  int triangle = -1;
  double area = 0.0;
};

struct UpdateResult;

/// Immutable oriented triangulated surface, possibly with boundary.
///
/// Construction validates connectivity: indices in range, three distinct
/// vertices per triangle, every edge on at most two triangles, and winding
/// consistent across shared edges (a mesh that is consistently wound inward
/// is flipped as a whole; anything else throws TopologyError). Boundary
/// loops are extracted and stored counterclockwise when viewed from +z
/// whenever that projection is non-degenerate.
///
/// Face normals, face areas and averaged vertex normals are computed once
/// at construction; all accessors are safe for concurrent reads.
class SurfaceMesh {
 public:
  SurfaceMesh(std::vector<Vec3> vertices,
              std::vector<std::array<int, 3>> triangles);

  int n_vertices() const { return static_cast<int>(vertices_.size()); }
  int n_triangles() const { return static_cast<int>(triangles_.size()); }
  bool closed() const { return boundary_loops_.empty(); }

  const std::vector<Vec3>& vertices() const { return vertices_; }
  const std::vector<std::array<int, 3>>& triangles() const {
    return triangles_;
  }
  const std::vector<std::vector<int>>& boundary_loops() const {
    return boundary_loops_;
  }
  /// true for vertices lying on some boundary loop
  const std::vector<bool>& on_boundary() const { return on_boundary_; }

  /// Unit face normals; zero vector for degenerate faces.
  const VectorField& face_normals() const { return face_normals_; }
  const ScalarField& face_areas() const { return face_areas_; }
  /// Area-averaged vertex normals (not renormalized, |n| <= 1).
  const VectorField& vertex_normals() const { return vertex_normals_; }

  double area() const { return area_; }
  double min_face_area() const { return min_face_area_; }
  int min_face_triangle() const { return min_face_triangle_; }
  /// Degeneracy floor: 1e-14 times the bounding-box area scale.
  double epsilon_area() const { return epsilon_area_; }

  Vec3 bbox_min() const { return bbox_min_; }
  Vec3 bbox_max() const { return bbox_max_; }

 private:
  friend UpdateResult update_positions(const SurfaceMesh&,
                                       const VectorField&);
  SurfaceMesh() = default;
  void build(bool allow_global_flip);

  std::vector<Vec3> vertices_;
  std::vector<std::array<int, 3>> triangles_;
  std::vector<std::vector<int>> boundary_loops_;
  std::vector<bool> on_boundary_;
  VectorField face_normals_;
  ScalarField face_areas_;
  VectorField vertex_normals_;
  double area_ = 0.0;
  double min_face_area_ = 0.0;
  int min_face_triangle_ = -1;
  double epsilon_area_ = 0.0;
  Vec3 bbox_min_ = Vec3::Zero();
  Vec3 bbox_max_ = Vec3::Zero();
};

/// Unit-length normal of a counterclockwise triangle and its area.
/// Throws std::invalid_argument for a zero-area triangle.
std::pair<Vec3, double> face_normal_and_area(const Vec3& a, const Vec3& b,
                                             const Vec3& c);

/// Averaged vertex normals of an arbitrary vertex/triangle soup, area
/// weighted per incident face, not renormalized.
VectorField averaged_vertex_normals(const SurfaceMesh& mesh);

MeshQualityReport mesh_quality(const SurfaceMesh& mesh);

AdmissibilityReport check_admissible(const SurfaceMesh& mesh);

struct UpdateResult {
  SurfaceMesh mesh;
  /// Set when the displaced mesh violates the nondegeneracy floor. The mesh
  /// is still returned so the caller can decide what to persist.
  std::optional<DegeneracyEvent> degeneracy;
};

/// Moves every vertex by `displacement`, keeping connectivity. Degeneracy
/// of the result is reported, not thrown.
UpdateResult update_positions(const SurfaceMesh& mesh,
                              const VectorField& displacement);

/// Icosahedron subdivided `subdivisions` times, vertices projected onto the
/// sphere of the given radius: 10*4^s + 2 vertices, 20*4^s triangles.
SurfaceMesh gen_icosphere(int subdivisions, double radius = 1.0);

/// Surface of revolution about the x axis,
///   x(theta, phi) = (cos phi, f(phi) cos theta sin phi, f(phi) sin theta
///   sin phi),  f(phi) = 0.6 cos^2 phi + 0.4,
/// sampled on an n_theta x n_phi latitude grid with the phi = 0, pi rows
/// collapsed to poles: n_theta*(n_phi-1) + 2 vertices,
/// 2*n_theta*(n_phi-1) triangles.
SurfaceMesh gen_dumbbell(int n_theta, int n_phi);

/// Axis-aligned box of extents (lx, ly, lz) meshed with structured grids of
/// spacing near target_h per face. Closed boxes are centered at the origin.
/// With open_bottom the bottom face is omitted, the base sits in z = 0 with
/// the footprint centered, and the single boundary loop lies in z = 0.
SurfaceMesh gen_cuboid(double lx, double ly, double lz, double target_h,
                       bool open_bottom = false);

}  // namespace geoflow
