#include "geoflow/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <unordered_map>

namespace geoflow {

namespace {

constexpr double kEpsAreaFactor = 1e-14;

uint64_t edge_key(int a, int b) {
  const uint64_t lo = static_cast<uint32_t>(std::min(a, b));
  const uint64_t hi = static_cast<uint32_t>(std::max(a, b));
  return (hi << 32) | lo;
}

double loop_shoelace_xy(const std::vector<Vec3>& verts,
                        const std::vector<int>& loop) {
  double s = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec3& p = verts[loop[i]];
    const Vec3& q = verts[loop[(i + 1) % loop.size()]];
    s += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * s;
}

}  // namespace

SurfaceMesh::SurfaceMesh(std::vector<Vec3> vertices,
                         std::vector<std::array<int, 3>> triangles)
    : vertices_(std::move(vertices)), triangles_(std::move(triangles)) {
  build(/*allow_global_flip=*/true);
}

void SurfaceMesh::build(bool allow_global_flip) {
  const int nv = n_vertices();
  for (const Vec3& p : vertices_) {
    if (!p.allFinite()) throw TopologyError("non-finite vertex coordinate");
  }
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int j = 0; j < 3; ++j) {
      if (tri[j] < 0 || tri[j] >= nv) {
        throw TopologyError("triangle " + std::to_string(t) +
                            ": vertex index out of range");
      }
    }
    if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2]) {
      throw TopologyError("triangle " + std::to_string(t) +
                          ": repeated vertex index");
    }
  }

  // Edge census: each undirected edge on at most two triangles and, when on
  // two, traversed once in each direction. A mesh that is wound backwards
  // everywhere still passes here and is handled by the volume check below.
  std::unordered_map<uint64_t, std::pair<int, int>> census;
  census.reserve(triangles_.size() * 3 / 2 + 1);
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int j = 0; j < 3; ++j) {
      const int a = tri[j];
      const int b = tri[(j + 1) % 3];
      auto& rec = census[edge_key(a, b)];
      if (a < b) {
        rec.first++;
      } else {
        rec.second++;
      }
      if (rec.first + rec.second > 2) {
        throw TopologyError("non-manifold edge (" + std::to_string(a) + "," +
                            std::to_string(b) + ")");
      }
      if (rec.first > 1 || rec.second > 1) {
        throw TopologyError("inconsistent winding across edge (" +
                            std::to_string(a) + "," + std::to_string(b) +
                            "), not repairable by a global flip");
      }
    }
  }

  // Boundary loops, discovered in deterministic triangle order.
  std::vector<int> next_on_boundary(nv, -1);
  std::vector<int> in_degree(nv, 0);
  std::vector<int> boundary_starts;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    for (int j = 0; j < 3; ++j) {
      const int a = tri[j];
      const int b = tri[(j + 1) % 3];
      const auto& rec = census.at(edge_key(a, b));
      if (rec.first + rec.second == 1) {
        if (next_on_boundary[a] != -1) {
          throw TopologyError("non-manifold boundary vertex " +
                              std::to_string(a));
        }
        next_on_boundary[a] = b;
        in_degree[b]++;
        boundary_starts.push_back(a);
      }
    }
  }
  for (int v = 0; v < nv; ++v) {
    if ((next_on_boundary[v] != -1) != (in_degree[v] > 0) || in_degree[v] > 1) {
      throw TopologyError("non-manifold boundary vertex " + std::to_string(v));
    }
  }
  boundary_loops_.clear();
  on_boundary_.assign(nv, false);
  {
    std::vector<bool> used(nv, false);
    for (int start : boundary_starts) {
      if (used[start]) continue;
      std::vector<int> loop;
      int v = start;
      do {
        loop.push_back(v);
        used[v] = true;
        on_boundary_[v] = true;
        v = next_on_boundary[v];
      } while (v != start);
      boundary_loops_.push_back(std::move(loop));
    }
  }

  // Geometry.
  face_normals_.assign(triangles_.size(), Vec3::Zero());
  face_areas_.assign(triangles_.size(), 0.0);
  area_ = 0.0;
  min_face_area_ = triangles_.empty() ? 0.0
                                      : std::numeric_limits<double>::max();
  min_face_triangle_ = -1;
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    const Vec3 cross = (vertices_[tri[1]] - vertices_[tri[0]])
                           .cross(vertices_[tri[2]] - vertices_[tri[0]]);
    const double len = cross.norm();
    face_areas_[t] = 0.5 * len;
    face_normals_[t] = len > 0.0 ? Vec3(cross / len) : Vec3::Zero();
    area_ += face_areas_[t];
    if (face_areas_[t] < min_face_area_) {
      min_face_area_ = face_areas_[t];
      min_face_triangle_ = static_cast<int>(t);
    }
  }

  bbox_min_ = Vec3::Constant(std::numeric_limits<double>::max());
  bbox_max_ = Vec3::Constant(std::numeric_limits<double>::lowest());
  for (const Vec3& p : vertices_) {
    bbox_min_ = bbox_min_.cwiseMin(p);
    bbox_max_ = bbox_max_.cwiseMax(p);
  }
  if (vertices_.empty()) {
    bbox_min_ = bbox_max_ = Vec3::Zero();
  }
  Vec3 ext = bbox_max_ - bbox_min_;
  std::array<double, 3> e{ext.x(), ext.y(), ext.z()};
  std::sort(e.begin(), e.end());
  double area_scale = e[2] * e[1];
  if (area_scale == 0.0) area_scale = ext.squaredNorm();
  if (area_scale == 0.0) area_scale = 1.0;
  epsilon_area_ = kEpsAreaFactor * area_scale;

  // Outward orientation: enforced through the divergence-theorem volume when
  // it is meaningful (closed surface, or all boundary in the substrate plane
  // z = 0, where the missing bottom contributes nothing).
  if (allow_global_flip && !triangles_.empty()) {
    const double zscale = 1e-12 * std::sqrt(area_scale);
    bool volume_meaningful = true;
    for (int v = 0; v < nv; ++v) {
      if (on_boundary_[v] && std::abs(vertices_[v].z()) > zscale) {
        volume_meaningful = false;
        break;
      }
    }
    if (volume_meaningful) {
      double vol = 0.0;
      for (std::size_t t = 0; t < triangles_.size(); ++t) {
        const auto& tri = triangles_[t];
        const Vec3 c =
            (vertices_[tri[0]] + vertices_[tri[1]] + vertices_[tri[2]]) / 3.0;
        vol += c.dot(face_normals_[t]) * face_areas_[t] / 3.0;
      }
      const double vol_scale = 1e-12 * std::pow(std::sqrt(area_scale), 3);
      if (vol < -vol_scale) {
        for (auto& tri : triangles_) std::swap(tri[1], tri[2]);
        build(false);
        return;
      }
    }
  }

  // Averaged vertex normals (area weighted, not renormalized).
  vertex_normals_.assign(nv, Vec3::Zero());
  {
    std::vector<double> weight(nv, 0.0);
    for (std::size_t t = 0; t < triangles_.size(); ++t) {
      for (int j = 0; j < 3; ++j) {
        vertex_normals_[triangles_[t][j]] += face_areas_[t] * face_normals_[t];
        weight[triangles_[t][j]] += face_areas_[t];
      }
    }
    for (int v = 0; v < nv; ++v) {
      if (weight[v] > 0.0) vertex_normals_[v] /= weight[v];
    }
  }

  // Boundary loops counterclockwise from +z where the projection is usable.
  for (auto& loop : boundary_loops_) {
    const double s = loop_shoelace_xy(vertices_, loop);
    if (s < -1e-12 * area_scale) std::reverse(loop.begin(), loop.end());
  }
}

std::pair<Vec3, double> face_normal_and_area(const Vec3& a, const Vec3& b,
                                             const Vec3& c) {
  const Vec3 e1 = b - a;
  const Vec3 e2 = c - a;
  const Vec3 cross = e1.cross(e2);
  const double len = cross.norm();
  const double scale = std::max(e1.squaredNorm(), e2.squaredNorm());
  if (len <= 1e-14 * scale) {
    throw std::invalid_argument("face_normal_and_area: degenerate triangle");
  }
  return {cross / len, 0.5 * len};
}

VectorField averaged_vertex_normals(const SurfaceMesh& mesh) {
  return mesh.vertex_normals();
}

MeshQualityReport mesh_quality(const SurfaceMesh& mesh) {
  MeshQualityReport rep;
  rep.min_area = mesh.min_face_area();
  rep.min_area_triangle = mesh.min_face_triangle();
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const Vec3& pa = mesh.vertices()[tri[0]];
    const Vec3& pb = mesh.vertices()[tri[1]];
    const Vec3& pc = mesh.vertices()[tri[2]];
    const double a = (pb - pc).norm();
    const double b = (pc - pa).norm();
    const double c = (pa - pb).norm();
    const double area = mesh.face_areas()[t];
    rep.max_area = std::max(rep.max_area, area);
    double circumdiameter;
    double sigma;
    if (area > 0.0) {
      circumdiameter = a * b * c / (2.0 * area);
      const double indiameter = 4.0 * area / (a + b + c);
      sigma = circumdiameter / indiameter;
    } else {
      circumdiameter = std::max({a, b, c});
      sigma = std::numeric_limits<double>::infinity();
    }
    rep.mesh_size = std::max(rep.mesh_size, circumdiameter);
    if (sigma > rep.sigma_max) {
      rep.sigma_max = sigma;
      rep.sigma_max_triangle = t;
    }
  }
  return rep;
}

AdmissibilityReport check_admissible(const SurfaceMesh& mesh) {
  AdmissibilityReport rep;
  rep.min_area = mesh.min_face_area();
  rep.worst_triangle = mesh.min_face_triangle();
  rep.nondegenerate =
      mesh.n_triangles() > 0 && mesh.min_face_area() > mesh.epsilon_area();

  Mat3 gram = Mat3::Zero();
  for (const Vec3& n : mesh.vertex_normals()) gram += n * n.transpose();
  Eigen::SelfAdjointEigenSolver<Mat3> eig(gram);
  const double smax = std::sqrt(std::max(0.0, eig.eigenvalues()[2]));
  const double smin = std::sqrt(std::max(0.0, eig.eigenvalues()[0]));
  rep.normal_rank_ratio = smax > 0.0 ? smin / smax : 0.0;
  rep.normals_span = smax > 0.0 && rep.normal_rank_ratio > 1e-10;
  return rep;
}

UpdateResult update_positions(const SurfaceMesh& mesh,
                              const VectorField& displacement) {
  if (displacement.size() != mesh.vertices().size()) {
    throw std::invalid_argument("update_positions: displacement size");
  }
  for (const Vec3& d : displacement) {
    if (!d.allFinite()) {
      throw std::invalid_argument("update_positions: non-finite displacement");
    }
  }
  SurfaceMesh moved;
  moved.vertices_.resize(mesh.vertices().size());
  for (std::size_t i = 0; i < displacement.size(); ++i) {
    moved.vertices_[i] = mesh.vertices()[i] + displacement[i];
  }
  moved.triangles_ = mesh.triangles();
  moved.build(/*allow_global_flip=*/false);

  UpdateResult result{std::move(moved), std::nullopt};
  if (result.mesh.min_face_area() <= result.mesh.epsilon_area()) {
    result.degeneracy = DegeneracyEvent{result.mesh.min_face_triangle(),
                                        result.mesh.min_face_area()};
  }
  return result;
}

SurfaceMesh gen_icosphere(int subdivisions, double radius) {
  if (subdivisions < 0 || radius <= 0.0) {
    throw std::invalid_argument("gen_icosphere: bad parameters");
  }
  const double t = (1.0 + std::sqrt(5.0)) / 2.0;
  std::vector<Vec3> verts = {
      {-1, t, 0}, {1, t, 0},   {-1, -t, 0}, {1, -t, 0},
      {0, -1, t}, {0, 1, t},   {0, -1, -t}, {0, 1, -t},
      {t, 0, -1}, {t, 0, 1},   {-t, 0, -1}, {-t, 0, 1},
  };
  std::vector<std::array<int, 3>> faces = {
      {0, 11, 5}, {0, 5, 1},  {0, 1, 7},   {0, 7, 10}, {0, 10, 11},
      {1, 5, 9},  {5, 11, 4}, {11, 10, 2}, {10, 7, 6}, {7, 1, 8},
      {3, 9, 4},  {3, 4, 2},  {3, 2, 6},   {3, 6, 8},  {3, 8, 9},
      {4, 9, 5},  {2, 4, 11}, {6, 2, 10},  {8, 6, 7},  {9, 8, 1},
  };
  for (Vec3& v : verts) v = radius * v.normalized();

  for (int s = 0; s < subdivisions; ++s) {
    std::map<uint64_t, int> midpoint;
    auto mid = [&](int a, int b) {
      const uint64_t key = edge_key(a, b);
      auto it = midpoint.find(key);
      if (it != midpoint.end()) return it->second;
      const Vec3 m = radius * Vec3(0.5 * (verts[a] + verts[b])).normalized();
      verts.push_back(m);
      const int idx = static_cast<int>(verts.size()) - 1;
      midpoint.emplace(key, idx);
      return idx;
    };
    std::vector<std::array<int, 3>> refined;
    refined.reserve(faces.size() * 4);
    for (const auto& f : faces) {
      const int ab = mid(f[0], f[1]);
      const int bc = mid(f[1], f[2]);
      const int ca = mid(f[2], f[0]);
      refined.push_back({f[0], ab, ca});
      refined.push_back({f[1], bc, ab});
      refined.push_back({f[2], ca, bc});
      refined.push_back({ab, bc, ca});
    }
    faces = std::move(refined);
  }
  return SurfaceMesh(std::move(verts), std::move(faces));
}

SurfaceMesh gen_dumbbell(int n_theta, int n_phi) {
  if (n_theta < 3 || n_phi < 2) {
    throw std::invalid_argument("gen_dumbbell: need n_theta >= 3, n_phi >= 2");
  }
  const double pi = std::acos(-1.0);
  std::vector<Vec3> verts;
  verts.reserve(n_theta * (n_phi - 1) + 2);
  // rings i = 1 .. n_phi-1, then the two poles
  auto ring_vertex = [&](int i, int j) { return (i - 1) * n_theta + j; };
  for (int i = 1; i < n_phi; ++i) {
    const double phi = pi * i / n_phi;
    const double f = 0.6 * std::cos(phi) * std::cos(phi) + 0.4;
    for (int j = 0; j < n_theta; ++j) {
      const double theta = 2.0 * pi * j / n_theta;
      verts.emplace_back(std::cos(phi), f * std::cos(theta) * std::sin(phi),
                         f * std::sin(theta) * std::sin(phi));
    }
  }
  const int north = static_cast<int>(verts.size());
  verts.emplace_back(1.0, 0.0, 0.0);
  const int south = static_cast<int>(verts.size());
  verts.emplace_back(-1.0, 0.0, 0.0);

  std::vector<std::array<int, 3>> faces;
  faces.reserve(2 * n_theta * (n_phi - 1));
  for (int j = 0; j < n_theta; ++j) {
    const int jn = (j + 1) % n_theta;
    faces.push_back({north, ring_vertex(1, j), ring_vertex(1, jn)});
  }
  for (int i = 1; i + 1 < n_phi; ++i) {
    for (int j = 0; j < n_theta; ++j) {
      const int jn = (j + 1) % n_theta;
      const int a = ring_vertex(i, j);
      const int b = ring_vertex(i, jn);
      const int c = ring_vertex(i + 1, jn);
      const int d = ring_vertex(i + 1, j);
      faces.push_back({a, d, c});
      faces.push_back({a, c, b});
    }
  }
  for (int j = 0; j < n_theta; ++j) {
    const int jn = (j + 1) % n_theta;
    faces.push_back({south, ring_vertex(n_phi - 1, jn),
                     ring_vertex(n_phi - 1, j)});
  }
  return SurfaceMesh(std::move(verts), std::move(faces));
}

SurfaceMesh gen_cuboid(double lx, double ly, double lz, double target_h,
                       bool open_bottom) {
  if (lx <= 0.0 || ly <= 0.0 || lz <= 0.0 || target_h <= 0.0) {
    throw std::invalid_argument("gen_cuboid: bad parameters");
  }
  const int nx = std::max(1, static_cast<int>(std::lround(lx / target_h)));
  const int ny = std::max(1, static_cast<int>(std::lround(ly / target_h)));
  const int nz = std::max(1, static_cast<int>(std::lround(lz / target_h)));
  const double x0 = -lx / 2.0;
  const double y0 = -ly / 2.0;
  const double z0 = open_bottom ? 0.0 : -lz / 2.0;

  std::vector<int> lattice((nx + 1) * (ny + 1) * (nz + 1), -1);
  std::vector<Vec3> verts;
  std::vector<std::array<int, 3>> faces;
  auto vertex_at = [&](int i, int j, int k) {
    const int key = i + (nx + 1) * (j + (ny + 1) * k);
    if (lattice[key] < 0) {
      lattice[key] = static_cast<int>(verts.size());
      verts.emplace_back(x0 + lx * i / nx, y0 + ly * j / ny, z0 + lz * k / nz);
    }
    return lattice[key];
  };
  // One wall: origin lattice point o, lattice steps du (nu of them) and dv,
  // with du x dv the outward direction.
  auto emit = [&](std::array<int, 3> o, std::array<int, 3> du, int nu,
                  std::array<int, 3> dv, int nv) {
    auto at = [&](int u, int v) {
      return vertex_at(o[0] + du[0] * u + dv[0] * v,
                       o[1] + du[1] * u + dv[1] * v,
                       o[2] + du[2] * u + dv[2] * v);
    };
    for (int u = 0; u < nu; ++u) {
      for (int v = 0; v < nv; ++v) {
        const int a = at(u, v);
        const int b = at(u + 1, v);
        const int c = at(u + 1, v + 1);
        const int d = at(u, v + 1);
        faces.push_back({a, b, c});
        faces.push_back({a, c, d});
      }
    }
  };
  emit({0, 0, nz}, {1, 0, 0}, nx, {0, 1, 0}, ny);   // top, +z
  if (!open_bottom) {
    emit({0, 0, 0}, {0, 1, 0}, ny, {1, 0, 0}, nx);  // bottom, -z
  }
  emit({nx, 0, 0}, {0, 1, 0}, ny, {0, 0, 1}, nz);   // +x
  emit({0, 0, 0}, {0, 0, 1}, nz, {0, 1, 0}, ny);    // -x
  emit({0, ny, 0}, {0, 0, 1}, nz, {1, 0, 0}, nx);   // +y
  emit({0, 0, 0}, {1, 0, 0}, nx, {0, 0, 1}, nz);    // -y
  return SurfaceMesh(std::move(verts), std::move(faces));
}

}  // namespace geoflow
