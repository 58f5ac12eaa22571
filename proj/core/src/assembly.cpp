#include "geoflow/assembly.hpp"

#include <cmath>
#include <stdexcept>

namespace geoflow {

namespace {

// In-plane P1 shape gradients of a counterclockwise triangle:
// grad phi_0 = n x (c - b) / (2A), cyclic.
struct ElementGradients {
  Vec3 g[3];
};

ElementGradients shape_gradients(const Vec3& a, const Vec3& b, const Vec3& c,
                                 const Vec3& n, double area) {
  ElementGradients e;
  const double inv = 1.0 / (2.0 * area);
  e.g[0] = n.cross(c - b) * inv;
  e.g[1] = n.cross(a - c) * inv;
  e.g[2] = n.cross(b - a) * inv;
  return e;
}

// (q - p) x e3
Vec3 cross_e3(const Vec3& a) { return Vec3(a.y(), -a.x(), 0.0); }

void require_boundary_in_plane(const SurfaceMesh& mesh) {
  const double scale =
      std::max(1.0, (mesh.bbox_max() - mesh.bbox_min()).norm());
  for (const auto& loop : mesh.boundary_loops()) {
    for (int v : loop) {
      if (std::abs(mesh.vertices()[v].z()) > 1e-12 * scale) {
        throw std::invalid_argument(
            "boundary_conormal_terms: boundary vertex " + std::to_string(v) +
            " off the substrate plane z = 0");
      }
    }
  }
}

bool boundary_in_plane(const SurfaceMesh& mesh) {
  const double scale =
      std::max(1.0, (mesh.bbox_max() - mesh.bbox_min()).norm());
  for (const auto& loop : mesh.boundary_loops()) {
    for (int v : loop) {
      if (std::abs(mesh.vertices()[v].z()) > 1e-12 * scale) return false;
    }
  }
  return true;
}

}  // namespace

OperatorSet assemble_operators(const SurfaceMesh& mesh, TangentialForm form) {
  const int n = mesh.n_vertices();
  OperatorSet ops;
  ops.lumped_mass.assign(n, 0.0);
  ops.lumped_normal.assign(n, Vec3::Zero());
  ops.bgn_normal_blocks.assign(n, Mat3::Zero());

  TripletMatrix stiff(n, n);
  stiff.reserve(9 * mesh.n_triangles());
  TripletMatrix vstiff(3 * n, 3 * n);
  vstiff.reserve(27 * mesh.n_triangles());
  TripletMatrix gform(3 * n, 3 * n);
  if (form == TangentialForm::SymmetricGradient) {
    gform.reserve(81 * mesh.n_triangles());
  }

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double area = mesh.face_areas()[t];
    const Vec3& nrm = mesh.face_normals()[t];
    if (area <= 0.0) {
      throw AdmissibilityError("assemble_operators: degenerate triangle " +
                               std::to_string(t));
    }
    const ElementGradients e = shape_gradients(
        mesh.vertices()[tri[0]], mesh.vertices()[tri[1]],
        mesh.vertices()[tri[2]], nrm, area);

    const double third = area / 3.0;
    for (int j = 0; j < 3; ++j) {
      ops.lumped_mass[tri[j]] += third;
      ops.lumped_normal[tri[j]] += third * nrm;
      ops.bgn_normal_blocks[tri[j]] += third * nrm * nrm.transpose();
    }

    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double kij = area * e.g[i].dot(e.g[j]);
        stiff.add(tri[i], tri[j], kij);
        for (int d = 0; d < 3; ++d) {
          vstiff.add(3 * tri[i] + d, 3 * tri[j] + d, kij);
        }
      }
    }

    if (form == TangentialForm::SymmetricGradient) {
      const Mat3 p = Mat3::Identity() - nrm * nrm.transpose();
      for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
          const double gij = e.g[i].dot(e.g[j]);
          for (int r = 0; r < 3; ++r) {
            for (int s = 0; s < 3; ++s) {
              const double val = area * (gij * p(r, s) + e.g[j][r] * e.g[i][s]);
              gform.add(3 * tri[i] + r, 3 * tri[j] + s, val);
            }
          }
        }
      }
    }
  }

  ops.stiffness = CsrMatrix::from_triplets(stiff);
  ops.vector_stiffness = CsrMatrix::from_triplets(vstiff);
  ops.tangential_form = form == TangentialForm::SymmetricGradient
                            ? CsrMatrix::from_triplets(gform)
                            : ops.vector_stiffness;

  std::vector<double> coords(3 * n);
  for (int q = 0; q < n; ++q) {
    for (int d = 0; d < 3; ++d) coords[3 * q + d] = mesh.vertices()[q][d];
  }
  ops.rhs_geometry = spmv(ops.vector_stiffness, coords);

  if (!mesh.closed() && boundary_in_plane(mesh)) {
    auto [load, coupling] = boundary_conormal_terms(mesh);
    ops.boundary_load = std::move(load);
    ops.boundary_coupling = std::move(coupling);
  }
  return ops;
}

double mass_lumped_integral(
    const SurfaceMesh& mesh, const std::function<double(int, int)>& integrand) {
  double acc = 0.0;
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const double third = mesh.face_areas()[t] / 3.0;
    for (int j = 0; j < 3; ++j) acc += third * integrand(t, j);
  }
  return acc;
}

CsrMatrix mdr_constraint_row(const SurfaceMesh& mesh) {
  const int n = mesh.n_vertices();
  TripletMatrix d(n, 3 * n);
  d.reserve(27 * mesh.n_triangles());
  const VectorField& nv = mesh.vertex_normals();

  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double area = mesh.face_areas()[t];
    if (area <= 0.0) {
      throw AdmissibilityError("mdr_constraint_row: degenerate triangle " +
                               std::to_string(t));
    }
    const ElementGradients e = shape_gradients(
        mesh.vertices()[tri[0]], mesh.vertices()[tri[1]],
        mesh.vertices()[tri[2]], mesh.face_normals()[t], area);
    const Vec3 ncentroid =
        (nv[tri[0]] + nv[tri[1]] + nv[tri[2]]) / 3.0;
    for (int s = 0; s < 3; ++s) {
      // int_K grad((phi_q nhat)_s) = A [ nhat_s(centroid) g_q
      //                                  + (1/3) sum_k nhat_k[s] g_k ]
      const Vec3 gsum = nv[tri[0]][s] * e.g[0] + nv[tri[1]][s] * e.g[1] +
                        nv[tri[2]][s] * e.g[2];
      for (int q = 0; q < 3; ++q) {
        const Vec3 w = ncentroid[s] * e.g[q] + gsum / 3.0;
        for (int j = 0; j < 3; ++j) {
          d.add(tri[q], 3 * tri[j] + s, area * e.g[j].dot(w));
        }
      }
    }
  }
  return CsrMatrix::from_triplets(d);
}

std::pair<std::vector<double>, CsrMatrix> boundary_conormal_terms(
    const SurfaceMesh& mesh) {
  const int n = mesh.n_vertices();
  std::vector<double> load(3 * n, 0.0);
  TripletMatrix coupling(3 * n, 3 * n);
  if (mesh.closed()) {
    return {std::move(load), CsrMatrix::from_triplets(coupling)};
  }
  require_boundary_in_plane(mesh);

  for (const auto& loop : mesh.boundary_loops()) {
    const int m = static_cast<int>(loop.size());
    for (int i = 0; i < m; ++i) {
      const int p = loop[i];
      const int q = loop[(i + 1) % m];
      const Vec3 half_edge =
          0.5 * cross_e3(mesh.vertices()[q] - mesh.vertices()[p]);
      for (int d = 0; d < 3; ++d) {
        load[3 * p + d] += half_edge[d];
        load[3 * q + d] += half_edge[d];
      }
      // ((v_q - v_p) x e3) . (w_p + w_q) / 2 expands to +-E/2 blocks with
      // E a = a x e3; E[0][1] = 1, E[1][0] = -1.
      for (int a : {p, q}) {
        coupling.add(3 * a + 0, 3 * q + 1, 0.5);
        coupling.add(3 * a + 1, 3 * q + 0, -0.5);
        coupling.add(3 * a + 0, 3 * p + 1, -0.5);
        coupling.add(3 * a + 1, 3 * p + 0, 0.5);
      }
    }
  }
  return {std::move(load), CsrMatrix::from_triplets(coupling)};
}

double substrate_area(const std::vector<Vec3>& loop) {
  double s = 0.0;
  const std::size_t m = loop.size();
  for (std::size_t i = 0; i < m; ++i) {
    const Vec3& p = loop[i];
    const Vec3& q = loop[(i + 1) % m];
    s += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * s;
}

double substrate_area(const SurfaceMesh& mesh) {
  double s = 0.0;
  for (const auto& loop : mesh.boundary_loops()) {
    std::vector<Vec3> pts;
    pts.reserve(loop.size());
    for (int v : loop) pts.push_back(mesh.vertices()[v]);
    s += substrate_area(pts);
  }
  return s;
}

}  // namespace geoflow
