#include "geoflow/schemes.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace geoflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<double> coords_of(const SurfaceMesh& mesh) {
  std::vector<double> x(3 * mesh.n_vertices());
  for (int q = 0; q < mesh.n_vertices(); ++q) {
    for (int d = 0; d < 3; ++d) x[3 * q + d] = mesh.vertices()[q][d];
  }
  return x;
}

// Contact-angle factors, snapped so right angles decouple the boundary
// terms exactly rather than through a ~1e-17 cosine.
std::pair<double, double> angle_factors(double theta) {
  double c = std::cos(theta);
  double s = std::sin(theta);
  if (std::abs(c) < 1e-15) c = 0.0;
  if (std::abs(1.0 - s) < 1e-15) s = 1.0;
  return {c, s};
}

// Index map that eliminates the vertical velocity component on the contact
// line: full vector dof 3q+d -> reduced index, -1 for removed dofs.
struct VConstraint {
  std::vector<int> map;
  int size = 0;
};

VConstraint constrained_vmap(const SurfaceMesh& mesh) {
  VConstraint vc;
  vc.map.assign(3 * mesh.n_vertices(), -1);
  for (int q = 0; q < mesh.n_vertices(); ++q) {
    for (int d = 0; d < 3; ++d) {
      if (d == 2 && mesh.on_boundary()[q]) continue;
      vc.map[3 * q + d] = vc.size++;
    }
  }
  return vc;
}

struct SystemBuilder {
  TripletMatrix m;
  std::vector<double> rhs;

  explicit SystemBuilder(int size) : m(size, size), rhs(size, 0.0) {}

  void add_csr(const CsrMatrix& a, double alpha, int roff, int coff,
               const std::vector<int>* rmap = nullptr,
               const std::vector<int>* cmap = nullptr) {
    for (int r = 0; r < a.rows(); ++r) {
      const int rr = rmap ? (*rmap)[r] : r;
      if (rr < 0) continue;
      for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
        const int cc = cmap ? (*cmap)[a.col_idx()[k]] : a.col_idx()[k];
        if (cc < 0) continue;
        m.add(roff + rr, coff + cc, alpha * a.values()[k]);
      }
    }
  }

  // B block: rows are vector dofs 3q+d, column q, value N_q[d].
  void add_lumped_normal(const VectorField& nvec, double alpha, int roff,
                         int coff, const std::vector<int>* rmap = nullptr) {
    for (int q = 0; q < static_cast<int>(nvec.size()); ++q) {
      for (int d = 0; d < 3; ++d) {
        const int rr = rmap ? (*rmap)[3 * q + d] : 3 * q + d;
        if (rr < 0) continue;
        m.add(roff + rr, coff + q, alpha * nvec[q][d]);
      }
    }
  }

  // B^T block: row q, columns are vector dofs.
  void add_lumped_normal_t(const VectorField& nvec, double alpha, int roff,
                           int coff, const std::vector<int>* cmap = nullptr) {
    for (int q = 0; q < static_cast<int>(nvec.size()); ++q) {
      for (int d = 0; d < 3; ++d) {
        const int cc = cmap ? (*cmap)[3 * q + d] : 3 * q + d;
        if (cc < 0) continue;
        m.add(roff + q, coff + cc, alpha * nvec[q][d]);
      }
    }
  }

  void add_diag(const ScalarField& diag, double alpha, int roff, int coff) {
    for (int q = 0; q < static_cast<int>(diag.size()); ++q) {
      m.add(roff + q, coff + q, alpha * diag[q]);
    }
  }

  void add_rhs(const std::vector<double>& v, double alpha, int roff,
               const std::vector<int>* rmap = nullptr) {
    for (int i = 0; i < static_cast<int>(v.size()); ++i) {
      const int rr = rmap ? (*rmap)[i] : i;
      if (rr < 0) continue;
      rhs[roff + rr] += alpha * v[i];
    }
  }
};

// Contraction of the vector boundary rows with the vertex normals: the
// scalar-test boundary terms of the MDR dewetting row.
CsrMatrix contract_rows_with_normals(const CsrMatrix& coupling,
                                     const VectorField& normals) {
  const int n = static_cast<int>(normals.size());
  TripletMatrix out(n, coupling.cols());
  for (int q = 0; q < n; ++q) {
    for (int d = 0; d < 3; ++d) {
      const int r = 3 * q + d;
      if (r >= coupling.rows()) break;
      for (int k = coupling.row_ptr()[r]; k < coupling.row_ptr()[r + 1];
           ++k) {
        out.add(q, coupling.col_idx()[k], normals[q][d] * coupling.values()[k]);
      }
    }
  }
  return CsrMatrix::from_triplets(out);
}

std::vector<double> contract_vec_with_normals(const std::vector<double>& v,
                                              const VectorField& normals) {
  std::vector<double> out(normals.size(), 0.0);
  for (int q = 0; q < static_cast<int>(normals.size()); ++q) {
    for (int d = 0; d < 3; ++d) out[q] += normals[q][d] * v[3 * q + d];
  }
  return out;
}

// Trapezoid boundary mass against e3 . nhat: S_q = (e3 . nhat_q) * half the
// length of the adjacent boundary edges.
std::vector<double> vertical_boundary_term(const SurfaceMesh& mesh) {
  std::vector<double> s(mesh.n_vertices(), 0.0);
  for (const auto& loop : mesh.boundary_loops()) {
    const int m = static_cast<int>(loop.size());
    for (int i = 0; i < m; ++i) {
      const int p = loop[i];
      const int q = loop[(i + 1) % m];
      const double half_len =
          0.5 * (mesh.vertices()[q] - mesh.vertices()[p]).norm();
      s[p] += half_len * mesh.vertex_normals()[p].z();
      s[q] += half_len * mesh.vertex_normals()[q].z();
    }
  }
  return s;
}

CsrMatrix assemble_consistent_vector_mass(const SurfaceMesh& mesh) {
  TripletMatrix m(3 * mesh.n_vertices(), 3 * mesh.n_vertices());
  m.reserve(27 * mesh.n_triangles());
  for (int t = 0; t < mesh.n_triangles(); ++t) {
    const auto& tri = mesh.triangles()[t];
    const double a12 = mesh.face_areas()[t] / 12.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        const double val = a12 * (i == j ? 2.0 : 1.0);
        for (int d = 0; d < 3; ++d) {
          m.add(3 * tri[i] + d, 3 * tri[j] + d, val);
        }
      }
    }
  }
  return CsrMatrix::from_triplets(m);
}

void validate_params(SchemeKind kind, const StepParams& p) {
  if (!(p.tau > 0.0) || !std::isfinite(p.tau)) {
    throw std::invalid_argument("step: tau must be positive and finite");
  }
  if (is_dewetting(kind)) {
    if (!(p.theta > 0.0) || !(p.theta < kPi)) {
      throw std::invalid_argument(
          "step: contact angle must lie strictly between 0 and pi");
    }
  }
}

void require_closed_admissible(const SurfaceMesh& mesh) {
  if (!mesh.closed()) {
    throw AdmissibilityError("scheme requires a closed surface");
  }
  const AdmissibilityReport rep = check_admissible(mesh);
  if (!rep.nondegenerate) {
    throw AdmissibilityError(
        "(A1) violated: triangle " + std::to_string(rep.worst_triangle) +
        " has area " + std::to_string(rep.min_area));
  }
  if (!rep.normals_span) {
    throw AdmissibilityError(
        "(A2) violated: averaged vertex normals are numerically rank "
        "deficient (ratio " +
        std::to_string(rep.normal_rank_ratio) + ")");
  }
}

void require_dewetting_mesh(const SurfaceMesh& mesh) {
  if (mesh.closed()) {
    throw AdmissibilityError("dewetting schemes require a boundary");
  }
  if (mesh.n_triangles() == 0 ||
      mesh.min_face_area() <= mesh.epsilon_area()) {
    throw AdmissibilityError(
        "(A1) violated: triangle " + std::to_string(mesh.min_face_triangle()) +
        " has area " + std::to_string(mesh.min_face_area()));
  }
}

struct Layout {
  int n = 0;
  int size = 0;
  int v_off = 0;
  int v_size = 0;
  int h_off = -1;
  int lambda_off = -1;
  int kappa_off = -1;
  VConstraint vc;  // empty map means unconstrained
  const std::vector<int>* vmap() const { return vc.map.empty() ? nullptr : &vc.map; }
};

Layout make_layout(const SurfaceMesh& mesh, SchemeKind kind) {
  Layout lay;
  const int n = mesh.n_vertices();
  lay.n = n;
  if (is_dewetting(kind)) {
    lay.vc = constrained_vmap(mesh);
    lay.v_size = lay.vc.size;
  } else {
    lay.v_size = 3 * n;
  }
  int off = lay.v_size;
  switch (kind) {
    case SchemeKind::DziukMcf:
    case SchemeKind::BgnMcf:
      break;
    case SchemeKind::MdrMcf:
      lay.kappa_off = off;
      off += n;
      break;
    case SchemeKind::BgnSd:
    case SchemeKind::BgnDewetting:
      lay.h_off = off;
      off += n;
      break;
    case SchemeKind::MdrDewetting:
      lay.h_off = off;
      off += n;
      lay.kappa_off = off;
      off += n;
      break;
    case SchemeKind::DualMdrMcf:
    case SchemeKind::DualMdrSd:
    case SchemeKind::DualMdrDewetting:
      lay.h_off = off;
      off += n;
      lay.lambda_off = off;
      off += lay.v_size;
      lay.kappa_off = off;
      off += n;
      break;
  }
  lay.size = off;
  return lay;
}

AssembledSystem build_system(const SurfaceMesh& mesh, const OperatorSet& ops,
                             SchemeKind kind, const StepParams& p,
                             Layout& lay) {
  lay = make_layout(mesh, kind);
  const int n = lay.n;
  if (is_dewetting(kind) &&
      static_cast<int>(ops.boundary_load.size()) != 3 * n) {
    throw AdmissibilityError(
        "dewetting schemes need boundary terms: the contact line must lie "
        "in the substrate plane z = 0");
  }
  const double tau = p.tau;
  SystemBuilder sys(lay.size);
  const std::vector<double> x = coords_of(mesh);
  const std::vector<double>& a3x = ops.rhs_geometry;
  const std::vector<int>* vmap = lay.vmap();

  const bool dew = is_dewetting(kind);
  double cos_t = 0.0, sin_t = 0.0;
  if (dew) std::tie(cos_t, sin_t) = angle_factors(p.theta);

  switch (kind) {
    case SchemeKind::DziukMcf: {
      sys.add_csr(assemble_consistent_vector_mass(mesh), 1.0, 0, 0);
      sys.add_csr(ops.vector_stiffness, tau, 0, 0);
      sys.add_rhs(a3x, -1.0, 0);
      break;
    }
    case SchemeKind::BgnMcf: {
      // lumped normal pairing M_q (v.nhat)(w.nhat) = (N_q N_q^T / M_q)
      for (int q = 0; q < n; ++q) {
        const Vec3& nq = ops.lumped_normal[q];
        const double mq = ops.lumped_mass[q];
        for (int r = 0; r < 3; ++r) {
          for (int s = 0; s < 3; ++s) {
            sys.m.add(3 * q + r, 3 * q + s, nq[r] * nq[s] / mq);
          }
        }
      }
      sys.add_csr(ops.vector_stiffness, tau, 0, 0);
      sys.add_rhs(a3x, -1.0, 0);
      break;
    }
    case SchemeKind::MdrMcf: {
      const CsrMatrix d = mdr_constraint_row(mesh);
      sys.add_csr(ops.tangential_form, 1.0, 0, 0);
      sys.add_lumped_normal(ops.lumped_normal, -1.0, 0, lay.kappa_off);
      sys.add_lumped_normal_t(ops.lumped_normal, 1.0, 3 * n, 0);
      sys.add_csr(d, tau, 3 * n, 0);
      sys.add_rhs(spmv(d, x), -1.0, 3 * n);
      break;
    }
    case SchemeKind::BgnSd: {
      sys.add_csr(ops.vector_stiffness, tau, 0, 0);
      sys.add_lumped_normal(ops.lumped_normal, -1.0, 0, lay.h_off);
      sys.add_rhs(a3x, -1.0, 0);
      sys.add_lumped_normal_t(ops.lumped_normal, 1.0, lay.h_off, 0);
      sys.add_csr(ops.stiffness, 1.0, lay.h_off, lay.h_off);
      break;
    }
    case SchemeKind::DualMdrMcf:
    case SchemeKind::DualMdrSd: {
      sys.add_csr(ops.vector_stiffness, tau, 0, 0);
      sys.add_lumped_normal(ops.lumped_normal, -1.0, 0, lay.h_off);
      sys.add_csr(ops.tangential_form, -1.0, 0, lay.lambda_off);
      sys.add_rhs(a3x, -1.0, 0);

      sys.add_lumped_normal_t(ops.lumped_normal, 1.0, lay.h_off, 0);
      if (kind == SchemeKind::DualMdrMcf) {
        sys.add_diag(ops.lumped_mass, 1.0, lay.h_off, lay.h_off);
      } else {
        sys.add_csr(ops.stiffness, 1.0, lay.h_off, lay.h_off);
      }

      const int c_off = lay.lambda_off;  // row block of the kappa equation
      sys.add_csr(ops.tangential_form, 1.0, c_off, 0);
      sys.add_lumped_normal(ops.lumped_normal, -1.0, c_off, lay.kappa_off);

      sys.add_lumped_normal_t(ops.lumped_normal, 1.0, lay.kappa_off,
                              lay.lambda_off);
      break;
    }
    case SchemeKind::BgnDewetting: {
      sys.add_csr(ops.vector_stiffness, tau, 0, 0, vmap, vmap);
      sys.add_csr(ops.boundary_coupling, -tau * cos_t / 2.0, 0, 0, vmap, vmap);
      sys.add_lumped_normal(ops.lumped_normal, -1.0, 0, lay.h_off, vmap);
      sys.add_rhs(a3x, -1.0, 0, vmap);
      sys.add_rhs(ops.boundary_load, cos_t, 0, vmap);

      sys.add_lumped_normal_t(ops.lumped_normal, 1.0, lay.h_off, 0,
                              vmap);
      sys.add_csr(ops.stiffness, 1.0, lay.h_off, lay.h_off);
      break;
    }
    case SchemeKind::DualMdrDewetting: {
      sys.add_csr(ops.vector_stiffness, tau, 0, 0, vmap, vmap);
      sys.add_csr(ops.boundary_coupling, -tau * cos_t / 2.0, 0, 0, vmap, vmap);
      sys.add_lumped_normal(ops.lumped_normal, -1.0, 0, lay.h_off, vmap);
      sys.add_csr(ops.tangential_form, -1.0, 0, lay.lambda_off, vmap, vmap);
      sys.add_rhs(a3x, -1.0, 0, vmap);
      sys.add_rhs(ops.boundary_load, cos_t, 0, vmap);

      sys.add_lumped_normal_t(ops.lumped_normal, 1.0, lay.h_off, 0, vmap);
      sys.add_csr(ops.stiffness, 1.0, lay.h_off, lay.h_off);

      const int c_off = lay.lambda_off;
      sys.add_csr(ops.tangential_form, 1.0, c_off, 0, vmap, vmap);
      sys.add_lumped_normal(ops.lumped_normal, -1.0, c_off, lay.kappa_off,
                            vmap);

      sys.add_lumped_normal_t(ops.lumped_normal, 1.0, lay.kappa_off,
                              lay.lambda_off, vmap);
      break;
    }
    case SchemeKind::MdrDewetting: {
      const CsrMatrix d = mdr_constraint_row(mesh);
      const CsrMatrix c_n =
          contract_rows_with_normals(ops.boundary_coupling,
                                     mesh.vertex_normals());
      const std::vector<double> l_n =
          contract_vec_with_normals(ops.boundary_load, mesh.vertex_normals());
      const std::vector<double> s_vert = vertical_boundary_term(mesh);

      // curvature row, scalar tests
      sys.add_csr(d, tau, 0, 0, nullptr, vmap);
      sys.add_csr(c_n, -tau * cos_t / 2.0, 0, 0, nullptr, vmap);
      sys.add_diag(ops.lumped_mass, -1.0, 0, lay.h_off);
      sys.add_rhs(spmv(d, x), -1.0, 0);
      sys.add_rhs(l_n, cos_t, 0);
      sys.add_rhs(s_vert, -sin_t, 0);

      // velocity law
      sys.add_lumped_normal_t(ops.lumped_normal, 1.0, n, 0, vmap);
      sys.add_csr(ops.stiffness, 1.0, n, lay.h_off);

      // tangential constraint
      sys.add_csr(ops.tangential_form, 1.0, 2 * n, 0, vmap, vmap);
      sys.add_lumped_normal(ops.lumped_normal, -1.0, 2 * n, lay.kappa_off,
                            vmap);
      break;
    }
  }
  return {CsrMatrix::from_triplets(sys.m), std::move(sys.rhs)};
}

StepSolution solve_and_scatter(const SurfaceMesh& mesh, const OperatorSet& ops,
                               SchemeKind kind, const StepParams& p) {
  validate_params(kind, p);
  if (is_dewetting(kind)) {
    require_dewetting_mesh(mesh);
  } else {
    require_closed_admissible(mesh);
  }

  Layout lay;
  AssembledSystem system = build_system(mesh, ops, kind, p, lay);

  StepSolution sol;
  std::vector<double> u;
  sol.report = solve(system.matrix, system.rhs, u, p.solver);

  const int n = lay.n;
  sol.v.assign(n, Vec3::Zero());
  const std::vector<int>* vmap = lay.vmap();
  for (int q = 0; q < n; ++q) {
    for (int d = 0; d < 3; ++d) {
      const int idx = vmap ? (*vmap)[3 * q + d] : 3 * q + d;
      if (idx >= 0) sol.v[q][d] = u[lay.v_off + idx];
    }
  }
  if (lay.h_off >= 0) {
    sol.H.assign(u.begin() + lay.h_off, u.begin() + lay.h_off + n);
  }
  if (lay.lambda_off >= 0) {
    sol.lambda.assign(n, Vec3::Zero());
    for (int q = 0; q < n; ++q) {
      for (int d = 0; d < 3; ++d) {
        const int idx = vmap ? (*vmap)[3 * q + d] : 3 * q + d;
        if (idx >= 0) sol.lambda[q][d] = u[lay.lambda_off + idx];
      }
    }
  }
  if (lay.kappa_off >= 0) {
    sol.kappa.assign(u.begin() + lay.kappa_off,
                     u.begin() + lay.kappa_off + n);
  }
  return sol;
}

}  // namespace

bool is_dewetting(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::MdrDewetting:
    case SchemeKind::DualMdrDewetting:
    case SchemeKind::BgnDewetting:
      return true;
    default:
      return false;
  }
}

bool is_surface_diffusion(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::BgnSd:
    case SchemeKind::DualMdrSd:
    case SchemeKind::MdrDewetting:
    case SchemeKind::DualMdrDewetting:
    case SchemeKind::BgnDewetting:
      return true;
    default:
      return false;
  }
}

const char* scheme_name(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::DziukMcf: return "dziuk_mcf";
    case SchemeKind::BgnMcf: return "bgn_mcf";
    case SchemeKind::MdrMcf: return "mdr_mcf";
    case SchemeKind::DualMdrMcf: return "dual_mdr_mcf";
    case SchemeKind::BgnSd: return "bgn_sd";
    case SchemeKind::DualMdrSd: return "dual_mdr_sd";
    case SchemeKind::MdrDewetting: return "mdr_dewetting";
    case SchemeKind::DualMdrDewetting: return "dual_mdr_dewetting";
    case SchemeKind::BgnDewetting: return "bgn_dewetting";
  }
  return "unknown";
}

AssembledSystem build_scheme_system(const SurfaceMesh& mesh,
                                    const OperatorSet& ops, SchemeKind kind,
                                    const StepParams& params) {
  validate_params(kind, params);
  Layout lay;
  return build_system(mesh, ops, kind, params, lay);
}

StepSolution take_step(const SurfaceMesh& mesh, SchemeKind kind,
                       const StepParams& params) {
  const OperatorSet ops = assemble_operators(mesh, params.form);
  return solve_and_scatter(mesh, ops, kind, params);
}

StepSolution take_step(const SurfaceMesh& mesh, const OperatorSet& ops,
                       SchemeKind kind, const StepParams& params) {
  return solve_and_scatter(mesh, ops, kind, params);
}

StepSolution step_dziuk_mcf(const SurfaceMesh& mesh, const StepParams& p) {
  return take_step(mesh, SchemeKind::DziukMcf, p);
}
StepSolution step_bgn_mcf(const SurfaceMesh& mesh, const StepParams& p) {
  return take_step(mesh, SchemeKind::BgnMcf, p);
}
StepSolution step_mdr_mcf(const SurfaceMesh& mesh, const StepParams& p) {
  return take_step(mesh, SchemeKind::MdrMcf, p);
}
StepSolution step_dual_mdr_mcf(const SurfaceMesh& mesh, const StepParams& p) {
  return take_step(mesh, SchemeKind::DualMdrMcf, p);
}
StepSolution step_bgn_sd(const SurfaceMesh& mesh, const StepParams& p) {
  return take_step(mesh, SchemeKind::BgnSd, p);
}
StepSolution step_dual_mdr_sd(const SurfaceMesh& mesh, const StepParams& p) {
  return take_step(mesh, SchemeKind::DualMdrSd, p);
}
StepSolution step_mdr_dewetting(const SurfaceMesh& mesh, const StepParams& p) {
  return take_step(mesh, SchemeKind::MdrDewetting, p);
}
StepSolution step_dual_mdr_dewetting(const SurfaceMesh& mesh,
                                     const StepParams& p) {
  return take_step(mesh, SchemeKind::DualMdrDewetting, p);
}
StepSolution step_bgn_dewetting(const SurfaceMesh& mesh, const StepParams& p) {
  return take_step(mesh, SchemeKind::BgnDewetting, p);
}

}  // namespace geoflow
