#include "geoflow/verify.hpp"

#include <chrono>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "geoflow/diagnostics.hpp"
#include "geoflow/flow.hpp"
#include "geoflow/mesh_io.hpp"
#include "geoflow/schemes.hpp"

namespace geoflow {

namespace {

constexpr double kPi = 3.14159265358979323846;

struct CaseBuilder {
  std::ostringstream detail;
  bool passed = true;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      passed = false;
      if (detail.tellp() > 0) detail << "; ";
      detail << what;
    }
  }
};

StepSolution step_with(const SurfaceMesh& mesh, SchemeKind kind,
                       const StepParams& p, const OperatorMutation& mutate) {
  OperatorSet ops = assemble_operators(mesh, p.form);
  if (mutate) mutate(ops);
  return take_step(mesh, ops, kind, p);
}

SurfaceMesh advance(const SurfaceMesh& mesh, const StepSolution& sol,
                    double tau) {
  VectorField disp(sol.v.size());
  for (size_t q = 0; q < sol.v.size(); ++q) disp[q] = tau * sol.v[q];
  return update_positions(mesh, disp).mesh;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

std::vector<double> flatten(const VectorField& v) {
  std::vector<double> out(3 * v.size());
  for (size_t q = 0; q < v.size(); ++q) {
    for (int d = 0; d < 3; ++d) out[3 * q + d] = v[q][d];
  }
  return out;
}

// ---- individual checks ----

VerifyCase check_icosphere_integrity(const OperatorMutation&) {
  CaseBuilder cb;
  double prev_area = 0.0;
  for (int s = 0; s <= 2; ++s) {
    const SurfaceMesh m = gen_icosphere(s);
    const int expect_v = 10 * (1 << (2 * s)) + 2;
    const int expect_f = 20 * (1 << (2 * s));
    cb.require(m.n_vertices() == expect_v, "vertex count s=" +
                                               std::to_string(s));
    cb.require(m.n_triangles() == expect_f, "face count s=" +
                                                std::to_string(s));
    cb.require(m.closed(), "closed s=" + std::to_string(s));
    for (int t = 0; t < m.n_triangles(); ++t) {
      const auto& tri = m.triangles()[t];
      const Vec3 c = (m.vertices()[tri[0]] + m.vertices()[tri[1]] +
                      m.vertices()[tri[2]]) /
                     3.0;
      if (c.dot(m.face_normals()[t]) <= 0.0) {
        cb.require(false, "outward normal s=" + std::to_string(s));
        break;
      }
    }
    // inscribed polyhedron: area increases with level toward 4 pi
    cb.require(m.area() < 4.0 * kPi, "area below sphere s=" +
                                         std::to_string(s));
    cb.require(m.area() > prev_area, "area grows with level s=" +
                                         std::to_string(s));
    prev_area = m.area();
  }
  const double rel = std::abs(prev_area - 4.0 * kPi) / (4.0 * kPi);
  cb.require(rel < 0.02, "s=2 area within 2% of sphere");
  return {"icosphere_integrity", cb.passed, cb.detail.str(), 0.0};
}

VerifyCase check_mcf_area_monotone(const OperatorMutation& mutate) {
  CaseBuilder cb;
  const SchemeKind kinds[] = {SchemeKind::DziukMcf, SchemeKind::BgnMcf,
                              SchemeKind::MdrMcf, SchemeKind::DualMdrMcf};
  for (SchemeKind kind : kinds) {
    SurfaceMesh mesh = gen_icosphere(2);
    StepParams p;
    p.tau = 2e-3;
    double area = mesh.area();
    for (int m = 0; m < 10; ++m) {
      const StepSolution sol = step_with(mesh, kind, p, mutate);
      if (sol.report.singular) {
        cb.require(false, std::string(scheme_name(kind)) + ": singular step");
        break;
      }
      mesh = advance(mesh, sol, p.tau);
      cb.require(mesh.area() < area,
                 std::string(scheme_name(kind)) + ": area not decreasing");
      area = mesh.area();
    }
  }
  return {"mcf_area_monotone", cb.passed, cb.detail.str(), 0.0};
}

VerifyCase check_mcf_sphere_radius(const OperatorMutation& mutate) {
  CaseBuilder cb;
  SurfaceMesh mesh = gen_icosphere(2);
  StepParams p;
  p.tau = 2e-3;
  for (int m = 1; m <= 25; ++m) {
    const StepSolution sol = step_with(mesh, SchemeKind::DualMdrMcf, p,
                                       mutate);
    cb.require(!sol.report.singular, "singular step");
    if (sol.report.singular) break;
    mesh = advance(mesh, sol, p.tau);
  }
  if (cb.passed) {
    const double err = sphere_error(mesh, 25 * p.tau);
    cb.require(err < 0.05, "radius error " + std::to_string(err));
  }
  return {"mcf_sphere_radius", cb.passed, cb.detail.str(), 0.0};
}

VerifyCase check_sd_volume_flux(const OperatorMutation& mutate) {
  CaseBuilder cb;
  for (SchemeKind kind : {SchemeKind::BgnSd, SchemeKind::DualMdrSd}) {
    const SurfaceMesh mesh = gen_icosphere(2);
    OperatorSet ops = assemble_operators(mesh);
    if (mutate) mutate(ops);
    StepParams p;
    p.tau = 1e-3;
    const StepSolution sol = take_step(mesh, ops, kind, p);
    cb.require(!sol.report.singular,
               std::string(scheme_name(kind)) + ": singular");
    double flux = 0.0;
    for (int q = 0; q < mesh.n_vertices(); ++q) {
      flux += ops.lumped_normal[q].dot(sol.v[q]);
    }
    cb.require(std::abs(flux) < 1e-8,
               std::string(scheme_name(kind)) + ": lumped volume flux " +
                   std::to_string(flux));
  }
  return {"sd_volume_flux", cb.passed, cb.detail.str(), 0.0};
}

VerifyCase check_sd_area_monotone(const OperatorMutation& mutate) {
  CaseBuilder cb;
  for (SchemeKind kind : {SchemeKind::BgnSd, SchemeKind::DualMdrSd}) {
    SurfaceMesh mesh = gen_icosphere(2);
    StepParams p;
    p.tau = 1e-3;
    double area = mesh.area();
    for (int m = 0; m < 10; ++m) {
      const StepSolution sol = step_with(mesh, kind, p, mutate);
      if (sol.report.singular) {
        cb.require(false, std::string(scheme_name(kind)) + ": singular step");
        break;
      }
      mesh = advance(mesh, sol, p.tau);
      cb.require(mesh.area() <= area + 1e-9 * area,
                 std::string(scheme_name(kind)) + ": area increased");
      area = mesh.area();
    }
  }
  return {"sd_area_monotone", cb.passed, cb.detail.str(), 0.0};
}

VerifyCase check_dual_multiplier(const OperatorMutation& mutate) {
  CaseBuilder cb;
  const SurfaceMesh mesh = gen_icosphere(2);
  OperatorSet ops = assemble_operators(mesh);
  if (mutate) mutate(ops);
  StepParams p;
  p.tau = 1e-3;
  const StepSolution sol = take_step(mesh, ops, SchemeKind::DualMdrMcf, p);
  cb.require(!sol.report.singular, "singular");
  // row (d) of the dual system: the multiplier must be discretely tangent
  double bt_lambda = 0.0;
  for (int q = 0; q < mesh.n_vertices(); ++q) {
    bt_lambda =
        std::max(bt_lambda, std::abs(ops.lumped_normal[q].dot(sol.lambda[q])));
  }
  cb.require(bt_lambda < 1e-8, "B^T lambda = " + std::to_string(bt_lambda));
  cb.require(!sol.H.empty() && !sol.kappa.empty(), "dual fields present");
  return {"dual_multiplier_tangent", cb.passed, cb.detail.str(), 0.0};
}

VerifyCase check_mdr_constraint(const OperatorMutation& mutate) {
  CaseBuilder cb;
  const SurfaceMesh mesh = gen_icosphere(2);
  OperatorSet ops = assemble_operators(mesh);
  if (mutate) mutate(ops);
  StepParams p;
  p.tau = 1e-3;
  const StepSolution sol = take_step(mesh, ops, SchemeKind::MdrMcf, p);
  cb.require(!sol.report.singular, "singular");
  // row (a): G v = B kappa
  const std::vector<double> gv = spmv(ops.tangential_form, flatten(sol.v));
  double resid = 0.0;
  for (int q = 0; q < mesh.n_vertices(); ++q) {
    for (int d = 0; d < 3; ++d) {
      resid = std::max(resid, std::abs(gv[3 * q + d] -
                                       ops.lumped_normal[q][d] *
                                           sol.kappa[q]));
    }
  }
  cb.require(resid < 1e-8, "constraint residual " + std::to_string(resid));
  return {"mdr_constraint", cb.passed, cb.detail.str(), 0.0};
}

VerifyCase check_dewetting_energy(const OperatorMutation& mutate) {
  CaseBuilder cb;
  const double theta = 120.0 * kPi / 180.0;
  for (SchemeKind kind :
       {SchemeKind::DualMdrDewetting, SchemeKind::BgnDewetting,
        SchemeKind::MdrDewetting}) {
    SurfaceMesh mesh = gen_cuboid(1.0, 2.0, 1.0, 0.25, true);
    StepParams p;
    p.tau = 1e-3;
    p.theta = theta;
    double energy = dewetting_energy(mesh, theta);
    for (int m = 0; m < 10; ++m) {
      const StepSolution sol = step_with(mesh, kind, p, mutate);
      if (sol.report.singular) {
        cb.require(false, std::string(scheme_name(kind)) + ": singular step");
        break;
      }
      for (int q = 0; q < mesh.n_vertices(); ++q) {
        if (mesh.on_boundary()[q] && sol.v[q].z() != 0.0) {
          cb.require(false,
                     std::string(scheme_name(kind)) + ": contact line left "
                                                      "the substrate");
        }
      }
      mesh = advance(mesh, sol, p.tau);
      const double e_new = dewetting_energy(mesh, theta);
      cb.require(e_new < energy + 1e-12,
                 std::string(scheme_name(kind)) + ": energy increased");
      energy = e_new;
    }
  }
  return {"dewetting_energy_monotone", cb.passed, cb.detail.str(), 0.0};
}

VerifyCase check_substrate_identity(const OperatorMutation& mutate) {
  CaseBuilder cb;
  SurfaceMesh mesh = gen_cuboid(1.0, 2.0, 1.0, 0.25, true);
  StepParams p;
  p.tau = 1e-3;
  p.theta = 120.0 * kPi / 180.0;
  for (int m = 0; m < 10; ++m) {
    OperatorSet ops = assemble_operators(mesh, p.form);
    if (mutate) mutate(ops);
    const StepSolution sol =
        take_step(mesh, ops, SchemeKind::DualMdrDewetting, p);
    if (sol.report.singular) {
      cb.require(false, "singular step");
      break;
    }
    const double s_old = substrate_area(mesh);
    const std::vector<double> vf = flatten(sol.v);
    const double predicted =
        p.tau * dot(ops.boundary_load, vf) +
        0.5 * p.tau * p.tau * dot(vf, spmv(ops.boundary_coupling, vf));
    mesh = advance(mesh, sol, p.tau);
    const double s_new = substrate_area(mesh);
    const double err = std::abs(s_new - s_old - predicted);
    cb.require(err < 1e-10 * std::max(1.0, s_old),
               "substrate identity residual " + std::to_string(err));
  }
  return {"substrate_identity", cb.passed, cb.detail.str(), 0.0};
}

VerifyCase check_solver_crosscheck(const OperatorMutation& mutate) {
  CaseBuilder cb;
  const SurfaceMesh mesh = gen_icosphere(1);
  OperatorSet ops = assemble_operators(mesh);
  if (mutate) mutate(ops);
  StepParams direct;
  direct.tau = 1e-3;
  StepParams gmres = direct;
  gmres.solver.method = SolveMethod::Gmres;
  gmres.solver.tol = 1e-12;
  const StepSolution a = take_step(mesh, ops, SchemeKind::BgnMcf, direct);
  const StepSolution b = take_step(mesh, ops, SchemeKind::BgnMcf, gmres);
  cb.require(!a.report.singular && !b.report.singular, "singular");
  double diff = 0.0;
  for (int q = 0; q < mesh.n_vertices(); ++q) {
    diff = std::max(diff, (a.v[q] - b.v[q]).cwiseAbs().maxCoeff());
  }
  cb.require(diff < 1e-6, "direct/gmres disagreement " + std::to_string(diff));
  return {"solver_crosscheck", cb.passed, cb.detail.str(), 0.0};
}

// ---- full-suite extras ----

VerifyCase check_generator_integrity(const OperatorMutation&) {
  CaseBuilder cb;
  {
    const SurfaceMesh m = gen_dumbbell(12, 13);
    cb.require(m.n_vertices() == 12 * 12 + 2, "dumbbell vertex count");
    cb.require(m.n_triangles() == 2 * 12 * 12, "dumbbell face count");
    cb.require(m.closed(), "dumbbell closed");
  }
  {
    const SurfaceMesh m = gen_cuboid(1.0, 1.0, 1.0, 0.5);
    cb.require(m.closed(), "closed cuboid");
    cb.require(std::abs(m.area() - 6.0) < 1e-12, "unit cube area");
  }
  {
    const SurfaceMesh m = gen_cuboid(1.0, 6.0, 1.0, 0.25, true);
    cb.require(!m.closed(), "open cuboid has boundary");
    cb.require(m.boundary_loops().size() == 1, "single boundary loop");
    cb.require(std::abs(substrate_area(m) - 6.0) < 1e-12, "footprint area");
    const double w = m.area() -
                     std::cos(120.0 * kPi / 180.0) * substrate_area(m);
    cb.require(std::abs(w - 23.0) < 1e-12, "initial energy 23");
  }
  return {"generator_integrity", cb.passed, cb.detail.str(), 0.0};
}

VerifyCase check_mesh_io_roundtrip(const OperatorMutation&) {
  CaseBuilder cb;
  const SurfaceMesh m = gen_icosphere(1);
  // .vtk is write-only; the loadable formats must round-trip exactly
  for (const char* ext : {".off", ".obj"}) {
    const std::string path =
        std::string("/tmp/geoflow_verify_roundtrip") + ext;
    save_mesh(m, path);
    const SurfaceMesh back = load_mesh(path);
    cb.require(back.n_vertices() == m.n_vertices(),
               std::string(ext) + ": vertex count");
    cb.require(back.n_triangles() == m.n_triangles(),
               std::string(ext) + ": face count");
    double diff = 0.0;
    for (int q = 0; q < m.n_vertices(); ++q) {
      diff = std::max(
          diff, (back.vertices()[q] - m.vertices()[q]).cwiseAbs().maxCoeff());
    }
    cb.require(diff == 0.0, std::string(ext) + ": coordinates changed");
    std::remove(path.c_str());
  }
  return {"mesh_io_roundtrip", cb.passed, cb.detail.str(), 0.0};
}

VerifyCase check_refinement_error_decrease(const OperatorMutation& mutate) {
  CaseBuilder cb;
  std::vector<double> errors;
  for (int s : {1, 2, 3}) {
    SurfaceMesh mesh = gen_icosphere(s);
    StepParams p;
    p.tau = 1e-3;
    for (int m = 1; m <= 10; ++m) {
      const StepSolution sol = step_with(mesh, SchemeKind::DualMdrMcf, p,
                                         mutate);
      if (sol.report.singular) {
        cb.require(false, "singular step");
        break;
      }
      mesh = advance(mesh, sol, p.tau);
    }
    errors.push_back(sphere_error(mesh, 10 * 1e-3));
  }
  cb.require(errors.size() == 3 && errors[1] < errors[0] &&
                 errors[2] < errors[1],
             "sphere error not decreasing under refinement");
  return {"refinement_error_decrease", cb.passed, cb.detail.str(), 0.0};
}

VerifyCase check_sd_pinch(const OperatorMutation&) {
  CaseBuilder cb;
  FlowConfig cfg;
  cfg.kind = SchemeKind::DualMdrSd;
  cfg.params.tau = 1e-3;
  cfg.t_end = 0.6;
  cfg.pinch.neck_detection = true;
  const FlowResult res = run_flow(gen_cuboid(1.0, 1.0, 8.0, 0.3), cfg);
  cb.require(res.status == FlowStatus::PinchOff,
             std::string("status ") + flow_status_name(res.status));
  cb.require(res.pinch.has_value() && res.time > 0.1,
             "pinch event in a plausible window, t=" +
                 std::to_string(res.time));
  return {"sd_pinch", cb.passed, cb.detail.str(), 0.0};
}

VerifyCase check_gmres_stepping(const OperatorMutation& mutate) {
  CaseBuilder cb;
  const SurfaceMesh mesh = gen_icosphere(2);
  OperatorSet ops = assemble_operators(mesh);
  if (mutate) mutate(ops);
  StepParams p;
  p.tau = 1e-3;
  p.solver.method = SolveMethod::Gmres;
  p.solver.tol = 1e-10;
  for (SchemeKind kind : {SchemeKind::BgnMcf, SchemeKind::BgnSd}) {
    const StepSolution sol = take_step(mesh, ops, kind, p);
    cb.require(!sol.report.singular,
               std::string(scheme_name(kind)) + ": gmres failed");
    cb.require(sol.report.residual < 1e-8,
               std::string(scheme_name(kind)) + ": residual " +
                   std::to_string(sol.report.residual));
  }
  return {"gmres_stepping", cb.passed, cb.detail.str(), 0.0};
}

using CheckFn = VerifyCase (*)(const OperatorMutation&);

struct NamedCheck {
  const char* name;
  CheckFn fn;
};

VerifyCase timed(const NamedCheck& check, const OperatorMutation& mutate) {
  const auto t0 = std::chrono::steady_clock::now();
  VerifyCase c;
  try {
    c = check.fn(mutate);
  } catch (const std::exception& e) {
    c.name = check.name;
    c.passed = false;
    c.detail = std::string("exception: ") + e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                            t0)
                  .count();
  return c;
}

}  // namespace

VerifyReport run_verify_suite(const std::string& suite,
                              const OperatorMutation& mutate) {
  if (suite != "fast" && suite != "full") {
    throw std::invalid_argument("unknown verify suite: " + suite);
  }
  static const NamedCheck fast_checks[] = {
      {"icosphere_integrity", check_icosphere_integrity},
      {"mcf_area_monotone", check_mcf_area_monotone},
      {"mcf_sphere_radius", check_mcf_sphere_radius},
      {"sd_volume_flux", check_sd_volume_flux},
      {"sd_area_monotone", check_sd_area_monotone},
      {"dual_multiplier_tangent", check_dual_multiplier},
      {"mdr_constraint", check_mdr_constraint},
      {"dewetting_energy_monotone", check_dewetting_energy},
      {"substrate_identity", check_substrate_identity},
      {"solver_crosscheck", check_solver_crosscheck},
  };
  static const NamedCheck full_checks[] = {
      {"generator_integrity", check_generator_integrity},
      {"mesh_io_roundtrip", check_mesh_io_roundtrip},
      {"refinement_error_decrease", check_refinement_error_decrease},
      {"sd_pinch", check_sd_pinch},
      {"gmres_stepping", check_gmres_stepping},
  };

  VerifyReport report;
  for (const NamedCheck& c : fast_checks) {
    report.cases.push_back(timed(c, mutate));
  }
  if (suite == "full") {
    for (const NamedCheck& c : full_checks) {
      report.cases.push_back(timed(c, mutate));
    }
  }
  return report;
}

}  // namespace geoflow
