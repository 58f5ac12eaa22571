// Command line front end: mesh generation, configured flow runs and the
// invariant verification suites.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <optional>
#include <string>

#include <Eigen/Core>

#include "CLI11.hpp"
#include "geoflow/config.hpp"
#include "geoflow/diagnostics.hpp"
#include "geoflow/flow.hpp"
#include "geoflow/mesh_io.hpp"
#include "geoflow/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

void setup_threads(bool deterministic) {
  int n = 1;
  if (!deterministic) {
    if (const char* env = std::getenv("GEOFLOW_THREADS")) {
      n = std::max(1, std::atoi(env));
    }
  }
  Eigen::setNbThreads(n);
}

struct MeshGenArgs {
  std::string type;
  std::string output;
  int subdivisions = 3;
  double radius = 1.0;
  int n_theta = 36;
  int n_phi = 31;
  double lx = 1.0, ly = 1.0, lz = 1.0;
  double h = 0.1;
  bool open_bottom = false;
};

int cmd_mesh_gen(const MeshGenArgs& a) {
  geoflow::MeshSpec spec;
  if (a.type == "icosphere") {
    spec.source = geoflow::MeshSpec::Source::Icosphere;
    spec.subdivisions = a.subdivisions;
    spec.radius = a.radius;
  } else if (a.type == "dumbbell") {
    spec.source = geoflow::MeshSpec::Source::Dumbbell;
    spec.n_theta = a.n_theta;
    spec.n_phi = a.n_phi;
  } else if (a.type == "cuboid") {
    spec.source = geoflow::MeshSpec::Source::Cuboid;
    spec.lx = a.lx;
    spec.ly = a.ly;
    spec.lz = a.lz;
    spec.target_h = a.h;
    spec.open_bottom = a.open_bottom;
  } else {
    std::fprintf(stderr, "error: unknown mesh type '%s'\n", a.type.c_str());
    return kExitConfig;
  }
  const geoflow::SurfaceMesh mesh = geoflow::build_mesh(spec);
  geoflow::save_mesh(mesh, a.output);
  std::printf("wrote %s: %d vertices, %d triangles\n", a.output.c_str(),
              mesh.n_vertices(), mesh.n_triangles());
  return kExitOk;
}

int cmd_mesh_info(const std::string& path) {
  const geoflow::SurfaceMesh mesh = geoflow::load_mesh(path);
  const geoflow::MeshQualityReport q = geoflow::mesh_quality(mesh);
  const geoflow::AdmissibilityReport adm = geoflow::check_admissible(mesh);
  std::printf("vertices:       %d\n", mesh.n_vertices());
  std::printf("triangles:      %d\n", mesh.n_triangles());
  std::printf("boundary loops: %zu\n", mesh.boundary_loops().size());
  std::printf("area:           %.12g\n", mesh.area());
  std::printf("mesh size:      %.12g\n", q.mesh_size);
  std::printf("sigma_max:      %.12g (triangle %d)\n", q.sigma_max,
              q.sigma_max_triangle);
  std::printf("min area:       %.12g (triangle %d)\n", q.min_area,
              q.min_area_triangle);
  std::printf("admissible:     %s\n", adm.admissible() ? "yes" : "no");
  if (!mesh.closed()) {
    std::printf("substrate area: %.12g\n", geoflow::substrate_area(mesh));
  }
  return kExitOk;
}

void write_rhs(const std::vector<double>& rhs, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw geoflow::IoError("cannot open " + path);
  for (double v : rhs) std::fprintf(f, "%.17g\n", v);
  if (std::fclose(f) != 0) throw geoflow::IoError("write failure on " + path);
}

int cmd_run(const std::string& config_path) {
  const geoflow::RunSpec spec = geoflow::load_run_config(config_path);
  setup_threads(spec.deterministic);
  const geoflow::SurfaceMesh initial = geoflow::build_mesh(spec.mesh);

  std::printf("scheme:    %s\n", geoflow::scheme_name(spec.flow.kind));
  std::printf("mesh:      %d vertices, %d triangles\n", initial.n_vertices(),
              initial.n_triangles());
  std::printf("tau:       %.6g   t_end: %.6g\n", spec.flow.params.tau,
              spec.flow.t_end);

  if (!spec.dump_system.empty()) {
    const geoflow::OperatorSet ops =
        geoflow::assemble_operators(initial, spec.flow.params.form);
    const geoflow::AssembledSystem sys = geoflow::build_scheme_system(
        initial, ops, spec.flow.kind, spec.flow.params);
    geoflow::write_matrix_market(sys.matrix,
                                 spec.dump_system + "_matrix.mtx");
    write_rhs(sys.rhs, spec.dump_system + "_rhs.txt");
    std::printf("dumped first-step system to %s_{matrix.mtx,rhs.txt}\n",
                spec.dump_system.c_str());
  }

  std::optional<geoflow::CsvWriter> csv;
  if (!spec.output.csv.empty()) csv.emplace(spec.output.csv);
  geoflow::RecordSink record;
  if (csv) {
    record = [&csv](const geoflow::DiagnosticsRecord& r) { csv->write(r); };
  }

  geoflow::SnapshotSink snapshot;
  if (spec.output.snapshot_every > 0) {
    std::error_code ec;
    std::filesystem::create_directories(spec.output.snapshot_dir, ec);
    if (ec) {
      throw geoflow::IoError("cannot create snapshot directory: " +
                             spec.output.snapshot_dir);
    }
    snapshot = [&spec](int step, const geoflow::SurfaceMesh& mesh,
                       const geoflow::StepSolution* sol) {
      if (step % spec.output.snapshot_every != 0) return;
      char name[32];
      std::snprintf(name, sizeof name, "/surf_%06d.vtk", step);
      geoflow::VtkPointData data;
      geoflow::ScalarField speed;
      if (sol && !sol->v.empty()) {
        speed.resize(sol->v.size());
        for (size_t q = 0; q < sol->v.size(); ++q) {
          speed[q] = sol->v[q].norm();
        }
        data.vectors.emplace_back("velocity", &sol->v);
        data.scalars.emplace_back("speed", &speed);
      }
      if (sol && !sol->H.empty()) {
        data.scalars.emplace_back("curvature", &sol->H);
      }
      geoflow::save_mesh(mesh, spec.output.snapshot_dir + name, &data);
    };
  }

  const geoflow::FlowResult res =
      geoflow::run_flow(initial, spec.flow, record, snapshot);

  if (!spec.output.final_mesh.empty()) {
    geoflow::save_mesh(res.mesh, spec.output.final_mesh);
  }

  std::printf("status:    %s\n", geoflow::flow_status_name(res.status));
  std::printf("steps:     %d   t: %.6g\n", res.steps, res.time);
  if (res.pinch) {
    if (res.pinch->kind == geoflow::PinchEvent::Kind::Degeneracy) {
      std::printf("pinch-off: triangle %d degenerated (area %.3g)\n",
                  res.pinch->triangle, res.pinch->value);
    } else {
      std::printf("pinch-off: neck radius %.6g below threshold\n",
                  res.pinch->value);
    }
  }
  return res.status == geoflow::FlowStatus::SolverFailure ? kExitSolver
                                                          : kExitOk;
}

int cmd_verify(const std::string& suite) {
  const geoflow::VerifyReport report = geoflow::run_verify_suite(suite);
  for (const auto& c : report.cases) {
    if (c.passed) {
      std::printf("[PASS] %-28s (%.2fs)\n", c.name.c_str(), c.seconds);
    } else {
      std::printf("[FAIL] %-28s (%.2fs)  %s\n", c.name.c_str(), c.seconds,
                  c.detail.c_str());
    }
  }
  std::printf("%zu/%zu checks passed\n",
              report.cases.size() -
                  static_cast<size_t>(std::count_if(
                      report.cases.begin(), report.cases.end(),
                      [](const geoflow::VerifyCase& c) { return !c.passed; })),
              report.cases.size());
  return report.all_passed() ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geoflow: curvature-driven evolution of triangulated "
               "surfaces"};
  app.require_subcommand(1);

  auto* mesh_cmd = app.add_subcommand("mesh", "mesh utilities");
  mesh_cmd->require_subcommand(1);

  MeshGenArgs gen_args;
  auto* gen = mesh_cmd->add_subcommand("gen", "generate a mesh");
  gen->add_option("--type", gen_args.type, "icosphere, dumbbell or cuboid")
      ->required()
      ->check(CLI::IsMember({"icosphere", "dumbbell", "cuboid"}));
  gen->add_option("-o,--output", gen_args.output, "output file (.off/.obj/.vtk)")
      ->required();
  gen->add_option("--subdivisions", gen_args.subdivisions,
                  "icosphere subdivision level");
  gen->add_option("--radius", gen_args.radius, "icosphere radius");
  gen->add_option("--n-theta", gen_args.n_theta, "dumbbell angular samples");
  gen->add_option("--n-phi", gen_args.n_phi, "dumbbell axial samples");
  gen->add_option("--lx", gen_args.lx, "cuboid x extent");
  gen->add_option("--ly", gen_args.ly, "cuboid y extent");
  gen->add_option("--lz", gen_args.lz, "cuboid z extent");
  gen->add_option("--target-h", gen_args.h, "cuboid target edge length");
  gen->add_flag("--open-bottom", gen_args.open_bottom,
                "omit the bottom face and rest the base in z = 0");

  std::string info_path;
  auto* info = mesh_cmd->add_subcommand("info", "print mesh statistics");
  info->add_option("path", info_path, "mesh file")->required();

  std::string config_path;
  auto* run = app.add_subcommand("run", "run a configured flow");
  run->add_option("-c,--config", config_path, "JSON configuration file")
      ->required();

  std::string suite = "fast";
  auto* verify = app.add_subcommand("verify", "run invariant checks");
  verify->add_option("--suite", suite, "fast or full")
      ->check(CLI::IsMember({"fast", "full"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (gen->parsed()) return cmd_mesh_gen(gen_args);
    if (info->parsed()) return cmd_mesh_info(info_path);
    if (run->parsed()) return cmd_run(config_path);
    if (verify->parsed()) {
      setup_threads(false);
      return cmd_verify(suite);
    }
  } catch (const geoflow::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kExitIo;
  } catch (const geoflow::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const geoflow::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kExitConfig;
  } catch (const geoflow::TopologyError& e) {
    std::fprintf(stderr, "mesh error: %s\n", e.what());
    return kExitConfig;
  } catch (const geoflow::AdmissibilityError& e) {
    std::fprintf(stderr, "mesh error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "solver error: %s\n", e.what());
    return kExitSolver;
  }
  return kExitOk;
}
