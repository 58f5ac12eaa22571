#include "geoflow/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "geoflow/mesh_io.hpp"

namespace geoflow {

namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

// Tracks which keys of a JSON object were consumed so leftovers can be
// reported by full path.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) {
      throw ConfigError(path_ + ": expected an object");
    }
  }

  const json* find(const std::string& name) {
    seen_.insert(name);
    auto it = j_.find(name);
    return it == j_.end() ? nullptr : &*it;
  }

  const json& require(const std::string& name) {
    const json* p = find(name);
    if (!p) throw ConfigError(path_ + ": missing required key '" + name + "'");
    return *p;
  }

  double number(const std::string& name, double fallback) {
    const json* p = find(name);
    return p ? as_number(*p, name) : fallback;
  }

  double required_number(const std::string& name) {
    return as_number(require(name), name);
  }

  int integer(const std::string& name, int fallback) {
    const json* p = find(name);
    if (!p) return fallback;
    if (!p->is_number_integer()) {
      throw ConfigError(path_ + "." + name + ": expected an integer");
    }
    return p->get<int>();
  }

  bool boolean(const std::string& name, bool fallback) {
    const json* p = find(name);
    if (!p) return fallback;
    if (!p->is_boolean()) {
      throw ConfigError(path_ + "." + name + ": expected a boolean");
    }
    return p->get<bool>();
  }

  std::string text(const std::string& name, const std::string& fallback) {
    const json* p = find(name);
    if (!p) return fallback;
    return as_text(*p, name);
  }

  std::string required_text(const std::string& name) {
    return as_text(require(name), name);
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
      }
    }
  }

  const std::string& path() const { return path_; }

 private:
  double as_number(const json& v, const std::string& name) const {
    if (!v.is_number()) {
      throw ConfigError(path_ + "." + name + ": expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
      throw ConfigError(path_ + "." + name + ": must be finite");
    }
    return d;
  }

  std::string as_text(const json& v, const std::string& name) const {
    if (!v.is_string()) {
      throw ConfigError(path_ + "." + name + ": expected a string");
    }
    return v.get<std::string>();
  }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

SchemeKind parse_scheme_kind(const std::string& s, const std::string& path) {
  static const std::pair<const char*, SchemeKind> table[] = {
      {"dziuk_mcf", SchemeKind::DziukMcf},
      {"bgn_mcf", SchemeKind::BgnMcf},
      {"mdr_mcf", SchemeKind::MdrMcf},
      {"dual_mdr_mcf", SchemeKind::DualMdrMcf},
      {"bgn_sd", SchemeKind::BgnSd},
      {"dual_mdr_sd", SchemeKind::DualMdrSd},
      {"mdr_dewetting", SchemeKind::MdrDewetting},
      {"dual_mdr_dewetting", SchemeKind::DualMdrDewetting},
      {"bgn_dewetting", SchemeKind::BgnDewetting},
  };
  for (const auto& [name, kind] : table) {
    if (s == name) return kind;
  }
  throw ConfigError(path + ": unknown scheme '" + s + "'");
}

MeshSpec parse_mesh(const json& j) {
  Section sec(j, "mesh");
  MeshSpec spec;
  const std::string source = sec.required_text("source");
  if (source == "icosphere") {
    spec.source = MeshSpec::Source::Icosphere;
    spec.subdivisions = sec.integer("subdivisions", 3);
    spec.radius = sec.number("radius", 1.0);
    if (spec.subdivisions < 0 || spec.subdivisions > 8) {
      throw ConfigError("mesh.subdivisions: must be in [0, 8]");
    }
    if (!(spec.radius > 0.0)) {
      throw ConfigError("mesh.radius: must be positive");
    }
  } else if (source == "dumbbell") {
    spec.source = MeshSpec::Source::Dumbbell;
    spec.n_theta = sec.integer("n_theta", 36);
    spec.n_phi = sec.integer("n_phi", 31);
    if (spec.n_theta < 3) throw ConfigError("mesh.n_theta: must be >= 3");
    if (spec.n_phi < 2) throw ConfigError("mesh.n_phi: must be >= 2");
  } else if (source == "cuboid") {
    spec.source = MeshSpec::Source::Cuboid;
    spec.lx = sec.required_number("lx");
    spec.ly = sec.required_number("ly");
    spec.lz = sec.required_number("lz");
    spec.target_h = sec.required_number("target_h");
    spec.open_bottom = sec.boolean("open_bottom", false);
    if (!(spec.lx > 0.0) || !(spec.ly > 0.0) || !(spec.lz > 0.0)) {
      throw ConfigError("mesh: cuboid extents must be positive");
    }
    if (!(spec.target_h > 0.0)) {
      throw ConfigError("mesh.target_h: must be positive");
    }
  } else if (source == "file") {
    spec.source = MeshSpec::Source::File;
    spec.path = sec.required_text("path");
    if (spec.path.empty()) throw ConfigError("mesh.path: must not be empty");
  } else {
    throw ConfigError("mesh.source: unknown source '" + source + "'");
  }
  sec.finish();
  return spec;
}

}  // namespace

RunSpec parse_run_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }

  Section top(root, "config");
  RunSpec spec;

  {
    Section sec(top.require("scheme"), "scheme");
    spec.flow.kind = parse_scheme_kind(sec.required_text("kind"),
                                       "scheme.kind");
    const std::string form = sec.text("tangential_form", "full_gradient");
    if (form == "full_gradient") {
      spec.flow.params.form = TangentialForm::FullGradient;
    } else if (form == "symmetric_gradient") {
      spec.flow.params.form = TangentialForm::SymmetricGradient;
    } else {
      throw ConfigError("scheme.tangential_form: unknown form '" + form +
                        "'");
    }
    sec.finish();
  }

  spec.mesh = parse_mesh(top.require("mesh"));

  {
    Section sec(top.require("time"), "time");
    spec.flow.params.tau = sec.required_number("tau");
    spec.flow.t_end = sec.required_number("t_end");
    sec.finish();
    if (!(spec.flow.params.tau > 0.0)) {
      throw ConfigError("time.tau: must be positive");
    }
    if (!(spec.flow.t_end >= 0.0)) {
      throw ConfigError("time.t_end: must be non-negative");
    }
  }

  if (const json* j = top.find("dewetting")) {
    if (!is_dewetting(spec.flow.kind)) {
      throw ConfigError(
          "dewetting: section is only valid with a dewetting scheme");
    }
    Section sec(*j, "dewetting");
    const double deg = sec.required_number("theta_degrees");
    sec.finish();
    if (!(deg > 0.0) || !(deg < 180.0)) {
      throw ConfigError(
          "dewetting.theta_degrees: must lie strictly between 0 and 180");
    }
    spec.flow.params.theta = deg * kPi / 180.0;
  } else if (is_dewetting(spec.flow.kind)) {
    throw ConfigError(
        "config: dewetting schemes require a 'dewetting' section");
  }

  if (const json* j = top.find("solver")) {
    Section sec(*j, "solver");
    const std::string method = sec.text("method", "direct");
    if (method == "direct") {
      spec.flow.params.solver.method = SolveMethod::DirectLU;
    } else if (method == "gmres") {
      spec.flow.params.solver.method = SolveMethod::Gmres;
    } else {
      throw ConfigError("solver.method: unknown method '" + method + "'");
    }
    spec.flow.params.solver.tol = sec.number("tol", 1e-10);
    spec.dump_system = sec.text("dump_system", "");
    sec.finish();
    if (!(spec.flow.params.solver.tol > 0.0)) {
      throw ConfigError("solver.tol: must be positive");
    }
  }

  if (const json* j = top.find("output")) {
    Section sec(*j, "output");
    spec.output.csv = sec.text("csv", "");
    spec.output.snapshot_dir = sec.text("snapshot_dir", "");
    spec.output.snapshot_every = sec.integer("snapshot_every", 0);
    spec.output.final_mesh = sec.text("final_mesh", "");
    sec.finish();
    if (spec.output.snapshot_every < 0) {
      throw ConfigError("output.snapshot_every: must be >= 0");
    }
    if (spec.output.snapshot_every > 0 && spec.output.snapshot_dir.empty()) {
      throw ConfigError("output.snapshot_every: needs output.snapshot_dir");
    }
  }

  if (const json* j = top.find("pinch_detection")) {
    Section sec(*j, "pinch_detection");
    spec.flow.pinch.neck_detection = sec.boolean("enabled", true);
    spec.flow.pinch.neck_threshold = sec.number("neck_threshold", 0.0);
    spec.flow.pinch.slab_width = sec.number("slab_width", 0.0);
    sec.finish();
    if (spec.flow.pinch.neck_threshold < 0.0) {
      throw ConfigError("pinch_detection.neck_threshold: must be >= 0");
    }
    if (spec.flow.pinch.slab_width < 0.0) {
      throw ConfigError("pinch_detection.slab_width: must be >= 0");
    }
  }

  spec.deterministic = top.boolean("deterministic", true);
  top.finish();
  return spec;
}

RunSpec load_run_config(const std::string& file_path) {
  std::ifstream in(file_path);
  if (!in) throw IoError("cannot open config file: " + file_path);
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failure on config file: " + file_path);
  return parse_run_config(buf.str());
}

SurfaceMesh build_mesh(const MeshSpec& spec) {
  switch (spec.source) {
    case MeshSpec::Source::Icosphere:
      return gen_icosphere(spec.subdivisions, spec.radius);
    case MeshSpec::Source::Dumbbell:
      return gen_dumbbell(spec.n_theta, spec.n_phi);
    case MeshSpec::Source::Cuboid:
      return gen_cuboid(spec.lx, spec.ly, spec.lz, spec.target_h,
                        spec.open_bottom);
    case MeshSpec::Source::File:
      return load_mesh(spec.path);
  }
  throw ConfigError("mesh.source: invalid source");
}

}  // namespace geoflow
