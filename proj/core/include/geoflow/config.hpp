#pragma once

#include <string>

#include "geoflow/flow.hpp"
#include "geoflow/mesh.hpp"

namespace geoflow {

struct MeshSpec {
  enum class Source { Icosphere, Dumbbell, Cuboid, File };
  Source source = Source::Icosphere;
  // icosphere
  int subdivisions = 3;
  double radius = 1.0;
  // dumbbell
  int n_theta = 36;
  int n_phi = 31;
  // cuboid
  double lx = 1.0, ly = 1.0, lz = 1.0;
  double target_h = 0.1;
  bool open_bottom = false;
  // file
  std::string path;
};

struct OutputSpec {
  std::string csv;           // per-step diagnostics; empty disables
  std::string snapshot_dir;  // receives surf_<step:06>.vtk files
  int snapshot_every = 0;    // 0 disables snapshots
  std::string final_mesh;    // written on any terminal status
};

struct RunSpec {
  FlowConfig flow;
  MeshSpec mesh;
  OutputSpec output;
  std::string dump_system;  // matrix-market dump prefix for the first step
  bool deterministic = true;
};

/// Parses the JSON run configuration. Unknown keys anywhere are a
/// ConfigError naming the offending path; so are missing required keys,
/// wrong types and out-of-range values.
RunSpec parse_run_config(const std::string& json_text);

/// Reads the file and parses it; IoError if unreadable.
RunSpec load_run_config(const std::string& file_path);

/// Instantiates the configured mesh (generator or file load).
SurfaceMesh build_mesh(const MeshSpec& spec);

}  // namespace geoflow
