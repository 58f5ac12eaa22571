#pragma once

#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "geoflow/mesh.hpp"

namespace geoflow {

// One row of the per-step diagnostics table. Optional fields are left blank
// in the CSV when the run does not produce them (closed surfaces have no
// substrate, non-dual schemes have no multiplier, step 0 has no residual).
struct DiagnosticsRecord {
  int step = 0;
  double time = 0.0;
  double area = 0.0;
  std::optional<double> substrate_area;
  std::optional<double> energy;
  double area_delta = 0.0;
  double sigma_max = 0.0;
  double min_area = 0.0;
  std::optional<double> lambda_inf;
  std::optional<double> residual;
  std::string status = "ok";
};

double surface_area(const SurfaceMesh& mesh);

// Free energy |Gamma| - cos(theta) * |substrate patch|.
double dewetting_energy(const SurfaceMesh& mesh, double theta);

// Max vertex distance from the sphere of exact radius sqrt(r0^2 - 4 t),
// centered at the origin. Throws std::domain_error past extinction.
double sphere_error(const SurfaceMesh& mesh, double t, double r0 = 1.0);

// Least-squares slope of log(error) against log(parameter).
double estimate_order(const std::vector<double>& errors,
                      const std::vector<double>& params);

struct PinchOptions {
  bool neck_detection = false;
  // Resolved values; run_flow fills defaults from the initial mesh size.
  double neck_threshold = 0.0;
  double slab_width = 0.0;
  // Degeneracy floor. <= 0 falls back to the mesh's own epsilon_area; a run
  // pins it to the initial mesh so a globally shrinking surface still
  // registers as degenerate against its starting scale.
  double area_floor = 0.0;
};

struct PinchEvent {
  enum class Kind { Degeneracy, Neck };
  Kind kind = Kind::Degeneracy;
  int triangle = -1;   // offending triangle for degeneracy events
  double value = 0.0;  // triangle area or neck radius
};

// Checks (a) triangle degeneracy against the mesh's area floor and
// (b) optionally a thin neck: the surface is cut into slabs along its
// longest bounding-box axis and the max radial distance from that axis is
// measured per slab; slabs in the middle half of the extent whose radius
// drops below the threshold report a neck.
std::optional<PinchEvent> detect_pinch_off(const SurfaceMesh& mesh,
                                           const PinchOptions& opts);

// Append-only CSV writer; one flush per record so partial runs stay
// readable.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  ~CsvWriter();
  CsvWriter(const CsvWriter&) = delete;
  CsvWriter& operator=(const CsvWriter&) = delete;

  void write(const DiagnosticsRecord& rec);

 private:
  std::FILE* file_ = nullptr;
};

}  // namespace geoflow
