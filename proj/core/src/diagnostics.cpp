#include "geoflow/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "geoflow/assembly.hpp"
#include "geoflow/types.hpp"

namespace geoflow {

double surface_area(const SurfaceMesh& mesh) { return mesh.area(); }

double dewetting_energy(const SurfaceMesh& mesh, double theta) {
  return mesh.area() - std::cos(theta) * substrate_area(mesh);
}

double sphere_error(const SurfaceMesh& mesh, double t, double r0) {
  const double r_sq = r0 * r0 - 4.0 * t;
  if (r_sq <= 0.0) {
    throw std::domain_error("sphere_error: exact sphere is extinct at t=" +
                            std::to_string(t));
  }
  const double r = std::sqrt(r_sq);
  double err = 0.0;
  for (const Vec3& v : mesh.vertices()) {
    err = std::max(err, std::abs(v.norm() - r));
  }
  return err;
}

double estimate_order(const std::vector<double>& errors,
                      const std::vector<double>& params) {
  if (errors.size() != params.size() || errors.size() < 2) {
    throw std::invalid_argument(
        "estimate_order: need at least two matching samples");
  }
  const int n = static_cast<int>(errors.size());
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(errors[i] > 0.0) || !(params[i] > 0.0)) {
      throw std::invalid_argument(
          "estimate_order: samples must be positive");
    }
    const double x = std::log(params[i]);
    const double y = std::log(errors[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = n * sxx - sx * sx;
  if (std::abs(denom) < 1e-300) {
    throw std::invalid_argument("estimate_order: parameters are identical");
  }
  return (n * sxy - sx * sy) / denom;
}

std::optional<PinchEvent> detect_pinch_off(const SurfaceMesh& mesh,
                                           const PinchOptions& opts) {
  const double floor =
      opts.area_floor > 0.0 ? opts.area_floor : mesh.epsilon_area();
  if (mesh.min_face_area() <= floor) {
    PinchEvent ev;
    ev.kind = PinchEvent::Kind::Degeneracy;
    ev.triangle = mesh.min_face_triangle();
    ev.value = mesh.min_face_area();
    return ev;
  }
  if (!opts.neck_detection || !(opts.neck_threshold > 0.0) ||
      !(opts.slab_width > 0.0)) {
    return std::nullopt;
  }

  const Vec3 lo = mesh.bbox_min();
  const Vec3 hi = mesh.bbox_max();
  int axis = 0;
  double extent = hi[0] - lo[0];
  for (int d = 1; d < 3; ++d) {
    if (hi[d] - lo[d] > extent) {
      extent = hi[d] - lo[d];
      axis = d;
    }
  }
  if (!(extent > 0.0)) return std::nullopt;
  const Vec3 center = 0.5 * (lo + hi);

  // At least four slabs so the middle half is populated even after the
  // surface has shrunk below the nominal slab width.
  const int n_slabs =
      std::max(4, static_cast<int>(std::ceil(extent / opts.slab_width)));
  std::vector<double> radius(n_slabs, -1.0);
  for (const Vec3& v : mesh.vertices()) {
    int slab = static_cast<int>((v[axis] - lo[axis]) / extent * n_slabs);
    slab = std::clamp(slab, 0, n_slabs - 1);
    Vec3 d = v - center;
    d[axis] = 0.0;
    radius[slab] = std::max(radius[slab], d.norm());
  }

  // Only the middle half of the axis counts: the caps of a dumbbell are
  // legitimately narrow near the poles.
  const double mid_lo = lo[axis] + 0.25 * extent;
  const double mid_hi = hi[axis] - 0.25 * extent;
  double neck = -1.0;
  for (int s = 0; s < n_slabs; ++s) {
    if (radius[s] < 0.0) continue;
    const double s_lo = lo[axis] + extent * s / n_slabs;
    const double s_hi = lo[axis] + extent * (s + 1) / n_slabs;
    if (s_lo < mid_lo || s_hi > mid_hi) continue;
    if (neck < 0.0 || radius[s] < neck) neck = radius[s];
  }
  if (neck >= 0.0 && neck < opts.neck_threshold) {
    PinchEvent ev;
    ev.kind = PinchEvent::Kind::Neck;
    ev.value = neck;
    return ev;
  }
  return std::nullopt;
}

namespace {

void append_field(std::string& line, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  line += buf;
}

void append_field(std::string& line, const std::optional<double>& v) {
  if (v) append_field(line, *v);
}

}  // namespace

CsvWriter::CsvWriter(const std::string& path) {
  file_ = std::fopen(path.c_str(), "w");
  if (!file_) {
    throw IoError("cannot open diagnostics file for writing: " + path);
  }
  if (std::fputs(
          "step,time,area,substrate_area,energy,area_delta,sigma_max,"
          "min_area,lambda_inf,residual,status\n",
          file_) < 0 ||
      std::fflush(file_) != 0) {
    std::fclose(file_);
    file_ = nullptr;
    throw IoError("write failure on diagnostics file: " + path);
  }
}

CsvWriter::~CsvWriter() {
  if (file_) std::fclose(file_);
}

void CsvWriter::write(const DiagnosticsRecord& rec) {
  if (!file_) throw IoError("diagnostics file is not open");
  std::string line = std::to_string(rec.step);
  line += ',';
  append_field(line, rec.time);
  line += ',';
  append_field(line, rec.area);
  line += ',';
  append_field(line, rec.substrate_area);
  line += ',';
  append_field(line, rec.energy);
  line += ',';
  append_field(line, rec.area_delta);
  line += ',';
  append_field(line, rec.sigma_max);
  line += ',';
  append_field(line, rec.min_area);
  line += ',';
  append_field(line, rec.lambda_inf);
  line += ',';
  append_field(line, rec.residual);
  line += ',';
  line += rec.status;
  line += '\n';
  if (std::fputs(line.c_str(), file_) < 0 || std::fflush(file_) != 0) {
    throw IoError("write failure on diagnostics file");
  }
}

}  // namespace geoflow
