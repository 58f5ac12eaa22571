#include "geoflow/flow.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace geoflow {

namespace {

DiagnosticsRecord base_record(int step, double t, const SurfaceMesh& mesh,
                              bool dewetting, double theta) {
  DiagnosticsRecord rec;
  rec.step = step;
  rec.time = t;
  rec.area = mesh.area();
  if (dewetting) {
    rec.substrate_area = substrate_area(mesh);
    rec.energy = rec.area - std::cos(theta) * *rec.substrate_area;
  }
  const MeshQualityReport q = mesh_quality(mesh);
  rec.sigma_max = q.sigma_max;
  rec.min_area = q.min_area;
  return rec;
}

std::optional<double> lambda_max_norm(const StepSolution& sol) {
  if (sol.lambda.empty()) return std::nullopt;
  double m = 0.0;
  for (const Vec3& l : sol.lambda) {
    m = std::max(m, l.cwiseAbs().maxCoeff());
  }
  return m;
}

}  // namespace

const char* flow_status_name(FlowStatus status) {
  switch (status) {
    case FlowStatus::Completed: return "completed";
    case FlowStatus::PinchOff: return "pinch-off";
    case FlowStatus::SolverFailure: return "solver-failure";
  }
  return "unknown";
}

FlowResult run_flow(const SurfaceMesh& initial, const FlowConfig& config,
                    const RecordSink& record, const SnapshotSink& snapshot) {
  if (!(config.t_end >= 0.0) || !std::isfinite(config.t_end)) {
    throw std::invalid_argument("run_flow: t_end must be non-negative");
  }
  if (!(config.params.tau > 0.0) || !std::isfinite(config.params.tau)) {
    throw std::invalid_argument("run_flow: tau must be positive and finite");
  }

  PinchOptions pinch = config.pinch;
  if (pinch.neck_detection) {
    const double h0 = mesh_quality(initial).mesh_size;
    // A neck below one mesh size is no longer resolvable by the grid, so
    // that is the default end of the meaningful simulation.
    if (!(pinch.neck_threshold > 0.0)) pinch.neck_threshold = h0;
    if (!(pinch.slab_width > 0.0)) pinch.slab_width = h0;
  }
  if (!(pinch.area_floor > 0.0)) pinch.area_floor = initial.epsilon_area();

  const bool dew = is_dewetting(config.kind);
  const double theta = config.params.theta;
  SurfaceMesh mesh = initial;
  double prev_area = mesh.area();

  const std::optional<PinchEvent> initial_pinch =
      detect_pinch_off(mesh, pinch);
  {
    DiagnosticsRecord r0 = base_record(0, 0.0, mesh, dew, theta);
    r0.status = initial_pinch ? "pinch-off" : "ok";
    if (record) record(r0);
  }
  if (snapshot) snapshot(0, mesh, nullptr);
  if (initial_pinch) {
    return FlowResult{FlowStatus::PinchOff, 0, 0.0, std::move(mesh),
                      initial_pinch};
  }

  const double tau = config.params.tau;
  const long n_steps =
      static_cast<long>(std::floor(config.t_end / tau + 1e-9));

  for (long m = 1; m <= n_steps; ++m) {
    const double t = static_cast<double>(m) * tau;
    const StepSolution sol = take_step(mesh, config.kind, config.params);

    if (sol.report.singular) {
      DiagnosticsRecord rec = base_record(static_cast<int>(m), t, mesh, dew,
                                          theta);
      rec.residual = sol.report.residual;
      rec.lambda_inf = lambda_max_norm(sol);
      rec.status = "solver-failure";
      if (record) record(rec);
      return FlowResult{FlowStatus::SolverFailure, static_cast<int>(m - 1),
                        static_cast<double>(m - 1) * tau, std::move(mesh),
                        std::nullopt};
    }

    VectorField displacement(sol.v.size());
    for (size_t q = 0; q < sol.v.size(); ++q) {
      displacement[q] = tau * sol.v[q];
    }
    UpdateResult up = update_positions(mesh, displacement);

    const std::optional<PinchEvent> event = detect_pinch_off(up.mesh, pinch);

    DiagnosticsRecord rec =
        base_record(static_cast<int>(m), t, up.mesh, dew, theta);
    rec.area_delta = prev_area - up.mesh.area();
    rec.residual = sol.report.residual;
    rec.lambda_inf = lambda_max_norm(sol);
    rec.status = event ? "pinch-off" : "ok";
    if (record) record(rec);
    if (snapshot) snapshot(static_cast<int>(m), up.mesh, &sol);

    if (event) {
      // A degenerate mesh is not valid state; keep the pre-step surface.
      SurfaceMesh final_mesh = event->kind == PinchEvent::Kind::Degeneracy
                                   ? std::move(mesh)
                                   : std::move(up.mesh);
      return FlowResult{FlowStatus::PinchOff, static_cast<int>(m), t,
                        std::move(final_mesh), event};
    }

    mesh = std::move(up.mesh);
    prev_area = mesh.area();
  }

  return FlowResult{FlowStatus::Completed, static_cast<int>(n_steps),
                    static_cast<double>(n_steps) * tau, std::move(mesh),
                    std::nullopt};
}

}  // namespace geoflow
