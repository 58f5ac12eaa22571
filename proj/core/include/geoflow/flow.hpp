#pragma once

#include <functional>
#include <optional>

#include "geoflow/diagnostics.hpp"
#include "geoflow/mesh.hpp"
#include "geoflow/schemes.hpp"

namespace geoflow {

enum class FlowStatus { Completed, PinchOff, SolverFailure };

const char* flow_status_name(FlowStatus status);

struct FlowConfig {
  SchemeKind kind = SchemeKind::DualMdrMcf;
  StepParams params;
  double t_end = 0.0;
  PinchOptions pinch;  // unresolved thresholds default from the initial mesh
};

struct FlowResult {
  FlowStatus status = FlowStatus::Completed;
  int steps = 0;
  double time = 0.0;
  /// Last valid mesh: the pre-step mesh when a step degenerates or the
  /// solver fails, else the final evolved surface.
  SurfaceMesh mesh;
  std::optional<PinchEvent> pinch;
};

/// Called once per written diagnostics record, in order.
using RecordSink = std::function<void(const DiagnosticsRecord&)>;
/// Called after every accepted step (and once at step 0 with a null
/// solution) with the evolved mesh.
using SnapshotSink =
    std::function<void(int step, const SurfaceMesh&, const StepSolution*)>;

/// Runs floor(t_end / tau) uniform steps of the configured scheme. Every
/// record is emitted before the function returns, including the terminal
/// pinch-off or solver-failure row; t_end = 0 emits only the initial record.
FlowResult run_flow(const SurfaceMesh& initial, const FlowConfig& config,
                    const RecordSink& record = {},
                    const SnapshotSink& snapshot = {});

}  // namespace geoflow
