#pragma once

#include "geoflow/assembly.hpp"
#include "geoflow/mesh.hpp"
#include "geoflow/solver.hpp"
#include "geoflow/types.hpp"

namespace geoflow {

enum class SchemeKind {
  DziukMcf,
  BgnMcf,
  MdrMcf,
  DualMdrMcf,
  BgnSd,
  DualMdrSd,
  MdrDewetting,
  DualMdrDewetting,
  BgnDewetting,
};

bool is_dewetting(SchemeKind kind);
bool is_surface_diffusion(SchemeKind kind);
const char* scheme_name(SchemeKind kind);

struct StepParams {
  double tau = 1e-3;
  TangentialForm form = TangentialForm::FullGradient;
  /// contact angle in radians, dewetting schemes only
  double theta = 1.5707963267948966;
  SolverOptions solver;
};

/// One implicit step. Fields not carried by the scheme stay empty.
/// For dewetting schemes the third velocity component is exactly zero on
/// boundary vertices (those unknowns are eliminated, not penalized).
struct StepSolution {
  VectorField v;
  ScalarField H;
  VectorField lambda;
  ScalarField kappa;
  SolveReport report;
};

struct AssembledSystem {
  CsrMatrix matrix;
  std::vector<double> rhs;
};

/// The linear system a step would solve, exposed for inspection, testing
/// and MatrixMarket dumps. Unknown ordering: [v, H, lambda, kappa] with the
/// blocks the scheme actually carries; constrained components are removed.
AssembledSystem build_scheme_system(const SurfaceMesh& mesh,
                                    const OperatorSet& ops, SchemeKind kind,
                                    const StepParams& params);

StepSolution take_step(const SurfaceMesh& mesh, SchemeKind kind,
                       const StepParams& params);
/// Same, reusing operators already assembled on `mesh` (they must match).
StepSolution take_step(const SurfaceMesh& mesh, const OperatorSet& ops,
                       SchemeKind kind, const StepParams& params);

StepSolution step_dziuk_mcf(const SurfaceMesh& mesh, const StepParams& p);
StepSolution step_bgn_mcf(const SurfaceMesh& mesh, const StepParams& p);
StepSolution step_mdr_mcf(const SurfaceMesh& mesh, const StepParams& p);
StepSolution step_dual_mdr_mcf(const SurfaceMesh& mesh, const StepParams& p);
StepSolution step_bgn_sd(const SurfaceMesh& mesh, const StepParams& p);
StepSolution step_dual_mdr_sd(const SurfaceMesh& mesh, const StepParams& p);
StepSolution step_mdr_dewetting(const SurfaceMesh& mesh, const StepParams& p);
StepSolution step_dual_mdr_dewetting(const SurfaceMesh& mesh,
                                     const StepParams& p);
StepSolution step_bgn_dewetting(const SurfaceMesh& mesh, const StepParams& p);

}  // namespace geoflow
