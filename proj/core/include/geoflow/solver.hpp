#pragma once

#include <vector>

#include "geoflow/sparse.hpp"

namespace geoflow {

enum class SolveMethod {
  DirectLU,  // sparse LU, the default
  Gmres,     // restarted GMRES with ILU(0)
};

struct SolverOptions {
  SolveMethod method = SolveMethod::DirectLU;
  double tol = 1e-10;  // relative residual target (GMRES stopping test)
};

struct SolveReport {
  SolveMethod method = SolveMethod::DirectLU;
  int iterations = 0;
  /// ||Ax-b|| / ||b||, recomputed from the returned x by an spmv pass,
  /// never taken from solver internals.
  double residual = 0.0;
  double seconds = 0.0;
  bool singular = false;
};

/// Solves A x = b. On singular or numerically failed systems the report's
/// `singular` flag is set and x holds the best (possibly useless) iterate;
/// no exception is thrown for rank deficiency. Throws std::invalid_argument
/// for dimension mismatch, a non-square matrix, or non-finite b.
SolveReport solve(const CsrMatrix& a, const std::vector<double>& b,
                  std::vector<double>& x, const SolverOptions& opts = {});

}  // namespace geoflow
