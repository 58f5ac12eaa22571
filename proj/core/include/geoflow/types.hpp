#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace geoflow {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Nodal scalar field, one value per mesh vertex.
using ScalarField = std::vector<double>;
/// Nodal vector field, one 3-vector per mesh vertex.
using VectorField = std::vector<Vec3>;

/// Malformed input file (bad header, bad token, non-triangle face, ...).
/// The message carries file name and line number where applicable.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Connectivity that cannot describe an oriented triangulated surface:
/// non-manifold edges, winding that no single global flip repairs,
/// out-of-range or repeated vertex indices.
struct TopologyError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Filesystem-level failure (missing file, unwritable path).
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Invalid or inconsistent run configuration.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Mesh fails the solvability assumptions of the evolution schemes.
struct AdmissibilityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace geoflow
