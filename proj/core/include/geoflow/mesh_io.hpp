#pragma once

#include <string>
#include <utility>
#include <vector>

#include "geoflow/mesh.hpp"
#include "geoflow/types.hpp"

namespace geoflow {

/// Per-vertex attributes attached to VTK output. Pointers must stay valid
/// for the duration of the call; sizes must match the vertex count.
struct VtkPointData {
  std::vector<std::pair<std::string, const ScalarField*>> scalars;
  std::vector<std::pair<std::string, const VectorField*>> vectors;
};

/// Reads .off or .obj (by extension, case-insensitive). Parse problems
/// raise ParseError with file name and line number; connectivity problems
/// raise TopologyError; a missing file raises IoError.
SurfaceMesh load_mesh(const std::string& path);

/// Writes .off, .obj or .vtk (legacy ASCII, unstructured grid of cell type
/// 5) by extension. Coordinates are written with 17 significant digits so a
/// round trip reproduces them exactly. Throws std::invalid_argument for an
/// empty mesh (no triangles), IoError on filesystem failure. `point_data`
/// applies to VTK only.
void save_mesh(const SurfaceMesh& mesh, const std::string& path,
               const VtkPointData* point_data = nullptr);

}  // namespace geoflow
