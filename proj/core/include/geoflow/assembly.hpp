#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "geoflow/mesh.hpp"
#include "geoflow/sparse.hpp"
#include "geoflow/types.hpp"

namespace geoflow {

enum class TangentialForm {
  FullGradient,       // a(v,w) = int grad v : grad w, componentwise
  SymmetricGradient,  // a(v,w) = 1/2 int D(v):D(w), D(v) = P(grad v + grad v^T)P
};

/// Everything the evolution schemes consume, built in one deterministic
/// element-order pass over the mesh. Vector-valued nodal unknowns are
/// interleaved: component d of vertex q sits at index 3q + d.
struct OperatorSet {
  /// lumped mass M_q = sum over incident triangles of |K|/3
  ScalarField lumped_mass;
  /// lumped normal column N_q = sum over incident K of (|K|/3) n_K
  /// = M_q * (averaged vertex normal); the single matrix realizing every
  /// mass-lumped pairing with one normal factor
  VectorField lumped_normal;
  /// scalar P1 stiffness, n x n
  CsrMatrix stiffness;
  /// componentwise vector stiffness, 3n x 3n
  CsrMatrix vector_stiffness;
  /// the tangential bilinear form for the requested TangentialForm, 3n x 3n
  /// (aliases vector_stiffness values for FullGradient)
  CsrMatrix tangential_form;
  /// per-vertex 3x3 blocks sum over incident K of (|K|/3) n_K n_K^T
  std::vector<Mat3> bgn_normal_blocks;
  /// geometric load (vector_stiffness applied to the identity), length 3n
  std::vector<double> rhs_geometry;
  /// boundary terms (empty matrices / vectors for closed meshes)
  std::vector<double> boundary_load;
  CsrMatrix boundary_coupling;
};

OperatorSet assemble_operators(const SurfaceMesh& mesh,
                               TangentialForm form = TangentialForm::FullGradient);

/// Mass-lumped surface integral: sum over triangles K and corners j of
/// (|K|/3) * integrand(K, j), where integrand is evaluated per element
/// corner (discontinuous fields welcome).
double mass_lumped_integral(const SurfaceMesh& mesh,
                            const std::function<double(int, int)>& integrand);

/// The gradient part of the curvature constraint row: D[q, 3j+s] =
/// int grad phi_j e_s : grad(phi_q nhat) with nhat the vertex-normal field
/// interpolated linearly per element. The centroid rule used here is exact:
/// the integrand is affine on each element. The full row applied to a
/// deformed position field Y reads (lumped pairing) + D * Y.
CsrMatrix mdr_constraint_row(const SurfaceMesh& mesh);

/// Midpoint conormal terms of an open mesh, split so the contact-angle
/// boundary integral over a displaced loop is
///   cos(theta) * [load(w) + (tau/2) * coupling(v, w)].
/// Per directed boundary edge e = (p, q):
///   load(w)      += ((q - p) x e3) . (w_p + w_q) / 2
///   coupling(v,w) += ((v_q - v_p) x e3) . (w_p + w_q) / 2.
/// Requires every boundary vertex to lie in z = 0 (throws
/// std::invalid_argument otherwise). Closed meshes return empty terms.
std::pair<std::vector<double>, CsrMatrix> boundary_conormal_terms(
    const SurfaceMesh& mesh);

/// Signed area of a closed polygon projected to the z = 0 plane (shoelace);
/// positive for counterclockwise loops seen from +z.
double substrate_area(const std::vector<Vec3>& loop);

/// Sum of shoelace areas over all boundary loops of the mesh.
double substrate_area(const SurfaceMesh& mesh);

}  // namespace geoflow
