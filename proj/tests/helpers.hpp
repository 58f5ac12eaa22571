#pragma once

// Shared test utilities. The dense solver here is written from scratch on
// plain arrays (no Eigen) so it can serve as an independent oracle for the
// sparse solve path.

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "geoflow/mesh.hpp"
#include "geoflow/sparse.hpp"

namespace testutil {

using Dense = std::vector<std::vector<double>>;

inline Dense csr_to_dense(const geoflow::CsrMatrix& a) {
  Dense d(a.rows(), std::vector<double>(a.cols(), 0.0));
  for (int r = 0; r < a.rows(); ++r) {
    for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
      d[r][a.col_idx()[k]] += a.values()[k];
    }
  }
  return d;
}

// Gaussian elimination with partial pivoting. Throws on a zero pivot.
inline std::vector<double> dense_solve(Dense a, std::vector<double> b) {
  const int n = static_cast<int>(a.size());
  if (n == 0 || static_cast<int>(b.size()) != n) {
    throw std::invalid_argument("dense_solve: bad dimensions");
  }
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    if (std::abs(a[pivot][col]) < 1e-300) {
      throw std::runtime_error("dense_solve: singular matrix");
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (int r = col + 1; r < n; ++r) {
      const double f = a[r][col] / a[col][col];
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r][c] * x[c];
    x[r] = s / a[r][r];
  }
  return x;
}

inline double max_abs_diff(const std::vector<double>& a,
                           const std::vector<double>& b) {
  double m = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    m = std::max(m, std::abs(a[i] - b[i]));
  }
  return m;
}

// Icosphere with every vertex nudged radially and tangentially; stays
// admissible for the magnitudes used in the tests.
inline geoflow::SurfaceMesh perturbed_icosphere(int subdivisions,
                                                double magnitude,
                                                unsigned seed) {
  const geoflow::SurfaceMesh base = geoflow::gen_icosphere(subdivisions);
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> u(-magnitude, magnitude);
  std::vector<geoflow::Vec3> verts = base.vertices();
  for (auto& v : verts) {
    v += geoflow::Vec3(u(rng), u(rng), u(rng));
  }
  return geoflow::SurfaceMesh(verts, base.triangles());
}

// Single equilateral triangle in a tilted plane.
inline geoflow::SurfaceMesh one_triangle() {
  std::vector<geoflow::Vec3> v = {
      {0.0, 0.0, 0.0}, {1.0, 0.0, 0.2}, {0.3, 0.9, -0.1}};
  return geoflow::SurfaceMesh(v, {{0, 1, 2}});
}

// Unit-square patch in the z = 0 plane split into 2 n^2 right triangles,
// counterclockwise seen from +z (normal +e3).
inline geoflow::SurfaceMesh flat_patch(int n) {
  std::vector<geoflow::Vec3> verts;
  for (int j = 0; j <= n; ++j) {
    for (int i = 0; i <= n; ++i) {
      verts.emplace_back(double(i) / n, double(j) / n, 0.0);
    }
  }
  std::vector<std::array<int, 3>> tris;
  const auto id = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
      tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
    }
  }
  return geoflow::SurfaceMesh(verts, tris);
}

}  // namespace testutil
