#include "geoflow/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace geoflow {

namespace {

// A direct solve either meets this relative residual or is reported singular.
constexpr double kDirectResidualBound = 1e-10;
constexpr int kGmresRestart = 50;

double norm2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

double rel_residual(const CsrMatrix& a, const std::vector<double>& x,
                    const std::vector<double>& b) {
  std::vector<double> r = spmv(a, x);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  const double nb = norm2(b);
  return nb > 0.0 ? norm2(r) / nb : norm2(r);
}

bool all_finite(const std::vector<double>& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

Eigen::SparseMatrix<double> to_eigen(const CsrMatrix& a) {
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(a.nnz());
  for (int r = 0; r < a.rows(); ++r) {
    for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
      trips.emplace_back(r, a.col_idx()[k], a.values()[k]);
    }
  }
  Eigen::SparseMatrix<double> m(a.rows(), a.cols());
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return m;
}

void solve_direct_lu(const CsrMatrix& a, const std::vector<double>& b,
                     std::vector<double>& x, SolveReport& report) {
  const int n = a.rows();
  Eigen::SparseMatrix<double> m = to_eigen(a);
  Eigen::SparseLU<Eigen::SparseMatrix<double>, Eigen::COLAMDOrdering<int>> lu;
  lu.analyzePattern(m);
  lu.factorize(m);
  x.assign(n, 0.0);
  if (lu.info() != Eigen::Success) {
    report.singular = true;
    report.residual = rel_residual(a, x, b);
    return;
  }
  Eigen::Map<const Eigen::VectorXd> bv(b.data(), n);
  Eigen::VectorXd xv = lu.solve(bv);

  // One pass of iterative refinement; cheap relative to the factorization.
  Eigen::VectorXd r = bv - m * xv;
  xv += lu.solve(r).eval();

  for (int i = 0; i < n; ++i) x[i] = xv[i];
  if (!all_finite(x)) {
    report.singular = true;
    x.assign(n, 0.0);
    report.residual = rel_residual(a, x, b);
    return;
  }
  report.residual = rel_residual(a, x, b);
  if (report.residual > kDirectResidualBound) report.singular = true;
}

// ILU(0): incomplete LU on the sparsity pattern of `a`. The factor reuses
// the CSR layout; L has unit diagonal.
struct Ilu0 {
  const CsrMatrix* pattern = nullptr;
  std::vector<double> lu;
  std::vector<int> diag;  // position of the diagonal entry per row
  bool ok = false;

  void factor(const CsrMatrix& a) {
    pattern = &a;
    const int n = a.rows();
    const auto& rp = a.row_ptr();
    const auto& ci = a.col_idx();
    lu = a.values();
    diag.assign(n, -1);
    ok = true;
    for (int i = 0; i < n; ++i) {
      for (int k = rp[i]; k < rp[i + 1]; ++k) {
        if (ci[k] == i) diag[i] = k;
      }
      if (diag[i] < 0) {
        ok = false;
        return;
      }
    }
    for (int i = 0; i < n; ++i) {
      for (int kk = rp[i]; kk < rp[i + 1]; ++kk) {
        const int k = ci[kk];
        if (k >= i) break;
        const double piv = lu[diag[k]];
        if (piv == 0.0) {
          ok = false;
          return;
        }
        const double lik = lu[kk] / piv;
        lu[kk] = lik;
        // row_i -= lik * row_k, restricted to the pattern of row i
        int p = kk + 1;
        for (int q = diag[k] + 1; q < rp[k + 1]; ++q) {
          const int col = ci[q];
          while (p < rp[i + 1] && ci[p] < col) ++p;
          if (p < rp[i + 1] && ci[p] == col) lu[p] -= lik * lu[q];
        }
      }
      if (lu[diag[i]] == 0.0) {
        ok = false;
        return;
      }
    }
  }

  // z = (LU)^{-1} r
  void apply(const std::vector<double>& r, std::vector<double>& z) const {
    const int n = pattern->rows();
    const auto& rp = pattern->row_ptr();
    const auto& ci = pattern->col_idx();
    z = r;
    for (int i = 0; i < n; ++i) {
      double acc = z[i];
      for (int k = rp[i]; ci[k] < i; ++k) acc -= lu[k] * z[ci[k]];
      z[i] = acc;
    }
    for (int i = n - 1; i >= 0; --i) {
      double acc = z[i];
      for (int k = diag[i] + 1; k < rp[i + 1]; ++k) acc -= lu[k] * z[ci[k]];
      z[i] = acc / lu[diag[i]];
    }
  }
};

void solve_gmres(const CsrMatrix& a, const std::vector<double>& b,
                 std::vector<double>& x, double tol, SolveReport& report) {
  const int n = a.rows();
  x.assign(n, 0.0);
  const double nb = norm2(b);
  if (nb == 0.0) {
    report.residual = 0.0;
    return;
  }

  Ilu0 prec;
  prec.factor(a);
  const bool use_prec = prec.ok;

  const long cap = 10L * n;
  const int m = std::min<long>(kGmresRestart, std::max<long>(1, cap));
  std::vector<std::vector<double>> v(m + 1, std::vector<double>(n));
  std::vector<std::vector<double>> h(m + 1, std::vector<double>(m, 0.0));
  std::vector<double> cs(m), sn(m), g(m + 1), y(m), z(n), w(n);

  std::vector<double> best_x = x;
  double best_res = rel_residual(a, x, b);
  long total_iters = 0;
  bool breakdown = false;

  while (total_iters < cap && !breakdown) {
    // r0 = M^{-1} (b - A x)
    std::vector<double> r = spmv(a, x);
    for (int i = 0; i < n; ++i) r[i] = b[i] - r[i];
    if (use_prec) {
      prec.apply(r, z);
    } else {
      z = r;
    }
    const double beta = norm2(z);
    if (!std::isfinite(beta)) {
      breakdown = true;
      break;
    }
    if (beta == 0.0) break;
    for (int i = 0; i < n; ++i) v[0][i] = z[i] / beta;
    std::fill(g.begin(), g.end(), 0.0);
    g[0] = beta;

    int k = 0;
    for (; k < m && total_iters < cap; ++k, ++total_iters) {
      w = spmv(a, v[k]);
      if (use_prec) {
        prec.apply(w, z);
      } else {
        z = w;
      }
      for (int j = 0; j <= k; ++j) {
        double dot = 0.0;
        for (int i = 0; i < n; ++i) dot += z[i] * v[j][i];
        h[j][k] = dot;
        for (int i = 0; i < n; ++i) z[i] -= dot * v[j][i];
      }
      const double hnext = norm2(z);
      if (!std::isfinite(hnext)) {
        breakdown = true;
        break;
      }
      h[k + 1][k] = hnext;
      if (hnext > 0.0) {
        for (int i = 0; i < n; ++i) v[k + 1][i] = z[i] / hnext;
      }
      for (int j = 0; j < k; ++j) {
        const double t = cs[j] * h[j][k] + sn[j] * h[j + 1][k];
        h[j + 1][k] = -sn[j] * h[j][k] + cs[j] * h[j + 1][k];
        h[j][k] = t;
      }
      const double denom = std::hypot(h[k][k], h[k + 1][k]);
      if (denom == 0.0) {
        breakdown = true;
        break;
      }
      cs[k] = h[k][k] / denom;
      sn[k] = h[k + 1][k] / denom;
      h[k][k] = denom;
      h[k + 1][k] = 0.0;
      g[k + 1] = -sn[k] * g[k];
      g[k] = cs[k] * g[k];
      // |g[k+1]| tracks the preconditioned residual; confirm with a true
      // residual at the restart boundary before accepting.
      if (std::abs(g[k + 1]) <= tol * 1e-2 * beta || hnext == 0.0) {
        ++k;
        ++total_iters;
        break;
      }
    }

    // back substitution on the k x k triangle
    for (int i = k - 1; i >= 0; --i) {
      double acc = g[i];
      for (int j = i + 1; j < k; ++j) acc -= h[i][j] * y[j];
      y[i] = h[i][i] != 0.0 ? acc / h[i][i] : 0.0;
    }
    for (int j = 0; j < k; ++j) {
      for (int i = 0; i < n; ++i) x[i] += y[j] * v[j][i];
    }

    const double res = all_finite(x) ? rel_residual(a, x, b)
                                     : std::numeric_limits<double>::infinity();
    if (std::isfinite(res) && res < best_res) {
      best_res = res;
      best_x = x;
    }
    if (res <= tol) break;
    if (k == 0) break;
  }

  x = best_x;
  report.iterations = static_cast<int>(total_iters);
  report.residual = best_res;
  if (breakdown || !all_finite(x)) report.singular = true;
}

}  // namespace

SolveReport solve(const CsrMatrix& a, const std::vector<double>& b,
                  std::vector<double>& x, const SolverOptions& opts) {
  if (a.rows() != a.cols()) {
    throw std::invalid_argument("solve: matrix must be square");
  }
  if (static_cast<int>(b.size()) != a.rows()) {
    throw std::invalid_argument("solve: right-hand side size mismatch");
  }
  if (!all_finite(b)) {
    throw std::invalid_argument("solve: non-finite right-hand side");
  }

  SolveReport report;
  report.method = opts.method;
  const auto t0 = std::chrono::steady_clock::now();
  if (opts.method == SolveMethod::DirectLU) {
    solve_direct_lu(a, b, x, report);
  } else {
    solve_gmres(a, b, x, opts.tol, report);
  }
  report.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();
  return report;
}

}  // namespace geoflow
