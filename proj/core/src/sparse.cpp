#include "geoflow/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include "geoflow/types.hpp"

namespace geoflow {

TripletMatrix::TripletMatrix(int rows, int cols) : rows_(rows), cols_(cols) {
  if (rows < 0 || cols < 0) {
    throw std::invalid_argument("TripletMatrix: negative dimension");
  }
}

void TripletMatrix::add(int row, int col, double value) {
  if (row < 0 || row >= rows_ || col < 0 || col >= cols_) {
    throw std::out_of_range("TripletMatrix::add: index out of range");
  }
  entries_.push_back({row, col, value});
}

CsrMatrix CsrMatrix::from_triplets(const TripletMatrix& t) {
  CsrMatrix m;
  m.rows_ = t.rows();
  m.cols_ = t.cols();
  const auto& entries = t.entries();

  for (const auto& e : entries) {
    if (!std::isfinite(e.value)) {
      throw std::invalid_argument("CsrMatrix: non-finite triplet entry");
    }
  }

  // Counting sort by row, then sort each row by column and merge duplicates.
  std::vector<int> counts(t.rows() + 1, 0);
  for (const auto& e : entries) counts[e.row + 1]++;
  std::partial_sum(counts.begin(), counts.end(), counts.begin());

  std::vector<int> order(entries.size());
  {
    std::vector<int> cursor(counts.begin(), counts.end() - 1);
    for (std::size_t i = 0; i < entries.size(); ++i) {
      order[cursor[entries[i].row]++] = static_cast<int>(i);
    }
  }

  m.row_ptr_.assign(t.rows() + 1, 0);
  m.col_idx_.reserve(entries.size());
  m.values_.reserve(entries.size());

  for (int r = 0; r < t.rows(); ++r) {
    const int lo = counts[r];
    const int hi = counts[r + 1];
    std::sort(order.begin() + lo, order.begin() + hi, [&](int a, int b) {
      return entries[a].col < entries[b].col;
    });
    for (int k = lo; k < hi; ++k) {
      const Triplet& e = entries[order[k]];
      if (m.row_ptr_[r + 1] > 0 && m.col_idx_.back() == e.col) {
        m.values_.back() += e.value;
      } else {
        m.col_idx_.push_back(e.col);
        m.values_.push_back(e.value);
        m.row_ptr_[r + 1]++;
      }
    }
    m.row_ptr_[r + 1] += m.row_ptr_[r];
  }

  for (double v : m.values_) {
    if (!std::isfinite(v)) {
      throw std::invalid_argument("CsrMatrix: non-finite entry after summing");
    }
  }
  return m;
}

std::vector<double> spmv(const CsrMatrix& a, const std::vector<double>& x) {
  if (static_cast<int>(x.size()) != a.cols()) {
    throw std::invalid_argument("spmv: dimension mismatch");
  }
  std::vector<double> y(a.rows(), 0.0);
  const auto& rp = a.row_ptr();
  const auto& ci = a.col_idx();
  const auto& val = a.values();
  for (int r = 0; r < a.rows(); ++r) {
    double acc = 0.0;
    for (int k = rp[r]; k < rp[r + 1]; ++k) acc += val[k] * x[ci[k]];
    y[r] = acc;
  }
  return y;
}

void write_matrix_market(const CsrMatrix& a, const std::string& path) {
  std::FILE* f = std::fopen(path.c_str(), "w");
  if (!f) throw IoError("cannot open for writing: " + path);
  std::fprintf(f, "%%%%MatrixMarket matrix coordinate real general\n");
  std::fprintf(f, "%d %d %d\n", a.rows(), a.cols(), a.nnz());
  for (int r = 0; r < a.rows(); ++r) {
    for (int k = a.row_ptr()[r]; k < a.row_ptr()[r + 1]; ++k) {
      std::fprintf(f, "%d %d %.17g\n", r + 1, a.col_idx()[k] + 1,
                   a.values()[k]);
    }
  }
  if (std::fclose(f) != 0) throw IoError("write failed: " + path);
}

}  // namespace geoflow
