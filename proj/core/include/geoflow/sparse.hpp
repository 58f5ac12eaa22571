#pragma once

#include <string>
#include <vector>

namespace geoflow {

struct Triplet {
  int row;
  int col;
  double value;
};

/// Assembly-order list of (row, col, value) contributions. Duplicate
/// coordinates are allowed and are summed on conversion to CSR.
class TripletMatrix {
 public:
  TripletMatrix(int rows, int cols);

  void add(int row, int col, double value);
  void reserve(std::size_t n) { entries_.reserve(n); }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<Triplet>& entries() const { return entries_; }

 private:
  int rows_;
  int cols_;
  std::vector<Triplet> entries_;
};

/// Compressed sparse row matrix with sorted, duplicate-free column indices.
class CsrMatrix {
 public:
  CsrMatrix() = default;

  /// Sums duplicate triplets. Throws std::invalid_argument if any entry is
  /// NaN or infinite, before or after summation.
  static CsrMatrix from_triplets(const TripletMatrix& t);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int nnz() const { return static_cast<int>(values_.size()); }

  const std::vector<int>& row_ptr() const { return row_ptr_; }
  const std::vector<int>& col_idx() const { return col_idx_; }
  const std::vector<double>& values() const { return values_; }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<int> row_ptr_{0};
  std::vector<int> col_idx_;
  std::vector<double> values_;
};

/// y = A x. Throws std::invalid_argument on dimension mismatch.
std::vector<double> spmv(const CsrMatrix& a, const std::vector<double>& x);

/// Writes `coordinate real general` MatrixMarket, 1-based indices,
/// 17 significant digits.
void write_matrix_market(const CsrMatrix& a, const std::string& path);

}  // namespace geoflow
