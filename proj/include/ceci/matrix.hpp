#pragma once

#include <vector>

namespace ceci {

// Dense row-major matrix of doubles. Value type; all layer math in the
// project runs on these.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {}

  static Matrix constant(int rows, int cols, double v);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
  double operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

  double* row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
  const double* row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  void fill(double v);
  bool all_finite() const;

  bool operator==(const Matrix&) const = default;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_at(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_bt(const Matrix& a, const Matrix& b);

void add_inplace(Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
double max_abs_diff(const Matrix& a, const Matrix& b);

}  // namespace ceci
