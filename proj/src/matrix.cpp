#include "ceci/matrix.hpp"

#include <algorithm>
#include <cmath>

#include "ceci/text.hpp"

namespace ceci {

Matrix Matrix::constant(int rows, int cols, double v) {
  Matrix m(rows, cols);
  m.fill(v);
  return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

static void check_mul(int ac, int br, const char* op) {
  if (ac != br) throw Error(std::string(op) + ": inner dimension mismatch");
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  check_mul(a.cols(), b.rows(), "matmul");
  Matrix c(a.rows(), b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
  for (int i = 0; i < n; ++i) {
    double* ci = c.row(i);
    const double* ai = a.row(i);
    for (int p = 0; p < k; ++p) {
      const double av = ai[p];
      if (av == 0.0) continue;
      const double* bp = b.row(p);
      for (int j = 0; j < m; ++j) ci[j] += av * bp[j];
    }
  }
  return c;
}

Matrix matmul_at(const Matrix& a, const Matrix& b) {
  check_mul(a.rows(), b.rows(), "matmul_at");
  Matrix c(a.cols(), b.cols());
  const int n = a.rows(), k = a.cols(), m = b.cols();
  for (int p = 0; p < n; ++p) {
    const double* ap = a.row(p);
    const double* bp = b.row(p);
    for (int i = 0; i < k; ++i) {
      const double av = ap[i];
      if (av == 0.0) continue;
      double* ci = c.row(i);
      for (int j = 0; j < m; ++j) ci[j] += av * bp[j];
    }
  }
  return c;
}

Matrix matmul_bt(const Matrix& a, const Matrix& b) {
  check_mul(a.cols(), b.cols(), "matmul_bt");
  Matrix c(a.rows(), b.rows());
  const int n = a.rows(), k = a.cols(), m = b.rows();
  for (int i = 0; i < n; ++i) {
    const double* ai = a.row(i);
    double* ci = c.row(i);
    for (int j = 0; j < m; ++j) {
      const double* bj = b.row(j);
      double acc = 0.0;
      for (int p = 0; p < k; ++p) acc += ai[p] * bj[p];
      ci[j] = acc;
    }
  }
  return c;
}

void add_inplace(Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error("add_inplace: shape mismatch");
  for (size_t i = 0; i < a.data().size(); ++i) a.data()[i] += b.data()[i];
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error("hadamard: shape mismatch");
  Matrix c(a.rows(), a.cols());
  for (size_t i = 0; i < a.data().size(); ++i) c.data()[i] = a.data()[i] * b.data()[i];
  return c;
}

double max_abs_diff(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error("max_abs_diff: shape mismatch");
  double m = 0.0;
  for (size_t i = 0; i < a.data().size(); ++i)
    m = std::max(m, std::fabs(a.data()[i] - b.data()[i]));
  return m;
}

}  // namespace ceci
