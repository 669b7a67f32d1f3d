#include "matblow/matrix.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "matblow/errors.hpp"

namespace matblow {

Matrix::Matrix(std::size_t n) : n_(n), data_(n * n, 0.0) {
  if (n == 0) throw std::invalid_argument("matrix dimension must be at least 1");
}

Matrix::Matrix(std::size_t n, std::vector<double> entries) : n_(n), data_(std::move(entries)) {
  if (n == 0) throw std::invalid_argument("matrix dimension must be at least 1");
  if (data_.size() != n * n) {
    throw DimensionMismatch("expected " + std::to_string(n * n) + " entries, got " +
                            std::to_string(data_.size()));
  }
  if (!all_finite()) throw std::invalid_argument("matrix entries must be finite");
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) : n_(rows.size()) {
  if (n_ == 0) throw std::invalid_argument("matrix dimension must be at least 1");
  data_.reserve(n_ * n_);
  for (const auto& row : rows) {
    if (row.size() != n_) throw DimensionMismatch("matrix literal is not square");
    data_.insert(data_.end(), row.begin(), row.end());
  }
  if (!all_finite()) throw std::invalid_argument("matrix entries must be finite");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
  Matrix m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
  if (!m.all_finite()) throw std::invalid_argument("matrix entries must be finite");
  return m;
}

Matrix Matrix::diagonal(std::initializer_list<double> values) {
  return diagonal(std::span<const double>(values.begin(), values.size()));
}

std::vector<double> Matrix::column(std::size_t j) const {
  std::vector<double> c(n_);
  for (std::size_t i = 0; i < n_; ++i) c[i] = (*this)(i, j);
  return c;
}

Matrix Matrix::transpose() const {
  Matrix t(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

double Matrix::trace() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += (*this)(i, i);
  return s;
}

bool Matrix::all_finite() const noexcept {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix& Matrix::operator+=(const Matrix& other) {
  if (other.n_ != n_) throw DimensionMismatch("matrix sum: dimension mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
  if (other.n_ != n_) throw DimensionMismatch("matrix difference: dimension mismatch");
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

Matrix& Matrix::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

}  // namespace matblow
