#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace matblow {

/// Dense real square matrix, row-major. Represents an element of End(W)
/// with dim W = n().
class Matrix {
 public:
  /// n x n zero matrix. Throws std::invalid_argument when n == 0.
  explicit Matrix(std::size_t n);
  /// Takes ownership of n*n row-major entries; every entry must be finite.
  Matrix(std::size_t n, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix zeros(std::size_t n) { return Matrix(n); }
  static Matrix diagonal(std::span<const double> values);
  static Matrix diagonal(std::initializer_list<double> values);

  std::size_t n() const noexcept { return n_; }

  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }

  std::span<const double> data() const noexcept { return data_; }
  std::span<double> data() noexcept { return data_; }

  std::vector<double> column(std::size_t j) const;
  Matrix transpose() const;
  double trace() const noexcept;
  bool all_finite() const noexcept;

  Matrix& operator+=(const Matrix& other);
  Matrix& operator-=(const Matrix& other);
  Matrix& operator*=(double s) noexcept;

  friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
  friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
  friend Matrix operator*(double s, Matrix a) { return a *= s; }
  friend Matrix operator*(Matrix a, double s) { return a *= s; }
  friend Matrix operator-(Matrix a) { return a *= -1.0; }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t n_;
  std::vector<double> data_;
};

}  // namespace matblow
