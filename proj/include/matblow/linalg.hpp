#pragma once

#include <cstddef>
#include <vector>

#include "matblow/matrix.hpp"

namespace matblow {

/// Eigen-decomposition of a symmetric matrix.
struct EigenSym {
  std::vector<double> values;  ///< descending
  Matrix vectors;              ///< column k is the unit eigenvector of values[k]
};

/// A complex-conjugate pair real ± i*imag, imag > 0, read off a 2x2 Schur block.
struct ConjugatePair {
  double real;
  double imag;
};

/// Real part of the spectrum of a general real matrix.
struct RealSpectrum {
  std::vector<double> real_eigenvalues;  ///< with multiplicity, descending
  std::vector<ConjugatePair> complex_pairs;
  bool converged = true;  ///< false: QR iteration hit its cap, result is partial

  bool has_complex_pairs() const noexcept { return !complex_pairs.empty(); }
};

struct Norms {
  double frobenius;
  double operator2;
};

struct RayleighMax {
  double value;
  std::vector<double> witness;  ///< unit vector attaining the maximum
};

/// Cap on cyclic Jacobi sweeps before NoConvergence.
inline constexpr int kJacobiMaxSweeps = 100;
/// Relative pivot magnitude below which lu_solve reports SingularMatrix.
inline constexpr double kPivotThreshold = 1e-13;
/// Relative asymmetry accepted by the symmetric routines.
inline constexpr double kSymmetryTolerance = 1e-10;

Matrix mat_mul(const Matrix& a, const Matrix& b);

/// Solves m * S = rhs with partial pivoting.
/// Throws SingularMatrix when a pivot magnitude drops below 1e-13 * ||m||_F.
Matrix lu_solve(const Matrix& m, const Matrix& rhs);

/// Determinant via the same LU factorization; returns 0 for exactly singular input.
double determinant(const Matrix& m);

double frobenius_norm(const Matrix& m) noexcept;

/// ||m - m^T||_F.
double asymmetry(const Matrix& m) noexcept;

/// True when ||m - m^T||_F <= tol * (1 + ||m||_F).
bool is_symmetric(const Matrix& m, double tol = kSymmetryTolerance) noexcept;

/// Cyclic Jacobi. Iterates until the off-diagonal Frobenius mass drops below
/// 1e-12 * ||m||_F. Throws NotSymmetric or NoConvergence.
EigenSym eig_symmetric(const Matrix& m);

/// Householder Hessenberg reduction followed by shifted QR to real Schur form.
/// Never throws on non-convergence; check RealSpectrum::converged.
RealSpectrum real_eigenvalues(const Matrix& m);

/// max over unit x of <m x, x> and a maximizing unit vector. The witness sign is
/// fixed so that its largest-magnitude component is positive.
RayleighMax rayleigh_max(const Matrix& m);

Norms norms(const Matrix& m);

/// a*b - b*a.
Matrix commutator(const Matrix& a, const Matrix& b);

/// Q from a QR factorization of m with R's diagonal made positive.
/// Throws SingularMatrix for rank-deficient input.
Matrix orthogonal_factor(const Matrix& m);

}  // namespace matblow
