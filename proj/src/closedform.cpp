#include "matblow/closedform.hpp"

#include <cmath>
#include <string>

#include "matblow/errors.hpp"
#include "matblow/linalg.hpp"

namespace matblow {

std::string_view to_string(Direction d) noexcept {
  return d == Direction::Forward ? "forward" : "backward";
}

std::string_view to_string(Verdict v) noexcept { return v == Verdict::Blowup ? "Blowup" : "Eternal"; }

std::string_view to_string(PredictionMethod m) noexcept {
  return m == PredictionMethod::SymmetricCommuting ? "SymmetricCommuting" : "GeneralRealSpectrum";
}

std::optional<double> BlowupReport::signed_blowup_time() const {
  if (!blowup_time) return std::nullopt;
  return direction == Direction::Forward ? *blowup_time : -*blowup_time;
}

namespace {

void require_commuting(const Matrix& a, const Matrix& b, const char* where) {
  const CommutationCheck c = commutes(a, b);
  if (!c.commutes) {
    throw NotCommuting(std::string(where) + ": A and B do not commute, ||AB-BA||_F = " +
                           std::to_string(c.residual),
                       c.residual);
  }
}

void require_symmetric(const Matrix& m, const char* name, const char* where) {
  if (!is_symmetric(m)) {
    throw NotSymmetric(std::string(where) + ": " + name + " is not symmetric", asymmetry(m));
  }
}

// AB of a symmetric commuting pair is symmetric up to rounding; remove the rounding.
Matrix symmetric_product(const Matrix& a, const Matrix& b) {
  const Matrix ab = mat_mul(a, b);
  return 0.5 * (ab + ab.transpose());
}

Matrix resolvent_operand(const Matrix& a, const Matrix& b, double t) {
  Matrix m = Matrix::identity(a.n());
  m -= t * mat_mul(a, b);
  return m;
}

BlowupReport blowup_from_rayleigh(const Matrix& product, Direction direction) {
  const double zero_tol = kZeroEigenvalueTolerance * frobenius_norm(product);
  // backward flow is the forward flow of the reflected product -AB
  const RayleighMax rm = rayleigh_max(direction == Direction::Forward ? product : -product);
  BlowupReport r;
  r.direction = direction;
  r.method = PredictionMethod::SymmetricCommuting;
  if (rm.value > zero_tol) {
    r.verdict = Verdict::Blowup;
    r.eigenvalue = rm.value;
    r.blowup_time = 1.0 / rm.value;
    r.witness = rm.witness;
  }
  return r;
}

}  // namespace

CommutationCheck commutes(const Matrix& a, const Matrix& b) {
  const double residual = frobenius_norm(commutator(a, b));
  const double rel = residual / (1.0 + frobenius_norm(a) * frobenius_norm(b));
  return {rel <= kCommutationTolerance, residual, rel};
}

Matrix exact_solution(const Matrix& a, const Matrix& b, double t) {
  require_commuting(a, b, "exact_solution");
  const Matrix m = resolvent_operand(a, b, t);
  // X (Id - tAB) = A, solved as (Id - tAB)^T X^T = A^T
  try {
    return lu_solve(m.transpose(), a.transpose()).transpose();
  } catch (const SingularMatrix& e) {
    throw SingularResolvent("exact_solution: Id - t*A*B is singular at t = " + std::to_string(t),
                            e.pivot(), t);
  }
}

Matrix sullivan_solution(const Matrix& a, double t) {
  return exact_solution(a, Matrix::identity(a.n()), t);
}

BlowupReport predict_from_spectrum(const Matrix& product, Direction direction) {
  const double zero_tol = kZeroEigenvalueTolerance * frobenius_norm(product);
  const RealSpectrum spec = real_eigenvalues(direction == Direction::Forward ? product : -product);
  if (!spec.converged) throw NoConvergence("predict_blowup: real Schur iteration did not converge");
  BlowupReport r;
  r.direction = direction;
  r.method = PredictionMethod::GeneralRealSpectrum;
  // real_eigenvalues is sorted descending; the first positive eigenvalue is the first pole
  if (!spec.real_eigenvalues.empty() && spec.real_eigenvalues.front() > zero_tol) {
    const double lambda = spec.real_eigenvalues.front();
    r.verdict = Verdict::Blowup;
    r.eigenvalue = lambda;
    r.blowup_time = 1.0 / lambda;
  }
  return r;
}

BlowupReport predict_blowup(const Matrix& a, const Matrix& b, Direction direction) {
  require_commuting(a, b, "predict_blowup");
  if (is_symmetric(a) && is_symmetric(b)) {
    return blowup_from_rayleigh(symmetric_product(a, b), direction);
  }
  return predict_from_spectrum(mat_mul(a, b), direction);
}

double resolvent_identity_check(const Matrix& a, const Matrix& b, double t) {
  const Matrix x = exact_solution(a, b, t);
  return frobenius_norm(mat_mul(x, resolvent_operand(a, b, t)) - a);
}

double lambda_curve(const Matrix& a, const Matrix& b, double t) {
  require_symmetric(a, "A", "lambda_curve");
  require_symmetric(b, "B", "lambda_curve");
  require_commuting(a, b, "lambda_curve");
  return rayleigh_max(t * symmetric_product(a, b)).value;
}

std::optional<double> first_crossing(const Matrix& a, const Matrix& b) {
  require_symmetric(a, "A", "first_crossing");
  require_symmetric(b, "B", "first_crossing");
  require_commuting(a, b, "first_crossing");
  const Matrix ab = symmetric_product(a, b);
  const double eps = kZeroEigenvalueTolerance * frobenius_norm(ab);
  if (rayleigh_max(ab).value <= eps) return std::nullopt;

  // lambda(0) = 0 < 1 and lambda(10/eps) > 10: the bracket holds the crossing
  double lo = 0.0;
  double hi = 10.0 / eps;
  for (int it = 0; it < 2000 && hi - lo > 1e-12 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (lambda_curve(a, b, mid) >= 1.0) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace matblow
