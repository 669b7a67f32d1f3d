#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "matblow/matrix.hpp"

namespace matblow {

enum class Direction { Forward, Backward };
enum class Verdict { Blowup, Eternal };

/// SymmetricCommuting: A and B symmetric, the Rayleigh maximum of AB gives the
/// pole and a witness vector. GeneralRealSpectrum: the pole is read off the real
/// spectrum of AB and is a candidate only (the numerator A may cancel it).
enum class PredictionMethod { SymmetricCommuting, GeneralRealSpectrum };

std::string_view to_string(Direction d) noexcept;
std::string_view to_string(Verdict v) noexcept;
std::string_view to_string(PredictionMethod m) noexcept;

/// Outcome of the spectral blowup predictor.
///
/// Backward flow is handled by time reflection: X(-s) solves dY/ds = -B*Y*Y,
/// i.e. the forward problem for the pair (A, -B). In the backward direction
/// `eigenvalue` is therefore an eigenvalue of -AB (positive when the flow blows
/// up), `blowup_time` is the positive reflected time |T|, and `witness`
/// satisfies (-AB) w = eigenvalue * w. The blowup happens at t = -blowup_time.
struct BlowupReport {
  Direction direction = Direction::Forward;
  Verdict verdict = Verdict::Eternal;
  std::optional<double> blowup_time;
  std::optional<double> eigenvalue;
  std::optional<std::vector<double>> witness;
  PredictionMethod method = PredictionMethod::GeneralRealSpectrum;
  /// Set when the caller bypassed the commutation requirement.
  bool forced = false;

  /// Signed time of the pole on the real t axis (negative for backward flow).
  std::optional<double> signed_blowup_time() const;
};

struct CommutationCheck {
  bool commutes;
  double residual;           ///< ||AB - BA||_F
  double relative_residual;  ///< residual / (1 + ||A||_F ||B||_F)
};

/// Relative commutator residual at or below which a pair counts as commuting.
inline constexpr double kCommutationTolerance = 1e-10;
/// Eigenvalues of AB with |lambda| below this times ||AB||_F are treated as zero.
inline constexpr double kZeroEigenvalueTolerance = 1e-12;

CommutationCheck commutes(const Matrix& a, const Matrix& b);

/// X(t) = A (Id - t*A*B)^{-1}. Throws NotCommuting or SingularResolvent.
Matrix exact_solution(const Matrix& a, const Matrix& b, double t);

/// The B = Id case, X(t) = A (Id - t*A)^{-1}.
Matrix sullivan_solution(const Matrix& a, double t);

/// Throws NotCommuting unless A*B = B*A.
BlowupReport predict_blowup(const Matrix& a, const Matrix& b, Direction direction);

/// Reads a (candidate) pole from the real spectrum of `product` without any
/// commutation check. predict_blowup uses this for the non-symmetric branch;
/// callers forcing a non-commuting pair get a report with forced = true.
BlowupReport predict_from_spectrum(const Matrix& product, Direction direction);

/// ||X(t) (Id - t*A*B) - A||_F.
double resolvent_identity_check(const Matrix& a, const Matrix& b, double t);

/// lambda(t) = max over unit x of <t*A*B x, x>. Requires symmetric commuting A, B.
double lambda_curve(const Matrix& a, const Matrix& b, double t);

/// Smallest T > 0 with lambda_curve(a, b, T) = 1, located by bisection;
/// nullopt when the curve never reaches 1.
std::optional<double> first_crossing(const Matrix& a, const Matrix& b);

}  // namespace matblow
