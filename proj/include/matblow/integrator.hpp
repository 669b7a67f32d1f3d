#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "matblow/matrix.hpp"

namespace matblow {

enum class RhsTag { SquareXX, BXX, XBX, XXB, CommutatorBXX, NormXX };
enum class NormChoice { Operator2, Frobenius };

std::string_view to_string(RhsTag tag) noexcept;
/// Accepts the short CLI names: square, bxx, xbx, xxb, commutator, norm.
std::optional<RhsTag> parse_rhs_tag(std::string_view name) noexcept;

/// Right-hand side of the matrix ODE dX/dt = F(X).
///
///   SquareXX       X.X
///   BXX            B.X.X
///   XBX            X.B.X
///   XXB            X.X.B
///   CommutatorBXX  [B,X].X
///   NormXX         |X| X
class RhsKind {
 public:
  /// Validates that `b` is present exactly when `tag` needs it.
  RhsKind(RhsTag tag, std::optional<Matrix> b = std::nullopt,
          NormChoice norm = NormChoice::Operator2);

  static RhsKind square() { return RhsKind(RhsTag::SquareXX); }
  static RhsKind bxx(Matrix b) { return RhsKind(RhsTag::BXX, std::move(b)); }
  static RhsKind xbx(Matrix b) { return RhsKind(RhsTag::XBX, std::move(b)); }
  static RhsKind xxb(Matrix b) { return RhsKind(RhsTag::XXB, std::move(b)); }
  static RhsKind commutator(Matrix b) { return RhsKind(RhsTag::CommutatorBXX, std::move(b)); }
  static RhsKind norm(NormChoice choice) { return RhsKind(RhsTag::NormXX, std::nullopt, choice); }

  static bool requires_b(RhsTag tag) noexcept;

  RhsTag tag() const noexcept { return tag_; }
  const std::optional<Matrix>& b() const noexcept { return b_; }
  NormChoice norm_choice() const noexcept { return norm_; }

 private:
  RhsTag tag_;
  std::optional<Matrix> b_;
  NormChoice norm_;
};

Matrix rhs_eval(const RhsKind& kind, const Matrix& x);

struct IntegrationOptions {
  double rtol = 1e-9;
  double atol = 1e-12;
  /// Frobenius norm above which the run stops with BlowupDetected.
  double blowup_norm = 1e8;
  /// dt_min = dt_min_factor * |horizon|.
  double dt_min_factor = 1e-13;
  /// 0 selects the starting step automatically.
  double initial_step = 0.0;
  std::size_t max_steps = 2'000'000;
  bool keep_snapshots = false;
  std::size_t max_snapshots = 1024;
  bool record_operator2 = false;
};

enum class TrajectoryStatus { Completed, BlowupDetected, StepUnderflow };
std::string_view to_string(TrajectoryStatus s) noexcept;

struct Snapshot {
  std::size_t step;  ///< index into Trajectory::times
  double t;
  Matrix x;
};

struct Trajectory {
  std::vector<double> times;  ///< signed, index 0 is t = 0
  std::vector<double> frob_norms;
  std::vector<double> operator2_norms;  ///< empty unless requested
  std::vector<Snapshot> snapshots;
  TrajectoryStatus status = TrajectoryStatus::StepUnderflow;
  Matrix final_state = Matrix(1);
  bool non_finite_encountered = false;
  bool step_collapsed = false;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
};

/// Dormand-Prince 5(4) with an I step controller. A negative horizon integrates
/// backward in time as dY/ds = -F(Y), s = -t.
Trajectory integrate(const RhsKind& kind, const Matrix& a, double horizon,
                     const IntegrationOptions& opts = {});

struct BlowupEstimate {
  double estimated_time;
  double t_lo;
  double t_hi;
  double fit_residual;  ///< RMS of the straight-line fit of 1/||X||
  int pole_order_assumed = 1;
};

/// Least-squares line through (t, 1/norm) and its root. Needs two distinct times.
BlowupEstimate fit_simple_pole(std::span<const double> times, std::span<const double> norms);

inline constexpr double kEstimatorMinNorm = 1e3;
inline constexpr std::size_t kEstimatorWindow = 8;

/// Fits the last 8 samples with ||X||_F >= 1e3. Throws InsufficientSamples.
BlowupEstimate estimate_blowup_time(const Trajectory& traj);

/// ||X_numeric(t) - X_exact(t)||_F / (1 + ||X_exact(t)||_F) for each t, integrating
/// from 0 to t separately. Allowed tags: BXX, XBX, XXB, and SquareXX when b = Id.
std::vector<double> compare_exact_numeric(const Matrix& a, const Matrix& b, RhsTag tag,
                                          std::span<const double> ts,
                                          const IntegrationOptions& opts = {});

/// CSV with header t,frob_norm (plus operator2_norm when recorded).
void write_trajectory_csv(std::ostream& out, const Trajectory& traj);

}  // namespace matblow
