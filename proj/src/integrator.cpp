#include "matblow/integrator.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "matblow/closedform.hpp"
#include "matblow/errors.hpp"
#include "matblow/linalg.hpp"
#include "matblow/matrix_io.hpp"

namespace matblow {

std::string_view to_string(RhsTag tag) noexcept {
  switch (tag) {
    case RhsTag::SquareXX: return "SquareXX";
    case RhsTag::BXX: return "BXX";
    case RhsTag::XBX: return "XBX";
    case RhsTag::XXB: return "XXB";
    case RhsTag::CommutatorBXX: return "CommutatorBXX";
    case RhsTag::NormXX: return "NormXX";
  }
  return "?";
}

std::optional<RhsTag> parse_rhs_tag(std::string_view name) noexcept {
  if (name == "square") return RhsTag::SquareXX;
  if (name == "bxx") return RhsTag::BXX;
  if (name == "xbx") return RhsTag::XBX;
  if (name == "xxb") return RhsTag::XXB;
  if (name == "commutator") return RhsTag::CommutatorBXX;
  if (name == "norm") return RhsTag::NormXX;
  return std::nullopt;
}

std::string_view to_string(TrajectoryStatus s) noexcept {
  switch (s) {
    case TrajectoryStatus::Completed: return "Completed";
    case TrajectoryStatus::BlowupDetected: return "BlowupDetected";
    case TrajectoryStatus::StepUnderflow: return "StepUnderflow";
  }
  return "?";
}

bool RhsKind::requires_b(RhsTag tag) noexcept {
  return tag == RhsTag::BXX || tag == RhsTag::XBX || tag == RhsTag::XXB ||
         tag == RhsTag::CommutatorBXX;
}

RhsKind::RhsKind(RhsTag tag, std::optional<Matrix> b, NormChoice norm)
    : tag_(tag), b_(std::move(b)), norm_(norm) {
  if (requires_b(tag) && !b_) {
    throw InvalidOptions(std::string(to_string(tag)) + " requires a B matrix");
  }
  if (!requires_b(tag) && b_) {
    throw InvalidOptions(std::string(to_string(tag)) + " does not take a B matrix");
  }
}

Matrix rhs_eval(const RhsKind& kind, const Matrix& x) {
  if (kind.b() && kind.b()->n() != x.n()) {
    throw DimensionMismatch("rhs_eval: B is " + std::to_string(kind.b()->n()) + "x" +
                            std::to_string(kind.b()->n()) + ", state is " +
                            std::to_string(x.n()) + "x" + std::to_string(x.n()));
  }
  switch (kind.tag()) {
    case RhsTag::SquareXX: return mat_mul(x, x);
    case RhsTag::BXX: return mat_mul(*kind.b(), mat_mul(x, x));
    case RhsTag::XBX: return mat_mul(mat_mul(x, *kind.b()), x);
    case RhsTag::XXB: return mat_mul(mat_mul(x, x), *kind.b());
    case RhsTag::CommutatorBXX: return mat_mul(commutator(*kind.b(), x), x);
    case RhsTag::NormXX: {
      const double s = kind.norm_choice() == NormChoice::Frobenius ? frobenius_norm(x)
                                                                   : norms(x).operator2;
      return s * x;
    }
  }
  throw InvalidOptions("rhs_eval: unknown right-hand side");
}

namespace {

// Dormand-Prince 5(4) tableau
constexpr double a21 = 1.0 / 5.0;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0,
                 a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                 a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                 b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
// fifth-order weights minus embedded fourth-order weights
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                 e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

constexpr double kSafety = 0.9;
constexpr double kMinFactor = 0.2;
constexpr double kMaxFactor = 5.0;

// y + h * sum(c_i k_i) without temporaries per term
Matrix combine(const Matrix& y, double h, std::initializer_list<std::pair<double, const Matrix*>> terms) {
  Matrix out = y;
  auto dst = out.data();
  for (const auto& [c, k] : terms) {
    if (c == 0.0) continue;
    const double hc = h * c;
    auto src = k->data();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += hc * src[i];
  }
  return out;
}

bool finite(const Matrix& m) { return m.all_finite(); }

class Stepper {
 public:
  Stepper(const RhsKind& kind, double sign) : kind_(kind), sign_(sign) {}

  Matrix f(const Matrix& y) const {
    Matrix d = rhs_eval(kind_, y);
    if (sign_ < 0.0) d *= -1.0;
    return d;
  }

  struct Trial {
    Matrix y_new;
    Matrix k7;
    double err;
  };

  Trial step(const Matrix& y, const Matrix& k1, double h) const {
    const Matrix k2 = f(combine(y, h, {{a21, &k1}}));
    const Matrix k3 = f(combine(y, h, {{a31, &k1}, {a32, &k2}}));
    const Matrix k4 = f(combine(y, h, {{a41, &k1}, {a42, &k2}, {a43, &k3}}));
    const Matrix k5 = f(combine(y, h, {{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
    const Matrix k6 = f(combine(y, h, {{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
    Matrix y_new = combine(y, h, {{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
    Matrix k7 = f(y_new);
    Matrix zero(y.n());
    const Matrix diff =
        combine(zero, h, {{e1, &k1}, {e3, &k3}, {e4, &k4}, {e5, &k5}, {e6, &k6}, {e7, &k7}});
    return {std::move(y_new), std::move(k7), frobenius_norm(diff)};
  }

 private:
  const RhsKind& kind_;
  double sign_;
};

// Starting step heuristic (Hairer, Norsett & Wanner, II.4) on Frobenius norms.
double initial_step(const Stepper& stepper, const Matrix& y, const Matrix& f0, double span,
                    const IntegrationOptions& opts) {
  const double sc = opts.atol + opts.rtol * frobenius_norm(y);
  const double d0 = frobenius_norm(y) / sc;
  const double d1 = frobenius_norm(f0) / sc;
  double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
  h0 = std::min(h0, span);
  const Matrix y1 = combine(y, h0, {{1.0, &f0}});
  const Matrix f1 = stepper.f(y1);
  double d2 = finite(f1) ? frobenius_norm(f1 - f0) / sc / h0 : std::numeric_limits<double>::infinity();
  const double dmax = std::max(d1, d2);
  const double h1 = dmax <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dmax, 0.2);
  return std::min({100.0 * h0, h1, span});
}

void record_snapshot(Trajectory& traj, std::size_t& stride, std::size_t max_snapshots,
                     std::size_t step, double t, const Matrix& y) {
  if (step % stride != 0) return;
  traj.snapshots.push_back({step, t, y});
  if (traj.snapshots.size() <= max_snapshots) return;
  stride *= 2;
  std::erase_if(traj.snapshots, [&](const Snapshot& s) { return s.step % stride != 0; });
}

}  // namespace

Trajectory integrate(const RhsKind& kind, const Matrix& a, double horizon,
                     const IntegrationOptions& opts) {
  if (!(std::abs(horizon) > 0.0) || !std::isfinite(horizon)) {
    throw InvalidOptions("integrate: horizon must be finite and non-zero");
  }
  if (!(opts.rtol > 0.0) || !(opts.atol > 0.0) || !(opts.blowup_norm > 0.0) ||
      !(opts.dt_min_factor > 0.0) || opts.initial_step < 0.0 || opts.max_steps == 0 ||
      (opts.keep_snapshots && opts.max_snapshots == 0)) {
    throw InvalidOptions("integrate: tolerances and limits must be positive");
  }
  if (kind.b() && kind.b()->n() != a.n()) {
    throw DimensionMismatch("integrate: B and initial state differ in dimension");
  }

  const double sign = horizon > 0.0 ? 1.0 : -1.0;
  const double span = std::abs(horizon);
  const double dt_min = opts.dt_min_factor * span;
  const Stepper stepper(kind, sign);

  Trajectory traj;
  std::size_t stride = 1;
  auto record = [&](double s, const Matrix& y) {
    const std::size_t step = traj.times.size();
    traj.times.push_back(sign * s);
    traj.frob_norms.push_back(frobenius_norm(y));
    if (opts.record_operator2) traj.operator2_norms.push_back(norms(y).operator2);
    if (opts.keep_snapshots) record_snapshot(traj, stride, opts.max_snapshots, step, sign * s, y);
  };

  Matrix y = a;
  double s = 0.0;
  record(s, y);
  Matrix k1 = stepper.f(y);
  double h = opts.initial_step > 0.0 ? std::min(opts.initial_step, span)
                                     : initial_step(stepper, y, k1, span, opts);

  while (true) {
    const double remaining = span - s;
    if (h < dt_min && remaining > dt_min) {
      traj.status = TrajectoryStatus::BlowupDetected;
      traj.step_collapsed = true;
      break;
    }
    if (traj.accepted_steps + traj.rejected_steps >= opts.max_steps) {
      traj.status = TrajectoryStatus::StepUnderflow;
      break;
    }
    const bool last = h >= remaining;
    const double dt = last ? remaining : h;
    Stepper::Trial trial = stepper.step(y, k1, dt);

    if (!std::isfinite(trial.err) || !finite(trial.y_new) || !finite(trial.k7)) {
      traj.non_finite_encountered = true;
      ++traj.rejected_steps;
      h = dt * kMinFactor;
      continue;
    }
    const double tol =
        opts.atol + opts.rtol * std::max(frobenius_norm(y), frobenius_norm(trial.y_new));
    const double factor =
        trial.err == 0.0
            ? kMaxFactor
            : std::clamp(kSafety * std::pow(tol / trial.err, 0.2), kMinFactor, kMaxFactor);
    if (trial.err > tol) {
      ++traj.rejected_steps;
      h = dt * factor;
      continue;
    }

    ++traj.accepted_steps;
    s = last ? span : s + dt;
    y = std::move(trial.y_new);
    k1 = std::move(trial.k7);
    record(s, y);
    if (traj.frob_norms.back() > opts.blowup_norm) {
      traj.status = TrajectoryStatus::BlowupDetected;
      break;
    }
    if (last) {
      traj.status = TrajectoryStatus::Completed;
      break;
    }
    h = dt * factor;
  }
  traj.final_state = y;
  return traj;
}

BlowupEstimate fit_simple_pole(std::span<const double> times, std::span<const double> norms) {
  if (times.size() != norms.size() || times.size() < 2) {
    throw InsufficientSamples("fit_simple_pole: need at least two (t, norm) samples");
  }
  const std::size_t k = times.size();
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    tm += times[i];
    ym += 1.0 / norms[i];
  }
  tm /= static_cast<double>(k);
  ym /= static_cast<double>(k);
  double stt = 0.0, sty = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double dt = times[i] - tm;
    stt += dt * dt;
    sty += dt * (1.0 / norms[i] - ym);
  }
  if (stt == 0.0 || sty == 0.0) {
    throw InsufficientSamples("fit_simple_pole: samples do not determine a line with a root");
  }
  const double slope = sty / stt;
  double ss = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double r = 1.0 / norms[i] - (ym + slope * (times[i] - tm));
    ss += r * r;
  }
  BlowupEstimate est{};
  est.estimated_time = tm - ym / slope;
  est.t_lo = std::min(times.front(), times.back());
  est.t_hi = std::max(times.front(), times.back());
  est.fit_residual = std::sqrt(ss / static_cast<double>(k));
  return est;
}

BlowupEstimate estimate_blowup_time(const Trajectory& traj) {
  if (traj.status != TrajectoryStatus::BlowupDetected) {
    throw InsufficientSamples("estimate_blowup_time: trajectory did not detect a blowup");
  }
  std::vector<double> ts, ns;
  for (std::size_t i = traj.times.size(); i-- > 0 && ts.size() < kEstimatorWindow;) {
    const double nrm = traj.frob_norms[i];
    if (std::isfinite(nrm) && nrm >= kEstimatorMinNorm) {
      ts.push_back(traj.times[i]);
      ns.push_back(nrm);
    }
  }
  if (ts.size() < kEstimatorWindow) {
    throw InsufficientSamples("estimate_blowup_time: only " + std::to_string(ts.size()) +
                              " samples with ||X||_F >= 1e3, need 8");
  }
  std::reverse(ts.begin(), ts.end());
  std::reverse(ns.begin(), ns.end());
  return fit_simple_pole(ts, ns);
}

std::vector<double> compare_exact_numeric(const Matrix& a, const Matrix& b, RhsTag tag,
                                          std::span<const double> ts,
                                          const IntegrationOptions& opts) {
  const CommutationCheck cc = commutes(a, b);
  if (!cc.commutes) {
    throw NotCommuting("compare_exact_numeric: ||AB-BA||_F = " + std::to_string(cc.residual),
                       cc.residual);
  }
  std::optional<RhsKind> kind;
  switch (tag) {
    case RhsTag::BXX:
    case RhsTag::XBX:
    case RhsTag::XXB: kind.emplace(tag, b); break;
    case RhsTag::SquareXX:
      if (b != Matrix::identity(b.n())) {
        throw InvalidOptions("compare_exact_numeric: SquareXX has a closed form only for B = Id");
      }
      kind.emplace(tag);
      break;
    default:
      throw InvalidOptions("compare_exact_numeric: no closed form for " +
                           std::string(to_string(tag)));
  }

  std::vector<double> errors;
  errors.reserve(ts.size());
  for (double t : ts) {
    const Matrix exact = exact_solution(a, b, t);
    if (t == 0.0) {
      errors.push_back(frobenius_norm(a - exact) / (1.0 + frobenius_norm(exact)));
      continue;
    }
    const Trajectory traj = integrate(*kind, a, t, opts);
    if (traj.status != TrajectoryStatus::Completed) {
      throw IntegrationFailed("compare_exact_numeric: integration to t = " + format_double(t) +
                              " ended with " + std::string(to_string(traj.status)));
    }
    errors.push_back(frobenius_norm(traj.final_state - exact) / (1.0 + frobenius_norm(exact)));
  }
  return errors;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const bool op2 = !traj.operator2_norms.empty();
  out << (op2 ? "t,frob_norm,operator2_norm\n" : "t,frob_norm\n");
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    out << format_double(traj.times[i]) << ',' << format_double(traj.frob_norms[i]);
    if (op2) out << ',' << format_double(traj.operator2_norms[i]);
    out << '\n';
  }
}

}  // namespace matblow
