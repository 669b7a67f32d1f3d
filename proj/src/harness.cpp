#include "matblow/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <ostream>
#include <thread>

#include <json.hpp>

#include "matblow/errors.hpp"
#include "matblow/linalg.hpp"
#include "matblow/matrix_io.hpp"

namespace matblow {

std::string_view to_string(EnsembleTag tag) noexcept {
  switch (tag) {
    case EnsembleTag::Ginibre: return "ginibre";
    case EnsembleTag::GOE: return "goe";
    case EnsembleTag::SkewSymmetric: return "skew";
    case EnsembleTag::CommutingSymmetricPair: return "commuting";
    case EnsembleTag::DiagonalPair: return "diagonal";
  }
  return "?";
}

std::optional<EnsembleTag> parse_ensemble_tag(std::string_view name) noexcept {
  for (EnsembleTag t : {EnsembleTag::Ginibre, EnsembleTag::GOE, EnsembleTag::SkewSymmetric,
                        EnsembleTag::CommutingSymmetricPair, EnsembleTag::DiagonalPair}) {
    if (name == to_string(t)) return t;
  }
  return std::nullopt;
}

std::string_view to_string(BPolicy p) noexcept {
  return p == BPolicy::Identity ? "identity" : "pair";
}

void EnsembleKind::validate() const {
  if (n == 0) throw InvalidOptions("ensemble dimension must be at least 1");
  if (!(scale > 0.0) || !std::isfinite(scale)) throw InvalidOptions("ensemble scale must be positive");
}

namespace {

// SplitMix64 keyed by (tag, seed, index): each trial owns an independent
// stream. Normal variates come from Box-Muller rather than
// std::normal_distribution, whose algorithm is implementation-defined.
class NormalSource {
 public:
  NormalSource(EnsembleTag tag, std::uint64_t seed, std::uint64_t index) {
    std::uint64_t k = seed;
    state_ = mix(k);
    k = index ^ (static_cast<std::uint64_t>(tag) << 56);
    state_ ^= mix(k);
  }

  double operator()() {
    if (cached_) {
      cached_ = false;
      return spare_;
    }
    // Box-Muller on (0,1] x [0,1)
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    cached_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t mix(std::uint64_t& x) {
    std::uint64_t z = (x += 0x9E3779B97F4A7C15ull);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  double uniform() { return static_cast<double>(mix(state_) >> 11) * 0x1.0p-53; }

  std::uint64_t state_;
  double spare_ = 0.0;
  bool cached_ = false;
};

Matrix gaussian(NormalSource& rng, std::size_t n, double scale) {
  Matrix m(n);
  for (double& v : m.data()) v = scale * rng();
  return m;
}

std::vector<double> gaussian_vector(NormalSource& rng, std::size_t n, double scale) {
  std::vector<double> v(n);
  for (double& x : v) x = scale * rng();
  return v;
}

Matrix exact_symmetric_part(const Matrix& m) {
  Matrix s = m;
  for (std::size_t i = 0; i < m.n(); ++i)
    for (std::size_t j = i + 1; j < m.n(); ++j) {
      const double v = 0.5 * (m(i, j) + m(j, i));
      s(i, j) = v;
      s(j, i) = v;
    }
  return s;
}

Matrix conjugate_diagonal(const Matrix& q, const std::vector<double>& d) {
  const std::size_t n = q.n();
  Matrix qd = q;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) qd(i, j) *= d[j];
  return exact_symmetric_part(mat_mul(qd, q.transpose()));
}

template <typename Fn>
std::vector<TrialRecord> run_trials(std::size_t trials, unsigned threads, Fn&& trial) {
  std::vector<TrialRecord> records(trials);
  const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(trials)));
  if (workers == 1) {
    for (std::size_t i = 0; i < trials; ++i) records[i] = trial(static_cast<std::uint64_t>(i));
    return records;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < trials;) {
        records[i] = trial(static_cast<std::uint64_t>(i));
      }
    });
  }
  pool.clear();
  return records;
}

double quantile_sorted(const std::vector<double>& v, double q) {
  const double pos = q * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

Sample sample_ensemble(const EnsembleKind& kind, std::uint64_t seed, std::uint64_t index) {
  kind.validate();
  NormalSource rng(kind.tag, seed, index);
  const std::size_t n = kind.n;
  switch (kind.tag) {
    case EnsembleTag::Ginibre: return {gaussian(rng, n, kind.scale), std::nullopt};
    case EnsembleTag::GOE: return {exact_symmetric_part(gaussian(rng, n, kind.scale)), std::nullopt};
    case EnsembleTag::SkewSymmetric: {
      const Matrix g = gaussian(rng, n, kind.scale);
      Matrix s(n);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
          s(i, j) = 0.5 * (g(i, j) - g(j, i));
          s(j, i) = -s(i, j);
        }
      return {s, std::nullopt};
    }
    case EnsembleTag::CommutingSymmetricPair: {
      // a Gaussian matrix is singular with probability zero; redraw if it happens anyway
      std::optional<Matrix> q;
      while (!q) {
        try {
          q = orthogonal_factor(gaussian(rng, n, 1.0));
        } catch (const SingularMatrix&) {
        }
      }
      const std::vector<double> d1 = gaussian_vector(rng, n, kind.scale);
      const std::vector<double> d2 = gaussian_vector(rng, n, kind.scale);
      return {conjugate_diagonal(*q, d1), conjugate_diagonal(*q, d2)};
    }
    case EnsembleTag::DiagonalPair: {
      const std::vector<double> d1 = gaussian_vector(rng, n, kind.scale);
      const std::vector<double> d2 = gaussian_vector(rng, n, kind.scale);
      return {Matrix::diagonal(d1), Matrix::diagonal(d2)};
    }
  }
  throw InvalidOptions("sample_ensemble: unknown ensemble");
}

SweepStats aggregate(std::span<const TrialRecord> records, std::uint64_t seed) {
  SweepStats s;
  s.trials = records.size();
  s.seed = seed;
  std::size_t fwd = 0, either = 0, agreements = 0;
  bool any_agreement_run = false;
  std::vector<double> times;
  for (const TrialRecord& r : records) {
    if (r.agree) {
      any_agreement_run = true;
      agreements += *r.agree;
    }
    if (r.failure) {
      ++s.failures;
      continue;
    }
    const bool bf = r.verdict_fwd == Verdict::Blowup;
    const bool bb = r.verdict_bwd == Verdict::Blowup;
    fwd += bf;
    either += (bf || bb);
    if (bf && r.t_fwd) times.push_back(*r.t_fwd);
  }
  const std::size_t ok = s.trials - s.failures;
  if (ok > 0) {
    s.blowup_fraction_forward = static_cast<double>(fwd) / static_cast<double>(ok);
    s.blowup_fraction_either = static_cast<double>(either) / static_cast<double>(ok);
    const double p = s.blowup_fraction_either;
    s.standard_error_either = std::sqrt(p * (1.0 - p) / static_cast<double>(ok));
  }
  if (times.size() >= 10) {
    std::sort(times.begin(), times.end());
    s.blowup_time_quantiles = std::array<double, 3>{
        quantile_sorted(times, 0.1), quantile_sorted(times, 0.5), quantile_sorted(times, 0.9)};
  }
  if (any_agreement_run) s.prediction_integration_agreements = agreements;
  return s;
}

SweepResult blowup_probability_sweep(const EnsembleKind& kind, BPolicy policy, std::size_t trials,
                                     std::uint64_t seed, unsigned threads) {
  kind.validate();
  if (trials == 0) throw InvalidOptions("sweep: trials must be at least 1");
  if (policy == BPolicy::SampledPair && !kind.is_pair()) {
    throw InvalidOptions("sweep: the sampled-pair policy needs a pair ensemble (commuting or diagonal)");
  }
  SweepResult result;
  result.config = {"probability", kind, policy, trials, seed};
  result.records = run_trials(trials, threads, [&](std::uint64_t index) {
    TrialRecord r;
    r.index = index;
    try {
      Sample s = sample_ensemble(kind, seed, index);
      const Matrix b = policy == BPolicy::Identity ? Matrix::identity(kind.n) : *s.b;
      const BlowupReport f = predict_blowup(s.a, b, Direction::Forward);
      const BlowupReport k = predict_blowup(s.a, b, Direction::Backward);
      r.verdict_fwd = f.verdict;
      r.verdict_bwd = k.verdict;
      r.t_fwd = f.blowup_time;
      r.t_bwd = k.blowup_time;
    } catch (const Error& e) {
      r.failure = e.what();
    }
    return r;
  });
  result.stats = aggregate(result.records, seed);
  return result;
}

TrialRecord check_agreement(const Matrix& a, const Matrix& b, std::uint64_t index,
                            const IntegrationOptions& opts) {
  TrialRecord r;
  r.index = index;
  try {
    const BlowupReport fwd = predict_blowup(a, b, Direction::Forward);
    const BlowupReport bwd = predict_blowup(a, b, Direction::Backward);
    r.verdict_fwd = fwd.verdict;
    r.verdict_bwd = bwd.verdict;
    r.t_fwd = fwd.blowup_time;
    r.t_bwd = bwd.blowup_time;

    const RhsKind kind = RhsKind::bxx(b);
    if (fwd.verdict == Verdict::Blowup) {
      const double t = *fwd.blowup_time;
      const Trajectory traj = integrate(kind, a, 2.0 * t, opts);
      if (traj.status == TrajectoryStatus::BlowupDetected) {
        try {
          r.t_est = estimate_blowup_time(traj).estimated_time;
        } catch (const InsufficientSamples&) {
        }
      }
      r.agree = r.t_est && std::abs(*r.t_est - t) <= kAgreementTolerance * t;
    } else {
      const double ab = frobenius_norm(mat_mul(a, b));
      const double horizon = ab > 0.0 ? 10.0 * (1.0 + 1.0 / ab) : 10.0;
      const Trajectory traj = integrate(kind, a, horizon, opts);
      r.agree = traj.status == TrajectoryStatus::Completed;
    }
  } catch (const Error& e) {
    r.failure = e.what();
    r.agree = false;
  }
  return r;
}

SweepResult agreement_sweep(std::size_t trials, std::size_t n, std::uint64_t seed, unsigned threads) {
  const EnsembleKind kind{EnsembleTag::CommutingSymmetricPair, n, 1.0};
  kind.validate();
  if (trials == 0) throw InvalidOptions("sweep: trials must be at least 1");
  SweepResult result;
  result.config = {"agreement", kind, BPolicy::SampledPair, trials, seed};
  result.records = run_trials(trials, threads, [&](std::uint64_t index) {
    Sample s = sample_ensemble(kind, seed, index);
    return check_agreement(s.a, *s.b, index);
  });
  result.stats = aggregate(result.records, seed);
  return result;
}

std::string sweep_to_json(const SweepResult& result) {
  using json = nlohmann::ordered_json;
  const SweepConfig& c = result.config;
  const SweepStats& s = result.stats;
  json j;
  j["config"] = {{"mode", c.mode},
                 {"ensemble", std::string(to_string(c.kind.tag))},
                 {"n", c.kind.n},
                 {"scale", c.kind.scale},
                 {"b_policy", std::string(to_string(c.policy))},
                 {"trials", c.trials},
                 {"seed", c.seed}};
  j["trials"] = s.trials;
  j["seed"] = s.seed;
  j["blowup_fraction_forward"] = s.blowup_fraction_forward;
  j["blowup_fraction_either"] = s.blowup_fraction_either;
  j["standard_error_either"] = s.standard_error_either;
  if (s.blowup_time_quantiles) {
    const auto& q = *s.blowup_time_quantiles;
    j["blowup_time_quantiles"] = {{"q10", q[0]}, {"q50", q[1]}, {"q90", q[2]}};
  } else {
    j["blowup_time_quantiles"] = nullptr;
  }
  if (s.prediction_integration_agreements) {
    j["prediction_integration_agreements"] = *s.prediction_integration_agreements;
  } else {
    j["prediction_integration_agreements"] = nullptr;
  }
  j["failures"] = s.failures;
  json bad = json::array();
  for (const TrialRecord& r : result.records) {
    if ((r.agree && !*r.agree) || r.failure) {
      json entry = {{"seed", c.seed}, {"index", r.index}};
      if (r.failure) entry["failure"] = *r.failure;
      bad.push_back(std::move(entry));
    }
  }
  j["disagreements"] = std::move(bad);
  return j.dump(2) + "\n";
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  auto verdict = [](const std::optional<Verdict>& v) {
    return v ? std::string(to_string(*v)) : std::string("Failed");
  };
  out << "index,verdict_fwd,verdict_bwd,T_fwd,T_est,agree\n";
  for (const TrialRecord& r : result.records) {
    out << r.index << ',' << verdict(r.verdict_fwd) << ',' << verdict(r.verdict_bwd) << ','
        << opt(r.t_fwd) << ',' << opt(r.t_est) << ',';
    if (r.agree) out << (*r.agree ? "true" : "false");
    out << '\n';
  }
}

}  // namespace matblow
