// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "matblow/cli.hpp"
#include "matblow/closedform.hpp"
#include "matblow/harness.hpp"
#include "matblow/integrator.hpp"
#include "matblow/linalg.hpp"
#include "oracles.hpp"

using namespace matblow;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

// long double LU determinant with partial pivoting
double oracle_determinant(const Matrix& m) {
  const std::size_t n = m.n();
  std::vector<long double> a(m.data().begin(), m.data().end());
  long double det = 1.0L;
  for (std::size_t k = 0; k < n; ++k) {
    std::size_t p = k;
    for (std::size_t i = k + 1; i < n; ++i)
      if (std::abs(a[i * n + k]) > std::abs(a[p * n + k])) p = i;
    if (a[p * n + k] == 0.0L) return 0.0;
    if (p != k) {
      for (std::size_t j = 0; j < n; ++j) std::swap(a[k * n + j], a[p * n + j]);
      det = -det;
    }
    det *= a[k * n + k];
    for (std::size_t i = k + 1; i < n; ++i) {
      const long double f = a[i * n + k] / a[k * n + k];
      for (std::size_t j = k; j < n; ++j) a[i * n + j] -= f * a[k * n + j];
    }
  }
  return static_cast<double>(det);
}

// true iff the symmetric matrix -m is positive definite, i.e. every eigenvalue of m is < 0
bool negative_definite(const Matrix& m) {
  const std::size_t n = m.n();
  std::vector<long double> l(n * n, 0.0L);
  for (std::size_t j = 0; j < n; ++j) {
    long double d = -static_cast<long double>(m(j, j));
    for (std::size_t k = 0; k < j; ++k) d -= l[j * n + k] * l[j * n + k];
    if (!(d > 0.0L)) return false;
    l[j * n + j] = std::sqrt(d);
    for (std::size_t i = j + 1; i < n; ++i) {
      long double s = -static_cast<long double>(m(i, j));
      for (std::size_t k = 0; k < j; ++k) s -= l[i * n + k] * l[j * n + k];
      l[i * n + j] = s / l[j * n + j];
    }
  }
  return true;
}

// log10 of the worst growth factor of an off-commuting perturbation over
// [0, t_end], linearized about the exact solution. In the shared eigenbasis,
// entry (k, j) of a perturbation grows like exp(b_k * int (x_k + x_j) dt) with
// x_k(t) = a_k / (1 - t a_k b_k). Large values mean that rounding in the
// sampled pair, or any per-step error, is amplified past the error budget.
double log10_amplification(const Matrix& a, const Matrix& b, double t_end) {
  const EigenSym e = eig_symmetric(a);
  const std::size_t n = a.n();
  std::vector<double> bk(n), integral(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double s = 0.0L;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) s += static_cast<long double>(e.vectors(i, k)) * b(i, j) * e.vectors(j, k);
    bk[k] = static_cast<double>(s);
    const double ak = e.values[k], lk = ak * bk[k];
    integral[k] = std::abs(lk) * t_end < 1e-12 ? ak * t_end : -std::log1p(-t_end * lk) / bk[k];
  }
  double worst = 0.0;
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      if (j != k) worst = std::max(worst, bk[k] * (integral[k] + integral[j]));
  return worst / std::log(10.0);
}

// The shared corpus for the closed-form and resolvent criteria: the first 100
// commuting symmetric pairs (n = 8) that blow up forward.
struct CorpusEntry {
  Matrix a, b;
  double t_blowup;
  std::uint64_t index;
};

std::vector<CorpusEntry> commuting_corpus() {
  constexpr std::uint64_t kSeed = 20261019;
  const EnsembleKind kind{EnsembleTag::CommutingSymmetricPair, 8, 1.0};
  std::vector<CorpusEntry> out;
  for (std::uint64_t i = 0; out.size() < 100; ++i) {
    Sample s = sample_ensemble(kind, kSeed, i);
    const BlowupReport r = predict_blowup(s.a, *s.b, Direction::Forward);
    if (r.verdict == Verdict::Blowup) out.push_back({std::move(s.a), std::move(*s.b), *r.blowup_time, i});
  }
  return out;
}

Outcome closed_form_vs_integrator(const std::vector<CorpusEntry>& corpus) {
  const auto t0 = Clock::now();
  Outcome o;
  double worst = 0.0;
  std::string offenders;
  for (const CorpusEntry& c : corpus) {
    const std::vector<double> ts{0.2 * c.t_blowup, 0.5 * c.t_blowup, 0.8 * c.t_blowup};
    double pair_worst = 0.0;
    for (double e : compare_exact_numeric(c.a, c.b, RhsTag::BXX, ts, {})) pair_worst = std::max(pair_worst, e);
    worst = std::max(worst, pair_worst);
    if (pair_worst > 1e-6) {
      offenders += "\n      sample " + std::to_string(c.index) + ": error " + fmt(pair_worst) +
                   ", off-commuting amplification 1e" + fmt(log10_amplification(c.a, c.b, 0.8 * c.t_blowup));
    }
  }
  const double elapsed = seconds_since(t0);
  o.pass = worst <= 1e-6 && elapsed <= 60.0;
  o.detail = "100 pairs n=8, max relative error " + fmt(worst) + ", " + fmt(elapsed) + " s" + offenders;
  return o;
}

Outcome blowup_time_extrapolation() {
  Outcome o;
  const std::size_t dims[] = {2, 4, 8};
  std::size_t checked = 0, ok = 0;
  double worst = 0.0;
  std::string offenders;
  for (std::size_t k = 0; k < 3; ++k) {
    const std::size_t want = k < 2 ? 17 : 16;
    const EnsembleKind kind{EnsembleTag::CommutingSymmetricPair, dims[k], 1.0};
    std::size_t got = 0;
    for (std::uint64_t i = 0; got < want; ++i) {
      const Sample s = sample_ensemble(kind, 4242, i);
      const BlowupReport r = predict_blowup(s.a, *s.b, Direction::Forward);
      if (r.verdict != Verdict::Blowup) continue;
      ++got;
      ++checked;
      const double t = *r.blowup_time;
      IntegrationOptions opts;
      const Trajectory traj = integrate(RhsKind::bxx(*s.b), s.a, 2.0 * t, opts);
      double rel = 1.0;
      if (traj.status == TrajectoryStatus::BlowupDetected) {
        rel = std::abs(estimate_blowup_time(traj).estimated_time - t) / t;
      }
      worst = std::max(worst, rel);
      if (rel <= 0.02) {
        ++ok;
      } else {
        offenders += "\n      n=" + std::to_string(dims[k]) + " sample " + std::to_string(i) + ": T=" + fmt(t) +
                     ", estimate off by " + fmt(rel) + ", off-commuting amplification 1e" +
                     fmt(log10_amplification(s.a, *s.b, 0.98 * t));
      }
    }
  }
  o.pass = checked == 50 && ok == 50;
  o.detail = std::to_string(ok) + "/" + std::to_string(checked) + " within 2%, worst " + fmt(worst) + offenders;
  return o;
}

Outcome skew_symmetric_decay() {
  Outcome o;
  std::size_t ok = 0;
  double worst_excess = -1e300, worst_closed = 0.0;
  for (std::size_t i = 0; i < 20; ++i) {
    const std::size_t n = i < 10 ? 2 : 4;
    const Matrix a = sample_ensemble({EnsembleTag::SkewSymmetric, n, 1.0}, 99, i).a;
    IntegrationOptions opts;
    opts.keep_snapshots = true;
    const Trajectory traj = integrate(RhsKind::bxx(Matrix::identity(n)), a, 50.0, opts);
    const double bound = oracle::frobenius(a) + 1e-6;
    bool good = traj.status == TrajectoryStatus::Completed;
    for (double nrm : traj.frob_norms) {
      worst_excess = std::max(worst_excess, nrm - (bound - 1e-6));
      good = good && nrm <= bound;
    }
    if (n == 2) {
      // A = [[0, w], [-w, 0]]: X(t) = (A - t w^2 Id) / (1 + t^2 w^2), |X|_F = sqrt(2)|w| / sqrt(1 + t^2 w^2)
      const double w = a(0, 1);
      for (std::size_t k = 0; k < traj.times.size(); ++k) {
        const double t = traj.times[k];
        const double expect = std::sqrt(2.0) * std::abs(w) / std::sqrt(1.0 + t * t * w * w);
        const double diff = std::abs(traj.frob_norms[k] - expect);
        worst_closed = std::max(worst_closed, diff);
        good = good && diff <= 1e-7;
      }
      for (const Snapshot& s : traj.snapshots) {
        const double den = 1.0 + s.t * s.t * w * w;
        const Matrix expect{{-s.t * w * w / den, w / den}, {-w / den, -s.t * w * w / den}};
        const double diff = oracle::frobenius(s.x - expect);
        worst_closed = std::max(worst_closed, diff);
        good = good && diff <= 1e-7;
      }
    }
    if (good) ++ok;
  }
  o.pass = ok == 20;
  o.detail = std::to_string(ok) + "/20 bounded to horizon 50, max norm growth " + fmt(worst_excess) +
             ", 2x2 closed-form deviation " + fmt(worst_closed);
  return o;
}

Outcome goe_identity_verdict() {
  Outcome o;
  std::size_t mismatches = 0;
  for (std::uint64_t i = 0; i < 200; ++i) {
    const std::size_t n = 1 + i % 8;
    const Matrix a = sample_ensemble({EnsembleTag::GOE, n, 1.0}, 31337, i).a;
    const bool expect_blowup = !negative_definite(a);
    const BlowupReport r = predict_blowup(a, Matrix::identity(n), Direction::Forward);
    if ((r.verdict == Verdict::Blowup) != expect_blowup) ++mismatches;
  }
  o.pass = mismatches == 0;
  o.detail = "200 GOE samples n=1..8, " + std::to_string(mismatches) + " mismatches";
  return o;
}

Outcome odd_dimension_law() {
  Outcome o;
  for (std::size_t n : {3u, 5u}) {
    const SweepResult r = blowup_probability_sweep({EnsembleTag::Ginibre, n, 1.0}, BPolicy::Identity, 1000, 7);
    o.pass = o.pass && r.stats.blowup_fraction_either == 1.0 && r.stats.failures == 0;
    o.detail += (o.detail.empty() ? "" : ", ") + std::string("n=") + std::to_string(n) +
                " fraction " + fmt(r.stats.blowup_fraction_either);
  }
  return o;
}

Outcome lambda_crossing() {
  Outcome o;
  oracle::Rng rng(777);
  std::size_t ok = 0, eternal = 0;
  double worst = 0.0;
  for (std::size_t i = 0; i < 100; ++i) {
    const std::size_t n = 1 + i % 6;
    const Matrix q = rng.orthogonal(n);
    std::vector<double> d1(n), d2(n);
    double lambda_max = -1e300;
    const bool force_eternal = i % 4 == 0;
    for (std::size_t k = 0; k < n; ++k) {
      d1[k] = std::copysign(rng.uniform(0.1, 2.0), rng.normal());
      d2[k] = std::copysign(rng.uniform(0.1, 2.0), rng.normal());
      if (force_eternal && d1[k] * d2[k] > 0) d2[k] = -d2[k];
      lambda_max = std::max(lambda_max, d1[k] * d2[k]);
    }
    const Matrix a = oracle::conjugate(q, d1), b = oracle::conjugate(q, d2);
    const std::optional<double> fc = first_crossing(a, b);
    const BlowupReport r = predict_blowup(a, b, Direction::Forward);
    if (lambda_max <= 0.0) {
      ++eternal;
      if (!fc && r.verdict == Verdict::Eternal) ++ok;
    } else if (fc && r.blowup_time) {
      const double diff = std::abs(*fc - *r.blowup_time);
      worst = std::max(worst, diff);
      if (diff <= 1e-9 * std::max(1.0, *r.blowup_time)) ++ok;
    }
  }
  o.pass = ok == 100;
  o.detail = std::to_string(ok) + "/100 agree (" + std::to_string(eternal) + " without crossing), max |diff| " +
             fmt(worst);
  return o;
}

Outcome resolvent_identity(const std::vector<CorpusEntry>& corpus) {
  Outcome o;
  double worst = 0.0;
  for (const CorpusEntry& c : corpus) {
    const double scale = 1.0 + oracle::frobenius(c.a);
    for (int k = 0; k < 10; ++k) {
      const double t = (k + 0.5) / 10.0 * 0.95 * c.t_blowup;
      const Matrix x = exact_solution(c.a, c.b, t);
      const Matrix m = Matrix::identity(c.a.n()) - t * oracle::multiply(c.a, c.b);
      const double residual = oracle::frobenius(oracle::multiply(x, m) - c.a);
      worst = std::max({worst, residual / scale, resolvent_identity_check(c.a, c.b, t) / scale});
    }
  }
  o.pass = worst <= 1e-8;
  o.detail = "1000 evaluations, max residual/(1+|A|_F) " + fmt(worst);
  return o;
}

Outcome eigensolver_oracles() {
  Outcome o;
  oracle::Rng rng(2718);
  double worst_jacobi = 0.0;
  for (int i = 0; i < 500; ++i) {
    const Matrix m = rng.symmetric(1 + static_cast<std::size_t>(i % 3));
    const std::vector<double> expect = oracle::symmetric_charpoly_roots(m);
    const EigenSym e = eig_symmetric(m);
    for (std::size_t k = 0; k < expect.size(); ++k) worst_jacobi = std::max(worst_jacobi, std::abs(e.values[k] - expect[k]));
  }
  double worst_trace = 0.0, worst_det = 0.0;
  bool converged = true;
  for (std::uint64_t i = 0; i < 500; ++i) {
    const Matrix m = sample_ensemble({EnsembleTag::Ginibre, 1 + i % 8, 1.0}, 161803, i).a;
    const RealSpectrum s = real_eigenvalues(m);
    converged = converged && s.converged;
    long double sum = 0.0L, prod = 1.0L;
    for (double v : s.real_eigenvalues) {
      sum += v;
      prod *= v;
    }
    for (const ConjugatePair& p : s.complex_pairs) {
      sum += 2.0L * p.real;
      prod *= static_cast<long double>(p.real) * p.real + static_cast<long double>(p.imag) * p.imag;
    }
    const double tr = m.trace(), det = oracle_determinant(m);
    worst_trace = std::max(worst_trace, std::abs(static_cast<double>(sum) - tr) / std::max(1.0, std::abs(tr)));
    worst_det = std::max(worst_det, std::abs(static_cast<double>(prod) - det) / std::max(1.0, std::abs(det)));
  }
  o.pass = worst_jacobi <= 1e-8 && worst_trace <= 1e-8 && worst_det <= 1e-8 && converged;
  o.detail = "Jacobi vs characteristic roots " + fmt(worst_jacobi) + "; Schur trace " + fmt(worst_trace) +
             ", determinant " + fmt(worst_det);
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome sweep_determinism() {
  Outcome o;
  const EnsembleKind kind{EnsembleTag::Ginibre, 4, 1.0};
  const std::string p1 = sweep_to_json(blowup_probability_sweep(kind, BPolicy::Identity, 20000, 99, 1));
  const std::string p2 = sweep_to_json(blowup_probability_sweep(kind, BPolicy::Identity, 20000, 99, 1));
  const std::string p4 = sweep_to_json(blowup_probability_sweep(kind, BPolicy::Identity, 20000, 99, 4));
  const std::string a1 = sweep_to_json(agreement_sweep(12, 4, 99, 1));
  const std::string a4 = sweep_to_json(agreement_sweep(12, 4, 99, 4));
  bool same = p1 == p2 && p1 == p4 && a1 == a4;

  const auto dir = std::filesystem::temp_directory_path() / "matblow_acceptance_determinism";
  std::filesystem::create_directories(dir);
  std::vector<std::string> files;
  for (const char* threads : {"1", "1", "3"}) {
    const std::string prefix = (dir / ("run" + std::to_string(files.size()))).string();
    std::ostringstream out, err;
    const int code = cli::run({"matblow", "--seed", "5", "--out", prefix, "sweep", "--ensemble", "goe", "-n", "3",
                               "--trials", "5000", "--threads", threads},
                              out, err);
    same = same && code == cli::kExitOk;
    files.push_back(slurp(prefix + ".json"));
  }
  std::filesystem::remove_all(dir);
  same = same && !files[0].empty() && files[0] == files[1] && files[0] == files[2];
  o.pass = same;
  o.detail = same ? "JSON identical across repeats and thread counts (library and CLI)" : "JSON outputs differ";
  return o;
}

}  // namespace

int main() {
  const auto t0 = Clock::now();
  const std::vector<CorpusEntry> corpus = commuting_corpus();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"closed form vs integrator", [&] { return closed_form_vs_integrator(corpus); }},
      {"blowup time extrapolation", blowup_time_extrapolation},
      {"skew-symmetric data stays bounded", skew_symmetric_decay},
      {"symmetric A, B = Id verdict", goe_identity_verdict},
      {"odd dimension always blows up", odd_dimension_law},
      {"lambda-curve crossing equals blowup time", lambda_crossing},
      {"resolvent identity", [&] { return resolvent_identity(corpus); }},
      {"eigensolver oracles", eigensolver_oracles},
      {"sweep determinism", sweep_determinism},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - static_cast<std::size_t>(failures)) << "/" << criteria.size() << " criteria passed in "
            << fmt(seconds_since(t0)) << " s" << std::endl;
  return failures == 0 ? 0 : 1;
}
