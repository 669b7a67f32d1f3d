#include "matblow/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "matblow/closedform.hpp"
#include "matblow/errors.hpp"
#include "matblow/harness.hpp"
#include "matblow/integrator.hpp"
#include "matblow/linalg.hpp"
#include "matblow/matrix_io.hpp"

namespace matblow::cli {

namespace {

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out;
  std::string format = "text";
  double tol = 1e-6;
};

struct PredictArgs {
  std::string a_path, b_path, direction = "forward";
  bool force_general = false;
};

struct ExactArgs {
  std::string a_path, b_path;
  double t = 0.0;
};

struct IntegrateArgs {
  std::string a_path, b_path, rhs = "square", norm = "operator2", snapshots;
  double horizon = 0.0;
  IntegrationOptions opts;
};

struct SweepArgs {
  std::string ensemble = "ginibre", b_policy = "identity", mode = "probability";
  std::size_t n = 2, trials = 1000;
  double scale = 1.0;
  unsigned threads = 1;
};

struct CompareArgs {
  std::string a_path, b_path, rhs = "bxx";
  std::vector<double> times;
  IntegrationOptions opts;
};

// shortest representation that round-trips, for human-readable lines
std::string short_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string vector_text(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + short_double(v[i]);
  return s + "]";
}

Matrix load_b(const std::string& path, std::size_t n) {
  if (path.empty()) return Matrix::identity(n);
  Matrix b = read_matrix_file(path);
  if (b.n() != n) {
    throw DimensionMismatch("B is " + std::to_string(b.n()) + "x" + std::to_string(b.n()) +
                            " but A is " + std::to_string(n) + "x" + std::to_string(n));
  }
  return b;
}

// Writes `content` to --out when given, else to `out`.
void emit(const GlobalOptions& g, std::ostream& out, const std::string& content) {
  if (g.out.empty()) {
    out << content;
    return;
  }
  std::ofstream f(g.out);
  if (!f) throw std::runtime_error("cannot write " + g.out);
  f << content;
}

nlohmann::ordered_json report_json(const BlowupReport& r) {
  nlohmann::ordered_json j;
  j["direction"] = std::string(to_string(r.direction));
  j["verdict"] = std::string(to_string(r.verdict));
  j["blowup_time"] = r.blowup_time ? nlohmann::ordered_json(*r.blowup_time) : nullptr;
  j["signed_blowup_time"] =
      r.signed_blowup_time() ? nlohmann::ordered_json(*r.signed_blowup_time()) : nullptr;
  j["eigenvalue"] = r.eigenvalue ? nlohmann::ordered_json(*r.eigenvalue) : nullptr;
  j["witness"] = r.witness ? nlohmann::ordered_json(*r.witness) : nullptr;
  j["method"] = std::string(to_string(r.method));
  j["candidate_pole"] = r.method == PredictionMethod::GeneralRealSpectrum;
  j["forced"] = r.forced;
  return j;
}

std::string report_text(const BlowupReport& r) {
  std::ostringstream s;
  if (r.verdict == Verdict::Blowup) {
    s << "Blowup T=" << short_double(*r.blowup_time);
  } else {
    s << "Eternal";
  }
  s << " (direction=" << to_string(r.direction) << ", method=" << to_string(r.method);
  if (r.eigenvalue) s << ", eigenvalue=" << short_double(*r.eigenvalue);
  s << ")\n";
  if (r.verdict == Verdict::Blowup && r.direction == Direction::Backward) {
    s << "pole at t=" << short_double(*r.signed_blowup_time()) << "\n";
  }
  if (r.witness) s << "witness: " << vector_text(*r.witness) << "\n";
  if (r.method == PredictionMethod::GeneralRealSpectrum && r.verdict == Verdict::Blowup) {
    s << "note: candidate pole from the real spectrum of AB; not proven free of cancellation\n";
  }
  if (r.forced) s << "note: A and B do not commute; forced general-spectrum reading of AB\n";
  return s.str();
}

int cmd_predict(const PredictArgs& p, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const Matrix a = read_matrix_file(p.a_path);
  const Matrix b = load_b(p.b_path, a.n());
  const Direction dir = p.direction == "backward" ? Direction::Backward : Direction::Forward;
  BlowupReport report;
  const CommutationCheck cc = commutes(a, b);
  if (cc.commutes) {
    report = predict_blowup(a, b, dir);
  } else if (p.force_general) {
    report = predict_from_spectrum(mat_mul(a, b), dir);
    report.forced = true;
  } else {
    err << "error: A and B do not commute: ||AB-BA||_F = " << short_double(cc.residual)
        << " (relative " << short_double(cc.relative_residual)
        << "); pass --force-general to read poles off the spectrum of AB anyway\n";
    return kExitError;
  }
  if (g.format == "json") {
    emit(g, out, report_json(report).dump(2) + "\n");
  } else {
    emit(g, out, report_text(report));
  }
  return report.verdict == Verdict::Blowup ? kExitBlowup : kExitOk;
}

int cmd_exact(const ExactArgs& p, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const Matrix a = read_matrix_file(p.a_path);
  const Matrix b = load_b(p.b_path, a.n());
  try {
    emit(g, out, matrix_to_json(exact_solution(a, b, p.t)));
  } catch (const SingularResolvent& e) {
    err << "error: Id - t*A*B is singular at t=" << short_double(p.t);
    const RealSpectrum spec = real_eigenvalues(mat_mul(a, b));
    std::optional<double> nearest;
    for (double lambda : spec.real_eigenvalues) {
      if (lambda == 0.0) continue;
      const double pole = 1.0 / lambda;
      if (!nearest || std::abs(pole - p.t) < std::abs(*nearest - p.t)) nearest = pole;
    }
    if (nearest) err << "; nearest predicted pole at t=" << short_double(*nearest);
    err << "\n";
    return kExitError;
  }
  return kExitOk;
}

int cmd_integrate(IntegrateArgs p, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const Matrix a = read_matrix_file(p.a_path);
  const RhsTag tag = *parse_rhs_tag(p.rhs);
  std::optional<Matrix> b;
  if (RhsKind::requires_b(tag)) {
    b = load_b(p.b_path, a.n());
  } else if (!p.b_path.empty()) {
    throw InvalidOptions("--rhs " + p.rhs + " does not take a B matrix");
  }
  const RhsKind kind(tag, b, p.norm == "frobenius" ? NormChoice::Frobenius : NormChoice::Operator2);
  p.opts.keep_snapshots = !p.snapshots.empty();
  const Trajectory traj = integrate(kind, a, p.horizon, p.opts);

  if (!g.out.empty()) {
    std::ofstream f(g.out);
    if (!f) throw std::runtime_error("cannot write " + g.out);
    write_trajectory_csv(f, traj);
  } else if (g.format == "csv") {
    write_trajectory_csv(out, traj);
  }
  if (!p.snapshots.empty()) {
    std::ofstream f(p.snapshots);
    if (!f) throw std::runtime_error("cannot write " + p.snapshots);
    write_snapshots_json(f, traj.snapshots);
  }

  std::ostringstream summary;
  summary << to_string(traj.status);
  std::optional<BlowupEstimate> est;
  if (traj.status == TrajectoryStatus::BlowupDetected) {
    try {
      est = estimate_blowup_time(traj);
    } catch (const InsufficientSamples&) {
    }
  }
  if (est) {
    summary << " t≈" << short_double(est->estimated_time) << " (extrapolated pole, fit residual "
            << short_double(est->fit_residual) << ")";
  }
  summary << " last_t=" << short_double(traj.times.back())
          << " frob_norm=" << short_double(traj.frob_norms.back())
          << " steps=" << traj.accepted_steps << " rejected=" << traj.rejected_steps;
  if (traj.non_finite_encountered) summary << " non_finite=true";
  summary << "\n";
  // with --format csv on stdout the summary would corrupt the table
  (g.format == "csv" && g.out.empty() ? err : out) << summary.str();

  switch (traj.status) {
    case TrajectoryStatus::Completed: return kExitOk;
    case TrajectoryStatus::BlowupDetected: return kExitBlowup;
    case TrajectoryStatus::StepUnderflow: return kExitError;
  }
  return kExitError;
}

int cmd_sweep(const SweepArgs& p, const GlobalOptions& g, std::ostream& out, std::ostream& err) {
  const EnsembleTag tag = *parse_ensemble_tag(p.ensemble);
  SweepResult result;
  if (p.mode == "agreement") {
    if (tag != EnsembleTag::CommutingSymmetricPair) {
      throw InvalidOptions("agreement sweeps sample the commuting ensemble; pass --ensemble commuting");
    }
    result = agreement_sweep(p.trials, p.n, g.seed, p.threads);
  } else {
    const BPolicy policy = p.b_policy == "pair" ? BPolicy::SampledPair : BPolicy::Identity;
    result = blowup_probability_sweep(EnsembleKind{tag, p.n, p.scale}, policy, p.trials, g.seed,
                                      p.threads);
  }
  const std::string json = sweep_to_json(result);
  if (!g.out.empty()) {
    std::ofstream fj(g.out + ".json");
    std::ofstream fc(g.out + ".csv");
    if (!fj || !fc) throw std::runtime_error("cannot write " + g.out + ".json/.csv");
    fj << json;
    write_sweep_csv(fc, result);
  }
  const SweepStats& s = result.stats;
  if (g.format == "json") {
    out << json;
  } else if (g.format == "csv") {
    write_sweep_csv(out, result);
  } else {
    out << "trials=" << s.trials << " blowup_fraction_forward=" << short_double(s.blowup_fraction_forward)
        << " blowup_fraction_either=" << short_double(s.blowup_fraction_either)
        << " se=" << short_double(s.standard_error_either) << " failures=" << s.failures;
    if (s.prediction_integration_agreements) out << " agreements=" << *s.prediction_integration_agreements;
    out << "\n";
  }
  if (s.prediction_integration_agreements && *s.prediction_integration_agreements != s.trials) {
    err << "error: " << (s.trials - *s.prediction_integration_agreements)
        << " trial(s) disagree with the prediction; see the disagreements list\n";
    return kExitError;
  }
  return kExitOk;
}

int cmd_compare(const CompareArgs& p, const GlobalOptions& g, std::ostream& out, std::ostream&) {
  const Matrix a = read_matrix_file(p.a_path);
  const Matrix b = load_b(p.b_path, a.n());
  const RhsTag tag = *parse_rhs_tag(p.rhs);
  const std::vector<double> errors = compare_exact_numeric(a, b, tag, p.times, p.opts);
  std::ostringstream table;
  bool ok = true;
  if (g.format == "csv") {
    table << "t,rel_error\n";
    for (std::size_t i = 0; i < errors.size(); ++i)
      table << format_double(p.times[i]) << ',' << format_double(errors[i]) << '\n';
  } else if (g.format == "json") {
    nlohmann::ordered_json j = nlohmann::ordered_json::array();
    for (std::size_t i = 0; i < errors.size(); ++i) j.push_back({{"t", p.times[i]}, {"rel_error", errors[i]}});
    table << j.dump(2) << '\n';
  } else {
    table << "t rel_error\n";
    for (std::size_t i = 0; i < errors.size(); ++i)
      table << short_double(p.times[i]) << ' ' << short_double(errors[i])
            << (errors[i] > g.tol ? "  EXCEEDS tol" : "") << '\n';
  }
  for (double e : errors) ok = ok && e <= g.tol;
  emit(g, out, table.str());
  return ok ? kExitOk : kExitError;
}

void add_integration_flags(CLI::App* sub, IntegrationOptions& o) {
  sub->add_option("--rtol", o.rtol, "relative tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--atol", o.atol, "absolute tolerance")->check(CLI::PositiveNumber);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Finite-time blowup laboratory for quadratic matrix ODEs dX/dt = B.X.X"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "seed for random ensembles");
  app.add_option("--out", g.out, "output path (sweep: prefix for .json and .csv)");
  app.add_option("--format", g.format, "output format")
      ->check(CLI::IsMember({"text", "json", "csv"}));
  app.add_option("--tol", g.tol, "relative error tolerance for compare")->check(CLI::PositiveNumber);

  const std::vector<std::string> rhs_names{"square", "bxx", "xbx", "xxb", "commutator", "norm"};

  PredictArgs pa;
  auto* predict = app.add_subcommand("predict", "predict blowup or eternity from the spectrum of AB");
  predict->add_option("-a,--a", pa.a_path, "initial matrix A")->required();
  predict->add_option("-b,--b", pa.b_path, "matrix B (default: identity)");
  predict->add_option("--direction", pa.direction)->check(CLI::IsMember({"forward", "backward"}));
  predict->add_flag("--force-general", pa.force_general,
                    "read poles off the real spectrum of AB even if A and B do not commute");

  ExactArgs ea;
  auto* exact = app.add_subcommand("exact", "evaluate X(t) = A (Id - tAB)^-1");
  exact->add_option("-a,--a", ea.a_path)->required();
  exact->add_option("-b,--b", ea.b_path);
  exact->add_option("-t,--t", ea.t, "time")->required();

  IntegrateArgs ia;
  auto* integ = app.add_subcommand("integrate", "integrate a matrix ODE with Dormand-Prince 5(4)");
  integ->add_option("-a,--a", ia.a_path)->required();
  integ->add_option("-b,--b", ia.b_path);
  integ->add_option("--rhs", ia.rhs)->check(CLI::IsMember(rhs_names));
  integ->add_option("--norm", ia.norm, "norm for --rhs norm")
      ->check(CLI::IsMember({"operator2", "frobenius"}));
  integ->add_option("--horizon", ia.horizon, "signed end time")->required();
  integ->add_option("--blowup-norm", ia.opts.blowup_norm)->check(CLI::PositiveNumber);
  integ->add_option("--snapshots", ia.snapshots, "write subsampled states as JSON");
  integ->add_flag("--record-operator2", ia.opts.record_operator2, "add an operator2_norm column");
  add_integration_flags(integ, ia.opts);

  SweepArgs sa;
  auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over a random-matrix ensemble");
  sweep->add_option("--ensemble", sa.ensemble)
      ->check(CLI::IsMember({"ginibre", "goe", "skew", "commuting", "diagonal"}));
  sweep->add_option("-n,--n", sa.n)->check(CLI::Range(std::size_t{1}, std::size_t{256}));
  sweep->add_option("--trials", sa.trials)->check(CLI::PositiveNumber);
  sweep->add_option("--scale", sa.scale)->check(CLI::PositiveNumber);
  sweep->add_option("--b-policy", sa.b_policy)->check(CLI::IsMember({"identity", "pair"}));
  sweep->add_option("--mode", sa.mode)->check(CLI::IsMember({"probability", "agreement"}));
  sweep->add_option("--threads", sa.threads, "worker threads (results do not depend on it)")
      ->check(CLI::PositiveNumber);

  CompareArgs ca;
  auto* compare = app.add_subcommand("compare", "compare the closed form with numeric integration");
  compare->add_option("-a,--a", ca.a_path)->required();
  compare->add_option("-b,--b", ca.b_path);
  compare->add_option("--rhs", ca.rhs)->check(CLI::IsMember({"square", "bxx", "xbx", "xxb"}));
  compare->add_option("--times", ca.times, "comma-separated times")->required()->delimiter(',');
  add_integration_flags(compare, ca.opts);

  // CLI11 consumes a reversed argument list without the program name
  std::vector<std::string> rev;
  for (std::size_t i = args.size(); i-- > 1;) rev.push_back(args[i]);
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }

  try {
    if (*predict) return cmd_predict(pa, g, out, err);
    if (*exact) return cmd_exact(ea, g, out, err);
    if (*integ) return cmd_integrate(ia, g, out, err);
    if (*sweep) return cmd_sweep(sa, g, out, err);
    if (*compare) return cmd_compare(ca, g, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace matblow::cli
