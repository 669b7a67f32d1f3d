#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "matblow/closedform.hpp"
#include "matblow/integrator.hpp"
#include "matblow/matrix.hpp"

namespace matblow {

enum class EnsembleTag { Ginibre, GOE, SkewSymmetric, CommutingSymmetricPair, DiagonalPair };

std::string_view to_string(EnsembleTag tag) noexcept;
/// ginibre | goe | skew | commuting | diagonal
std::optional<EnsembleTag> parse_ensemble_tag(std::string_view name) noexcept;

struct EnsembleKind {
  EnsembleTag tag = EnsembleTag::Ginibre;
  std::size_t n = 2;
  double scale = 1.0;  ///< entry standard deviation

  /// Throws InvalidOptions when n == 0 or scale is not positive.
  void validate() const;
  bool is_pair() const noexcept {
    return tag == EnsembleTag::CommutingSymmetricPair || tag == EnsembleTag::DiagonalPair;
  }
};

struct Sample {
  Matrix a;
  std::optional<Matrix> b;  ///< present for the pair ensembles
};

/// Pure function of (kind, seed, index): each trial owns an independent
/// generator seeded from that triple, so trials can run in any order.
Sample sample_ensemble(const EnsembleKind& kind, std::uint64_t seed, std::uint64_t index);

/// Identity: B = Id. SampledPair: B is the second matrix of a pair ensemble.
enum class BPolicy { Identity, SampledPair };
std::string_view to_string(BPolicy p) noexcept;

struct TrialRecord {
  std::uint64_t index = 0;
  std::optional<Verdict> verdict_fwd;
  std::optional<Verdict> verdict_bwd;
  std::optional<double> t_fwd;
  std::optional<double> t_bwd;
  std::optional<double> t_est;  ///< pole extrapolated from integration
  std::optional<bool> agree;    ///< set by agreement runs only
  std::optional<std::string> failure;
};

struct SweepStats {
  std::size_t trials = 0;
  double blowup_fraction_forward = 0.0;
  double blowup_fraction_either = 0.0;
  double standard_error_either = 0.0;  ///< binomial standard error
  std::optional<std::array<double, 3>> blowup_time_quantiles;  ///< q10, q50, q90
  std::uint64_t seed = 0;
  std::optional<std::size_t> prediction_integration_agreements;
  std::size_t failures = 0;
};

struct SweepConfig {
  std::string mode;  ///< "probability" or "agreement"
  EnsembleKind kind;
  BPolicy policy = BPolicy::Identity;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
};

struct SweepResult {
  SweepConfig config;
  SweepStats stats;
  std::vector<TrialRecord> records;  ///< ordered by trial index
};

/// Aggregates per-trial records in index order. Order-independent by construction.
SweepStats aggregate(std::span<const TrialRecord> records, std::uint64_t seed);

/// Runs predict_blowup in both directions per trial. `threads` only affects
/// scheduling; the result is identical for any value.
SweepResult blowup_probability_sweep(const EnsembleKind& kind, BPolicy policy, std::size_t trials,
                                     std::uint64_t seed, unsigned threads = 1);

/// Tolerance on |T_est - T| / T for a blowup prediction to count as confirmed.
inline constexpr double kAgreementTolerance = 0.02;

/// Predicts forward blowup for one commuting pair and checks it by integrating
/// B.X.X: a Blowup verdict must end in BlowupDetected with the extrapolated pole
/// within 2%; an Eternal verdict must reach 10 (1 + 1/||AB||_F) with Completed.
TrialRecord check_agreement(const Matrix& a, const Matrix& b, std::uint64_t index,
                            const IntegrationOptions& opts = {});

/// check_agreement over CommutingSymmetricPair samples of dimension n.
SweepResult agreement_sweep(std::size_t trials, std::size_t n, std::uint64_t seed,
                            unsigned threads = 1);

/// All SweepStats fields plus the configuration echo, fixed key order.
std::string sweep_to_json(const SweepResult& result);

/// One row per trial: index,verdict_fwd,verdict_bwd,T_fwd,T_est,agree
void write_sweep_csv(std::ostream& out, const SweepResult& result);

}  // namespace matblow
