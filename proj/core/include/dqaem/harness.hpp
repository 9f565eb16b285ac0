#pragma once

// Paired-trial comparison of EM, DSAEM and DQAEM from shared initializations.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "dqaem/data_io.hpp"
#include "dqaem/estimators.hpp"

namespace dqaem {

/// Success iff every matched mean lies within squared distance
/// threshold * trace(Sigma_true) of its true mean.
struct SuccessCriterion {
  double threshold = 0.3;
};

/// Permutation p minimizing sum_k ||estimated.mean(p[k]) - truth.mean(k)||^2,
/// by brute force over K! orderings. Throws std::invalid_argument on K
/// mismatch or K > 8.
std::vector<std::size_t> match_components(const GmmParams& estimated, const GmmParams& truth);

bool is_success(const GmmParams& estimated, const GmmParams& truth, const SuccessCriterion& crit);

struct AlgorithmOutcome {
  Algorithm algorithm = Algorithm::kEm;
  bool ok = true;  // false when the fit threw (e.g. a non-finite objective)
  std::string error;
  bool success = false;
  std::optional<FitResult> fit;

  double final_log_likelihood() const;
};

struct TrialRecord {
  std::size_t trial_id = 0;
  std::uint64_t init_seed = 0;
  GmmParams init;
  std::vector<AlgorithmOutcome> outcomes;  // in BenchConfig::algorithms order

  const AlgorithmOutcome* find(Algorithm a) const;
};

struct BenchConfig {
  GeneratorSpec generator = paper_generator_spec(0);
  std::vector<Algorithm> algorithms{Algorithm::kEm, Algorithm::kDsaem, Algorithm::kDqaem};
  std::size_t n_trials = 1000;
  std::uint64_t master_seed = 0;
  Schedule gamma = gamma_schedule();
  Schedule beta = beta_schedule();
  std::size_t max_iters = 500;
  double rel_tol = 1e-8;
  SuccessCriterion criterion;
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  std::size_t jobs = 1;
  /// Start every trial at the generating parameters instead of random_init.
  bool init_at_truth = false;

  FitConfig fit_config(Algorithm a, std::uint64_t seed) const;
};

/// 2 x 2 table of DQAEM outcome (rows) against EM outcome (columns), as
/// fractions of all trials. Index 0 is success, 1 failure.
using Contingency = std::array<std::array<double, 2>, 2>;

struct BenchReport {
  BenchConfig config;
  Dataset dataset;
  std::vector<TrialRecord> trials;
  std::vector<std::pair<Algorithm, double>> success_ratio;
  std::optional<Contingency> dqaem_vs_em;
  /// Highest final log-likelihood among all successful fits.
  std::optional<double> best_log_likelihood;

  std::optional<double> ratio(Algorithm a) const;
};

/// Samples one dataset from the generator spec, then runs every algorithm
/// from the same per-trial init. Trial seeds are mix_seed(master_seed, trial).
/// Reports are identical for any worker count.
BenchReport run_benchmark(const BenchConfig& config);

nlohmann::json report_to_json(const BenchReport& report);
void write_report_json(const BenchReport& report, const std::filesystem::path& path);

/// Plain-text rendering of the success ratios and the contingency table.
std::string format_report_table(const BenchReport& report);

/// CSV rows "iteration,algorithm,objective,log_likelihood", one per trace row.
std::string trace_table_csv(const std::vector<FitResult>& results);
void emit_trace_table(const std::vector<FitResult>& results, const std::filesystem::path& path);

}  // namespace dqaem
