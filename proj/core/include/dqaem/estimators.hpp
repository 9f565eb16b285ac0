#pragma once

// EM, DSAEM and DQAEM driver loops.

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dqaem/model.hpp"
#include "dqaem/posteriors.hpp"

namespace dqaem {

enum class Algorithm { kEm, kDsaem, kDqaem };

std::string_view to_string(Algorithm a);
/// Accepts "em", "dsaem", "dqaem" in any case.
Algorithm parse_algorithm(std::string_view name);

inline constexpr double kDefaultScheduleRate = 0.95;
inline constexpr double kDefaultScheduleCutoff = 1e-3;

/// Annealing parameter as a function of iteration t.
///
/// Exponential schedules relax geometrically toward `target`:
///   value(t) = target + (init - target) * rate^t,
/// snapping to exactly `target` once |value - target| < cutoff. For Gamma
/// (target 0) this is Gamma_init * rate^t; for beta (target 1) it is
/// 1 - (1 - beta_init) * rate^t. Constant schedules always return `init`.
struct Schedule {
  enum class Kind { kConstant, kExponential };

  Kind kind = Kind::kConstant;
  double init = 0.0;
  double rate = 1.0;
  double target = 0.0;
  double cutoff = kDefaultScheduleCutoff;

  double value(std::size_t t) const;
  /// True once value(t) has reached its terminal value.
  bool terminal(std::size_t t) const;
};

/// Throws std::invalid_argument when rate is outside (0, 1] or cutoff < 0.
Schedule make_schedule(Schedule::Kind kind, double init, double rate, double target,
                       double cutoff = kDefaultScheduleCutoff);

Schedule constant_schedule(double value);
/// Gamma_init * rate^t toward 0.
Schedule gamma_schedule(double init = 1.0, double rate = kDefaultScheduleRate,
                        double cutoff = kDefaultScheduleCutoff);
/// 1 - (1 - beta_init) * rate^t toward 1.
Schedule beta_schedule(double init = 0.7, double rate = kDefaultScheduleRate,
                       double cutoff = kDefaultScheduleCutoff);

struct FitConfig {
  Algorithm algorithm = Algorithm::kEm;
  /// Gamma for DQAEM, beta for DSAEM; ignored by EM.
  Schedule schedule = constant_schedule(1.0);
  std::size_t max_iters = 500;
  double rel_tol = 1e-8;
  std::uint64_t seed = 0;
  /// DQAEM coupling; defaults to all-ones when unset.
  std::optional<CouplingMatrix> coupling;

  void validate() const;
};

/// Default schedule for an algorithm: Gamma 1.0 -> 0 for DQAEM, beta 0.7 -> 1
/// for DSAEM, unused constant for EM.
FitConfig default_config(Algorithm algorithm);

struct TraceRecord {
  std::size_t iteration = 0;
  double annealing = 0.0;  // Gamma or beta in effect for this E step
  double objective = 0.0;  // log-likelihood, -F_beta or -F_Gamma
  double log_likelihood = 0.0;
};

struct DegeneracyEvent {
  std::size_t iteration = 0;
  std::size_t component = 0;
  double effective_count = 0.0;
};

struct FitResult {
  Algorithm algorithm = Algorithm::kEm;
  GmmParams final_params;
  std::vector<TraceRecord> trace;
  bool converged = false;
  std::size_t iterations_used = 0;
  std::vector<DegeneracyEvent> events;
  /// Worst responsibility row-sum error and smallest entry over all E steps.
  ResponsibilityStats responsibility_stats;
};

/// Weighted moments of the data under `resp`. Components whose effective
/// count falls below 1e-8 * N are re-seeded: mean at the point with the least
/// total responsibility mass, covariance at the global covariance. Indices of
/// re-seeded components are appended to `reseeded` when given.
GmmParams m_step(const Dataset& data, const Responsibilities& resp,
                 std::vector<std::size_t>* reseeded = nullptr);

/// Iterates E step, m_step and schedule advance until the annealing parameter
/// is terminal and |delta objective| / (1 + |objective|) < rel_tol, or max_iters.
/// The trace row for iteration t describes theta^(t), the parameters fed to that E step.
FitResult fit(const Dataset& data, const FitConfig& config, const GmmParams& init);

/// Means uniform in the data's bounding box, every covariance
/// diag(per-axis data variance), uniform weights.
GmmParams random_init(const Dataset& data, std::size_t k, std::uint64_t seed);

/// Maximum-likelihood covariance of the whole dataset (divides by N).
Matrix global_covariance(const Dataset& data);

}  // namespace dqaem
