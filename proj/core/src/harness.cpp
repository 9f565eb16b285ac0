#include "dqaem/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "dqaem/random.hpp"

namespace dqaem {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxMatchComponents = 8;

TrialRecord run_trial(const BenchConfig& config, const Dataset& data, std::size_t trial) {
  const std::uint64_t seed = mix_seed(config.master_seed, trial);
  const GmmParams& truth = config.generator.true_params;
  GmmParams init = config.init_at_truth ? truth : random_init(data, truth.components(), seed);

  TrialRecord record{trial, seed, init, {}};
  for (Algorithm a : config.algorithms) {
    AlgorithmOutcome out;
    out.algorithm = a;
    try {
      FitResult r = fit(data, config.fit_config(a, seed), init);
      out.success = is_success(r.final_params, truth, config.criterion);
      out.fit = std::move(r);
    } catch (const std::exception& e) {
      out.ok = false;
      out.error = e.what();
    }
    record.outcomes.push_back(std::move(out));
  }
  return record;
}

std::string percent(double fraction) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%5.1f %%", 100.0 * fraction);
  return buf;
}

}  // namespace

std::vector<std::size_t> match_components(const GmmParams& estimated, const GmmParams& truth) {
  const std::size_t k = truth.components();
  if (estimated.components() != k) throw std::invalid_argument("match_components: K mismatch");
  if (estimated.dim() != truth.dim()) throw std::invalid_argument("match_components: D mismatch");
  if (k > kMaxMatchComponents) throw std::invalid_argument("match_components: K too large");

  std::vector<std::size_t> perm(k);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<std::size_t> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t c = 0; c < k; ++c) cost += (estimated.mean(perm[c]) - truth.mean(c)).squaredNorm();
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return best;
}

bool is_success(const GmmParams& estimated, const GmmParams& truth, const SuccessCriterion& crit) {
  if (!(crit.threshold > 0.0)) throw std::invalid_argument("success threshold must be > 0");
  const auto perm = match_components(estimated, truth);
  for (std::size_t c = 0; c < truth.components(); ++c) {
    const double err = (estimated.mean(perm[c]) - truth.mean(c)).squaredNorm();
    if (err > crit.threshold * truth.covariance(c).trace()) return false;
  }
  return true;
}

double AlgorithmOutcome::final_log_likelihood() const {
  if (!fit || fit->trace.empty()) return std::numeric_limits<double>::quiet_NaN();
  return fit->trace.back().log_likelihood;
}

const AlgorithmOutcome* TrialRecord::find(Algorithm a) const {
  for (const auto& o : outcomes) {
    if (o.algorithm == a) return &o;
  }
  return nullptr;
}

FitConfig BenchConfig::fit_config(Algorithm a, std::uint64_t seed) const {
  FitConfig c = default_config(a);
  if (a == Algorithm::kDqaem) c.schedule = gamma;
  if (a == Algorithm::kDsaem) c.schedule = beta;
  c.max_iters = max_iters;
  c.rel_tol = rel_tol;
  c.seed = seed;
  return c;
}

std::optional<double> BenchReport::ratio(Algorithm a) const {
  for (const auto& [alg, r] : success_ratio) {
    if (alg == a) return r;
  }
  return std::nullopt;
}

BenchReport run_benchmark(const BenchConfig& config) {
  if (config.n_trials < 1) throw std::invalid_argument("n_trials must be >= 1");
  if (config.algorithms.empty()) throw std::invalid_argument("no algorithms selected");

  Dataset data = sample_gmm(config.generator);

  std::vector<std::optional<TrialRecord>> slots(config.n_trials);
  std::size_t workers = config.jobs == 0 ? std::thread::hardware_concurrency() : config.jobs;
  workers = std::clamp<std::size_t>(workers, 1, config.n_trials);

  if (workers == 1) {
    for (std::size_t t = 0; t < config.n_trials; ++t) slots[t] = run_trial(config, data, t);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t t = next++; t < config.n_trials; t = next++) {
          slots[t] = run_trial(config, data, t);
        }
      });
    }
    for (auto& th : pool) th.join();
  }

  BenchReport report{config, std::move(data), {}, {}, std::nullopt, std::nullopt};
  report.trials.reserve(config.n_trials);
  for (auto& s : slots) report.trials.push_back(std::move(*s));

  const double n = static_cast<double>(config.n_trials);
  for (Algorithm a : config.algorithms) {
    std::size_t wins = 0;
    for (const auto& t : report.trials) {
      const auto* o = t.find(a);
      if (o->success) ++wins;
      if (o->success && o->ok) {
        const double ll = o->final_log_likelihood();
        if (!report.best_log_likelihood || ll > *report.best_log_likelihood) report.best_log_likelihood = ll;
      }
    }
    report.success_ratio.emplace_back(a, static_cast<double>(wins) / n);
  }

  const bool has_em = std::ranges::find(config.algorithms, Algorithm::kEm) != config.algorithms.end();
  const bool has_dq = std::ranges::find(config.algorithms, Algorithm::kDqaem) != config.algorithms.end();
  if (has_em && has_dq) {
    std::array<std::array<std::size_t, 2>, 2> counts{};
    for (const auto& t : report.trials) {
      const int row = t.find(Algorithm::kDqaem)->success ? 0 : 1;
      const int col = t.find(Algorithm::kEm)->success ? 0 : 1;
      ++counts[static_cast<std::size_t>(row)][static_cast<std::size_t>(col)];
    }
    Contingency table{};
    for (std::size_t r = 0; r < 2; ++r) {
      for (std::size_t c = 0; c < 2; ++c) table[r][c] = static_cast<double>(counts[r][c]) / n;
    }
    report.dqaem_vs_em = table;
  }
  return report;
}

json report_to_json(const BenchReport& report) {
  const BenchConfig& cfg = report.config;
  json algos = json::array();
  for (Algorithm a : cfg.algorithms) algos.push_back(to_string(a));

  json ratios = json::object();
  for (const auto& [a, r] : report.success_ratio) ratios[std::string(to_string(a))] = r;

  json trials = json::array();
  for (const auto& t : report.trials) {
    json outcomes = json::array();
    for (const auto& o : t.outcomes) {
      json row{{"algorithm", to_string(o.algorithm)}, {"ok", o.ok}, {"success", o.success}};
      if (o.fit) {
        row["final_log_likelihood"] = o.final_log_likelihood();
        row["final_objective"] = o.fit->trace.back().objective;
        row["iterations"] = o.fit->iterations_used;
        row["converged"] = o.fit->converged;
        row["degeneracy_events"] = o.fit->events.size();
        row["final_params"] = params_to_json(o.fit->final_params);
      } else {
        row["error"] = o.error;
      }
      outcomes.push_back(std::move(row));
    }
    trials.push_back({{"trial_id", t.trial_id}, {"init_seed", t.init_seed},
                      {"init_params", params_to_json(t.init)}, {"results", outcomes}});
  }

  json doc{{"schema_version", kSchemaVersion},
           {"kind", "benchmark"},
           {"rng", kRngName},
           {"normal_sampler", kNormalMethod},
           {"config",
            {{"algorithms", algos},
             {"n_trials", cfg.n_trials},
             {"master_seed", cfg.master_seed},
             {"max_iters", cfg.max_iters},
             {"rel_tol", cfg.rel_tol},
             {"gamma_schedule", schedule_to_json(cfg.gamma)},
             {"beta_schedule", schedule_to_json(cfg.beta)},
             {"init", cfg.init_at_truth ? "truth" : "random_init"},
             {"generator",
              {{"n_points", cfg.generator.n_points},
               {"seed", cfg.generator.seed},
               {"true_params", params_to_json(cfg.generator.true_params)}}}}},
           {"criterion", {{"threshold", cfg.criterion.threshold},
                          {"rule", "squared mean error <= threshold * trace(true covariance)"}}},
           {"success_ratio", ratios},
           {"trials", trials}};
  if (report.dqaem_vs_em) {
    const auto& c = *report.dqaem_vs_em;
    doc["contingency_dqaem_vs_em"] = {
        {"rows", "DQAEM success, DQAEM failure"},
        {"cols", "EM success, EM failure"},
        {"table", {{c[0][0], c[0][1]}, {c[1][0], c[1][1]}}}};
  }
  if (report.best_log_likelihood) doc["best_log_likelihood"] = *report.best_log_likelihood;
  return doc;
}

void write_report_json(const BenchReport& report, const std::filesystem::path& path) {
  write_json_file(path, report_to_json(report));
}

std::string format_report_table(const BenchReport& report) {
  std::ostringstream os;
  os << "trials: " << report.config.n_trials << "  master seed: " << report.config.master_seed
     << "  N: " << report.dataset.size() << "\n\n";
  os << "Success ratios\n";
  for (const auto& [a, r] : report.success_ratio) {
    char line[64];
    std::snprintf(line, sizeof line, "  %-6s %s\n", std::string(to_string(a)).c_str(), percent(r).c_str());
    os << line;
  }
  if (report.dqaem_vs_em) {
    const auto& c = *report.dqaem_vs_em;
    os << "\nDQAEM vs EM            EM success   EM failure   total\n";
    os << "  DQAEM success        " << percent(c[0][0]) << "      " << percent(c[0][1]) << "      "
       << percent(c[0][0] + c[0][1]) << "\n";
    os << "  DQAEM failure        " << percent(c[1][0]) << "      " << percent(c[1][1]) << "      "
       << percent(c[1][0] + c[1][1]) << "\n";
    os << "  total                " << percent(c[0][0] + c[1][0]) << "      " << percent(c[0][1] + c[1][1])
       << "      " << percent(1.0) << "\n";
  }
  if (report.best_log_likelihood) {
    char line[80];
    std::snprintf(line, sizeof line, "\nbest log-likelihood among successes: %.4f\n", *report.best_log_likelihood);
    os << line;
  }
  return os.str();
}

std::string trace_table_csv(const std::vector<FitResult>& results) {
  if (results.empty()) throw std::invalid_argument("trace table needs at least one result");
  std::string out = "iteration,algorithm,objective,log_likelihood\n";
  char buf[160];
  for (const auto& r : results) {
    const std::string name(to_string(r.algorithm));
    for (const auto& row : r.trace) {
      std::snprintf(buf, sizeof buf, "%zu,%s,%.17g,%.17g\n", row.iteration, name.c_str(), row.objective,
                    row.log_likelihood);
      out += buf;
    }
  }
  return out;
}

void emit_trace_table(const std::vector<FitResult>& results, const std::filesystem::path& path) {
  write_text_file(path, trace_table_csv(results));
}

}  // namespace dqaem
