#include "cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "dqaem/data_io.hpp"
#include "dqaem/estimators.hpp"
#include "dqaem/harness.hpp"
#include "dqaem/random.hpp"

namespace dqaem::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ScheduleFlags {
  std::string kind = "exponential";
  double gamma_init = 1.0;
  double beta_init = 0.7;
  double rate = kDefaultScheduleRate;
  double cutoff = kDefaultScheduleCutoff;

  void add_to(CLI::App& app) {
    app.add_option("--schedule", kind, "Annealing schedule: exponential or constant")
        ->check(CLI::IsMember({"exponential", "constant"}))
        ->capture_default_str();
    app.add_option("--gamma-init", gamma_init, "Initial DQAEM annealing strength")->capture_default_str();
    app.add_option("--beta-init", beta_init, "Initial DSAEM inverse temperature")->capture_default_str();
    app.add_option("--rate", rate, "Multiplicative schedule rate per iteration, in (0, 1]")
        ->capture_default_str();
    app.add_option("--cutoff", cutoff, "Distance to the target below which the schedule snaps to it")
        ->capture_default_str();
  }

  Schedule gamma() const {
    return kind == "constant" ? constant_schedule(gamma_init) : gamma_schedule(gamma_init, rate, cutoff);
  }
  Schedule beta() const {
    return kind == "constant" ? constant_schedule(beta_init) : beta_schedule(beta_init, rate, cutoff);
  }
};

// Components spaced 3 apart along the first axis with identity covariance;
// K = 3, D = 2 reproduces the paper preset exactly.
GmmParams line_params(std::size_t k, std::size_t d) {
  if (k < 1 || d < 1) throw UsageError("--k and --dim must be >= 1");
  if (k == 3 && d == 2) return paper_true_params();
  Vector w = Vector::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k));
  w /= w.sum();
  std::vector<Vector> means;
  for (std::size_t c = 0; c < k; ++c) {
    Vector mu = Vector::Zero(static_cast<Eigen::Index>(d));
    mu[0] = 3.0 * (static_cast<double>(c) - 0.5 * static_cast<double>(k - 1));
    means.push_back(mu);
  }
  std::vector<Matrix> covs(k, Matrix::Identity(static_cast<Eigen::Index>(d), static_cast<Eigen::Index>(d)));
  return GmmParams(std::move(w), std::move(means), std::move(covs));
}

std::vector<Algorithm> parse_algorithm_list(const std::string& list) {
  std::vector<Algorithm> out;
  std::stringstream ss(list);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    Algorithm a;
    try {
      a = parse_algorithm(item);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    if (std::ranges::find(out, a) == out.end()) out.push_back(a);
  }
  if (out.empty()) throw UsageError("--algos selects no algorithm");
  return out;
}

std::string fixed(double v, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

struct GenerateCmd {
  std::string preset = "paper";
  std::size_t n = 600;
  std::size_t k = 3;
  std::size_t dim = 2;
  std::uint64_t seed = 0;
  std::string output;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("generate", "Sample a synthetic Gaussian-mixture dataset to CSV");
    sub->add_option("--preset", preset, "Dataset preset (paper: means (-3,0),(0,0),(3,0), unit covariances)")
        ->check(CLI::IsMember({"paper", "line"}))
        ->capture_default_str();
    sub->add_option("--n", n, "Number of points")->capture_default_str();
    sub->add_option("--k", k, "Number of components (components spaced 3 apart on x1)")->capture_default_str();
    sub->add_option("--dim", dim, "Dimension")->capture_default_str();
    sub->add_option("--seed", seed, "Generator seed")->capture_default_str();
    sub->add_option("-o,--output", output, "Output CSV path; a <output>.json sidecar is written alongside")
        ->required();
  }

  int run(std::ostream& out) const {
    if (n < 1) throw UsageError("--n must be >= 1");
    GeneratorSpec spec{line_params(k, dim), n, seed};
    const Dataset data = sample_gmm(spec);
    write_csv(data, output);
    json side{{"schema_version", kSchemaVersion},
              {"kind", "generator"},
              {"preset", preset},
              {"n_points", n},
              {"seed", seed},
              {"rng", kRngName},
              {"normal_sampler", kNormalMethod},
              {"true_params", params_to_json(spec.true_params)}};
    write_json_file(output + ".json", side);
    out << "wrote " << n << " points (D=" << dim << ", K=" << k << ") to " << output << "\n";
    return kExitOk;
  }
};

struct FitCmd {
  std::string input;
  std::string output;
  std::string algo = "em";
  std::size_t k = 3;
  std::uint64_t seed = 0;
  std::string init_json;
  std::size_t max_iters = 500;
  double rel_tol = 1e-8;
  ScheduleFlags sched;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("fit", "Fit one mixture with EM, DSAEM or DQAEM");
    sub->add_option("-i,--input", input, "Dataset CSV")->required();
    sub->add_option("-o,--output", output, "Result JSON path")->required();
    sub->add_option("--algo", algo, "em, dsaem or dqaem")
        ->check(CLI::IsMember({"em", "dsaem", "dqaem"}, CLI::ignore_case))
        ->capture_default_str();
    sub->add_option("--k", k, "Number of components")->capture_default_str();
    sub->add_option("--seed", seed, "Seed for the random initialization")->capture_default_str();
    sub->add_option("--init-json", init_json, "Start from final_params (or true_params) of a JSON document");
    sub->add_option("--max-iters", max_iters, "Iteration cap")->capture_default_str();
    sub->add_option("--rel-tol", rel_tol, "Relative objective change that counts as converged")
        ->capture_default_str();
    sched.add_to(*sub);
  }

  int run(std::ostream& out) const {
    const Dataset data = read_csv(input);
    FitConfig config = default_config(parse_algorithm(algo));
    config.max_iters = max_iters;
    config.rel_tol = rel_tol;
    config.seed = seed;
    try {
      if (config.algorithm == Algorithm::kDqaem) config.schedule = sched.gamma();
      if (config.algorithm == Algorithm::kDsaem) config.schedule = sched.beta();
      config.validate();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }

    GmmParams init = [&] {
      if (init_json.empty()) return random_init(data, k, seed);
      const json j = json::parse(read_text_file(init_json));
      if (j.contains("final_params")) return params_from_json(j.at("final_params"));
      return params_from_json(j.at("true_params"));
    }();

    const FitResult result = fit(data, config, init);
    write_result_json(result, config, output);
    out << to_string(result.algorithm) << ": objective " << fixed(result.trace.back().objective)
        << ", log-likelihood " << fixed(result.trace.back().log_likelihood) << ", iterations "
        << result.iterations_used << (result.converged ? " (converged)" : " (iteration cap)") << "\n";
    return kExitOk;
  }
};

struct BenchCmd {
  std::string preset = "paper";
  std::size_t trials = 1000;
  std::uint64_t master_seed = 0;
  std::optional<std::uint64_t> data_seed;
  std::size_t n = 600;
  std::string algos = "em,dsaem,dqaem";
  std::size_t max_iters = 500;
  double rel_tol = 1e-8;
  double threshold = 0.3;
  std::size_t jobs = 1;
  bool init_at_truth = false;
  std::string output = "bench_report.json";
  std::string trace_output;
  ScheduleFlags sched;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("bench", "Paired-trial success-ratio comparison");
    sub->add_option("--preset", preset, "Experiment preset")
        ->check(CLI::IsMember({"paper"}))
        ->capture_default_str();
    sub->add_option("--trials", trials, "Number of paired trials")->capture_default_str();
    sub->add_option("--master-seed", master_seed, "Seed fanned out to every trial")->capture_default_str();
    sub->add_option("--data-seed", data_seed, "Dataset seed (defaults to the master seed)");
    sub->add_option("--n", n, "Dataset size")->capture_default_str();
    sub->add_option("--algos", algos, "Comma-separated subset of em,dsaem,dqaem")->capture_default_str();
    sub->add_option("--max-iters", max_iters, "Iteration cap per fit")->capture_default_str();
    sub->add_option("--rel-tol", rel_tol, "Convergence threshold")->capture_default_str();
    sub->add_option("--threshold", threshold, "Success threshold c: ||mu_hat - mu||^2 <= c * tr(Sigma)")
        ->capture_default_str();
    sub->add_option("--jobs", jobs, "Worker threads (0 = hardware concurrency)")->capture_default_str();
    sub->add_flag("--init-at-truth", init_at_truth, "Start every trial at the generating parameters");
    sub->add_option("-o,--output", output, "Report JSON path")->capture_default_str();
    sub->add_option("--trace-output", trace_output,
                    "Trace CSV of the first trial (defaults to <output>.trace.csv)");
    sched.add_to(*sub);
  }

  int run(std::ostream& out) const {
    BenchConfig config;
    if (threshold <= 0.0) throw UsageError("--threshold must be > 0");
    if (trials < 1) throw UsageError("--trials must be >= 1");
    config.algorithms = parse_algorithm_list(algos);
    try {
      config.gamma = sched.gamma();
      config.beta = sched.beta();
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    config.generator = paper_generator_spec(data_seed.value_or(master_seed), n);
    config.n_trials = trials;
    config.master_seed = master_seed;
    config.max_iters = max_iters;
    config.rel_tol = rel_tol;
    config.criterion.threshold = threshold;
    config.jobs = jobs;
    config.init_at_truth = init_at_truth;

    const BenchReport report = run_benchmark(config);
    write_report_json(report, output);

    std::vector<FitResult> first;
    for (const auto& o : report.trials.front().outcomes) {
      if (o.fit) first.push_back(*o.fit);
    }
    const std::string trace_path = trace_output.empty() ? output + ".trace.csv" : trace_output;
    if (!first.empty()) emit_trace_table(first, trace_path);

    out << format_report_table(report);
    out << "\nreport: " << output << "\n";
    if (!first.empty()) out << "trace:  " << trace_path << "\n";
    return kExitOk;
  }
};

struct TraceCmd {
  std::string input;
  std::uint64_t data_seed = 0;
  std::size_t n = 600;
  std::uint64_t seed = 0;
  std::size_t k = 3;
  std::string algos = "em,dsaem,dqaem";
  std::size_t max_iters = 500;
  double rel_tol = 1e-8;
  std::string output;
  ScheduleFlags sched;

  void add(CLI::App& app) {
    auto* sub = app.add_subcommand("trace", "Per-iteration objective traces of each algorithm from one init");
    sub->add_option("-i,--input", input, "Dataset CSV (defaults to the paper preset dataset)");
    sub->add_option("--data-seed", data_seed, "Preset dataset seed when no input is given")
        ->capture_default_str();
    sub->add_option("--n", n, "Preset dataset size when no input is given")->capture_default_str();
    sub->add_option("--seed", seed, "Seed for the shared random initialization")->capture_default_str();
    sub->add_option("--k", k, "Number of components")->capture_default_str();
    sub->add_option("--algos", algos, "Comma-separated subset of em,dsaem,dqaem")->capture_default_str();
    sub->add_option("--max-iters", max_iters, "Iteration cap")->capture_default_str();
    sub->add_option("--rel-tol", rel_tol, "Convergence threshold")->capture_default_str();
    sub->add_option("-o,--output", output, "Trace CSV path")->required();
    sched.add_to(*sub);
  }

  int run(std::ostream& out) const {
    const Dataset data = input.empty() ? sample_gmm(paper_generator_spec(data_seed, n)) : read_csv(input);
    const auto list = parse_algorithm_list(algos);
    const GmmParams init = random_init(data, k, seed);
    std::vector<FitResult> results;
    for (Algorithm a : list) {
      FitConfig config = default_config(a);
      try {
        if (a == Algorithm::kDqaem) config.schedule = sched.gamma();
        if (a == Algorithm::kDsaem) config.schedule = sched.beta();
      } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
      }
      config.max_iters = max_iters;
      config.rel_tol = rel_tol;
      config.seed = seed;
      results.push_back(fit(data, config, init));
      out << to_string(a) << ": final log-likelihood " << fixed(results.back().trace.back().log_likelihood)
          << " after " << results.back().iterations_used << " iterations\n";
    }
    emit_trace_table(results, output);
    out << "trace: " << output << "\n";
    return kExitOk;
  }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Gaussian-mixture estimation with EM, deterministic annealing EM and "
               "deterministic quantum annealing EM"};
  app.name("dqaem");
  app.require_subcommand(1);

  GenerateCmd gen;
  FitCmd fitc;
  BenchCmd bench;
  TraceCmd trace;
  gen.add(app);
  fitc.add(app);
  bench.add(app);
  trace.add(app);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  try {
    if (app.got_subcommand("generate")) return gen.run(out);
    if (app.got_subcommand("fit")) return fitc.run(out);
    if (app.got_subcommand("bench")) return bench.run(out);
    if (app.got_subcommand("trace")) return trace.run(out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace dqaem::cli
