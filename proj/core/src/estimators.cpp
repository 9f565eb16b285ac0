#include "dqaem/estimators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>
#include <string>

#include "dqaem/random.hpp"

namespace dqaem {

namespace {

constexpr double kDegenerateFraction = 1e-8;

struct EStep {
  Responsibilities resp;
  double objective = 0.0;
  double log_likelihood = 0.0;
};

double log_likelihood_from_energies(const Matrix& h) {
  double total = 0.0;
  for (Eigen::Index i = 0; i < h.rows(); ++i) total += log_sum_exp((-h.row(i)).transpose());
  return total;
}

EStep run_estep(const Matrix& energies, Algorithm algorithm, double annealing,
                const CouplingMatrix& coupling) {
  EStep e;
  switch (algorithm) {
    case Algorithm::kEm:
      e.resp = classical_posterior(energies);
      e.log_likelihood = log_likelihood_from_energies(energies);
      e.objective = e.log_likelihood;
      break;
    case Algorithm::kDsaem: {
      auto t = tempered_estep(energies, annealing);
      e.resp = std::move(t.responsibilities);
      e.objective = t.negative_free_energy;
      e.log_likelihood = annealing == 1.0 ? e.objective : log_likelihood_from_energies(energies);
      break;
    }
    case Algorithm::kDqaem: {
      auto q = quantum_estep(energies, annealing, coupling);
      e.resp = std::move(q.responsibilities);
      e.objective = -q.free_energy;
      e.log_likelihood = annealing == 0.0 ? e.objective : log_likelihood_from_energies(energies);
      break;
    }
  }
  return e;
}

}  // namespace

std::string_view to_string(Algorithm a) {
  switch (a) {
    case Algorithm::kEm:
      return "EM";
    case Algorithm::kDsaem:
      return "DSAEM";
    case Algorithm::kDqaem:
      return "DQAEM";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "em") return Algorithm::kEm;
  if (lower == "dsaem") return Algorithm::kDsaem;
  if (lower == "dqaem") return Algorithm::kDqaem;
  throw std::invalid_argument("unknown algorithm '" + std::string(name) + "'");
}

double Schedule::value(std::size_t t) const {
  if (kind == Kind::kConstant) return init;
  const double v = target + (init - target) * std::pow(rate, static_cast<double>(t));
  return std::abs(v - target) < cutoff ? target : v;
}

bool Schedule::terminal(std::size_t t) const {
  return kind == Kind::kConstant || value(t) == target;
}

Schedule make_schedule(Schedule::Kind kind, double init, double rate, double target, double cutoff) {
  if (!(rate > 0.0 && rate <= 1.0)) throw std::invalid_argument("schedule rate must be in (0, 1]");
  if (!(cutoff >= 0.0)) throw std::invalid_argument("schedule cutoff must be >= 0");
  if (!std::isfinite(init) || !std::isfinite(target)) {
    throw std::invalid_argument("schedule endpoints must be finite");
  }
  return Schedule{kind, init, rate, target, cutoff};
}

Schedule constant_schedule(double value) {
  return make_schedule(Schedule::Kind::kConstant, value, 1.0, value, 0.0);
}

Schedule gamma_schedule(double init, double rate, double cutoff) {
  if (init < 0.0) throw std::invalid_argument("gamma schedule must start at >= 0");
  return make_schedule(Schedule::Kind::kExponential, init, rate, 0.0, cutoff);
}

Schedule beta_schedule(double init, double rate, double cutoff) {
  if (!(init > 0.0 && init <= 1.0)) throw std::invalid_argument("beta schedule must start in (0, 1]");
  return make_schedule(Schedule::Kind::kExponential, init, rate, 1.0, cutoff);
}

void FitConfig::validate() const {
  if (max_iters < 1) throw std::invalid_argument("max_iters must be >= 1");
  if (!(rel_tol > 0.0)) throw std::invalid_argument("rel_tol must be > 0");
  if (!(schedule.rate > 0.0 && schedule.rate <= 1.0)) {
    throw std::invalid_argument("schedule rate must be in (0, 1]");
  }
  if (algorithm == Algorithm::kDqaem && schedule.value(0) < 0.0) {
    throw std::invalid_argument("gamma must be >= 0");
  }
  if (algorithm == Algorithm::kDsaem && !(schedule.value(0) > 0.0)) {
    throw std::invalid_argument("beta must be > 0");
  }
}

FitConfig default_config(Algorithm algorithm) {
  FitConfig c;
  c.algorithm = algorithm;
  switch (algorithm) {
    case Algorithm::kEm:
      c.schedule = constant_schedule(1.0);
      break;
    case Algorithm::kDsaem:
      c.schedule = beta_schedule();
      break;
    case Algorithm::kDqaem:
      c.schedule = gamma_schedule();
      break;
  }
  return c;
}

Matrix global_covariance(const Dataset& data) {
  const Vector mean = data.points.colwise().mean().transpose();
  const Matrix centered = data.points.rowwise() - mean.transpose();
  return centered.transpose() * centered / static_cast<double>(data.size());
}

GmmParams m_step(const Dataset& data, const Responsibilities& resp,
                 std::vector<std::size_t>* reseeded) {
  const Eigen::Index n = data.points.rows();
  const Eigen::Index d = data.points.cols();
  const Eigen::Index k = resp.r.cols();
  if (resp.r.rows() != n || k < 1) throw InvalidParameter("responsibilities do not match dataset");

  const Matrix& y = data.points;
  Vector counts = resp.r.colwise().sum().transpose();
  Vector weights(k);
  std::vector<Vector> means(static_cast<std::size_t>(k));
  std::vector<Matrix> covs(static_cast<std::size_t>(k));
  std::optional<Matrix> global_cov;

  for (Eigen::Index c = 0; c < k; ++c) {
    const auto cu = static_cast<std::size_t>(c);
    if (counts[c] < kDegenerateFraction * static_cast<double>(n)) {
      // Re-seed at the point the current mixture explains least.
      Eigen::Index worst = 0;
      resp.r.rowwise().maxCoeff().minCoeff(&worst);
      if (!global_cov) global_cov = global_covariance(data);
      means[cu] = y.row(worst).transpose();
      covs[cu] = *global_cov;
      weights[c] = 1.0 / static_cast<double>(n);
      if (reseeded) reseeded->push_back(cu);
      continue;
    }
    const auto w = resp.r.col(c);
    Vector mu = (y.transpose() * w) / counts[c];
    Matrix cov = Matrix::Zero(d, d);
    for (Eigen::Index i = 0; i < n; ++i) {
      const Vector diff = y.row(i).transpose() - mu;
      cov.noalias() += w[i] * diff * diff.transpose();
    }
    cov /= counts[c];
    weights[c] = counts[c] / static_cast<double>(n);
    means[cu] = std::move(mu);
    covs[cu] = std::move(cov);
  }
  return GmmParams::regularized(std::move(weights), std::move(means), std::move(covs));
}

FitResult fit(const Dataset& data, const FitConfig& config, const GmmParams& init) {
  config.validate();
  if (init.dim() != data.dim()) throw InvalidParameter("initial parameters have the wrong dimension");
  const CouplingMatrix coupling = config.coupling ? *config.coupling
                                                  : CouplingMatrix::all_ones(init.components());

  FitResult result{config.algorithm, init, {}, false, 0, {}, {}};
  GmmParams current = init;
  std::optional<double> previous;
  bool previous_terminal = false;

  for (std::size_t t = 0; t < config.max_iters; ++t) {
    const double annealing = config.algorithm == Algorithm::kEm ? 1.0 : config.schedule.value(t);
    const bool terminal = config.algorithm == Algorithm::kEm || config.schedule.terminal(t);

    const Matrix energies = hamiltonian_matrix(data, current);
    EStep e = run_estep(energies, config.algorithm, annealing, coupling);

    const auto stats = responsibility_stats(e.resp);
    result.responsibility_stats.max_row_sum_error =
        std::max(result.responsibility_stats.max_row_sum_error, stats.max_row_sum_error);
    result.responsibility_stats.min_entry =
        std::min(result.responsibility_stats.min_entry, stats.min_entry);
    result.trace.push_back({t, annealing, e.objective, e.log_likelihood});

    if (!std::isfinite(e.objective)) {
      throw std::runtime_error("non-finite objective at iteration " + std::to_string(t));
    }

    // theta^(t) already satisfies the stopping rule; it is the final estimate.
    const bool settled = terminal && previous_terminal && previous &&
                         std::abs(e.objective - *previous) / (1.0 + std::abs(e.objective)) <
                             config.rel_tol;
    if (settled) {
      result.converged = true;
      break;
    }

    std::vector<std::size_t> reseeded;
    current = m_step(data, e.resp, &reseeded);
    for (std::size_t c : reseeded) {
      result.events.push_back({t, c, e.resp.r.col(static_cast<Eigen::Index>(c)).sum()});
    }
    previous = e.objective;
    previous_terminal = terminal;
  }

  result.final_params = std::move(current);
  result.iterations_used = result.trace.size();
  return result;
}

GmmParams random_init(const Dataset& data, std::size_t k, std::uint64_t seed) {
  if (k < 1) throw InvalidParameter("random_init needs K >= 1");
  const Eigen::Index d = data.points.cols();
  const Vector lo = data.points.colwise().minCoeff().transpose();
  const Vector hi = data.points.colwise().maxCoeff().transpose();
  const Matrix gcov = global_covariance(data);

  Rng rng(seed);
  std::vector<Vector> means;
  std::vector<Matrix> covs;
  for (std::size_t c = 0; c < k; ++c) {
    Vector mu(d);
    for (Eigen::Index j = 0; j < d; ++j) mu[j] = rng.uniform(lo[j], hi[j]);
    means.push_back(std::move(mu));
    Matrix cov = gcov.diagonal().asDiagonal();
    covs.push_back(std::move(cov));
  }
  Vector w = Vector::Constant(static_cast<Eigen::Index>(k), 1.0 / static_cast<double>(k));
  return GmmParams::regularized(std::move(w), std::move(means), std::move(covs));
}

}  // namespace dqaem
