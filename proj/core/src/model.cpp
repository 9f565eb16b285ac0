#include "dqaem/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Cholesky>

#include "dqaem/linalg.hpp"

namespace dqaem {

namespace {

constexpr double kWeightSumTolerance = 1e-12;
constexpr double kSymmetryTolerance = 1e-12;
const double kLogTwoPi = std::log(2.0 * std::numbers::pi);

Eigen::LLT<Matrix> factorize(const Matrix& sigma) {
  Eigen::LLT<Matrix> llt(sigma);
  if (llt.info() != Eigen::Success) {
    throw InvalidParameter("covariance is not positive definite");
  }
  return llt;
}

double log_det_from_lower(const Matrix& lower) {
  return 2.0 * lower.diagonal().array().log().sum();
}

}  // namespace

GmmParams::GmmParams(Vector weights, std::vector<Vector> means, std::vector<Matrix> covariances)
    : weights_(std::move(weights)), means_(std::move(means)), covariances_(std::move(covariances)) {
  const auto k = static_cast<std::size_t>(weights_.size());
  if (k == 0) throw InvalidParameter("mixture needs at least one component");
  if (means_.size() != k || covariances_.size() != k) {
    throw InvalidParameter("weights, means and covariances disagree on component count");
  }
  const Eigen::Index d = means_.front().size();
  if (d == 0) throw InvalidParameter("means must have dimension >= 1");
  for (std::size_t c = 0; c < k; ++c) {
    if (means_[c].size() != d) throw InvalidParameter("means disagree on dimension");
    if (!means_[c].allFinite()) throw InvalidParameter("non-finite mean");
    const Matrix& s = covariances_[c];
    if (s.rows() != d || s.cols() != d) throw InvalidParameter("covariance has wrong shape");
    if (!s.allFinite()) throw InvalidParameter("non-finite covariance");
    if ((s - s.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
      throw InvalidParameter("covariance " + std::to_string(c) + " is not symmetric");
    }
    factorize(s);
  }
  if (!weights_.allFinite() || (weights_.array() <= 0.0).any()) {
    throw InvalidParameter("weights must be positive");
  }
  if (std::abs(weights_.sum() - 1.0) > kWeightSumTolerance) {
    throw InvalidParameter("weights must sum to 1");
  }
}

GmmParams GmmParams::regularized(Vector weights, std::vector<Vector> means,
                                 std::vector<Matrix> covariances, double ridge) {
  weights = weights.cwiseMax(kWeightFloor);
  weights /= weights.sum();
  for (auto& s : covariances) {
    Matrix sym = 0.5 * (s + s.transpose());
    sym.diagonal().array() += ridge;
    s = std::move(sym);
  }
  return GmmParams(std::move(weights), std::move(means), std::move(covariances));
}

GmmParams GmmParams::permuted(const std::vector<std::size_t>& perm) const {
  if (perm.size() != components()) throw InvalidParameter("permutation has wrong length");
  Vector w(weights_.size());
  std::vector<Vector> mu;
  std::vector<Matrix> cov;
  for (std::size_t k = 0; k < perm.size(); ++k) {
    w[static_cast<Eigen::Index>(k)] = weights_[static_cast<Eigen::Index>(perm[k])];
    mu.push_back(means_.at(perm[k]));
    cov.push_back(covariances_.at(perm[k]));
  }
  // Reordering can perturb the last bit of the weight sum; renormalize.
  w /= w.sum();
  return GmmParams(std::move(w), std::move(mu), std::move(cov));
}

bool GmmParams::operator==(const GmmParams& other) const {
  if (components() != other.components() || dim() != other.dim()) return false;
  if (weights_ != other.weights_) return false;
  for (std::size_t k = 0; k < components(); ++k) {
    if (means_[k] != other.means_[k] || covariances_[k] != other.covariances_[k]) return false;
  }
  return true;
}

Dataset::Dataset(Matrix pts, std::optional<std::vector<int>> labels, std::optional<GmmParams> truth)
    : points(std::move(pts)), true_labels(std::move(labels)), true_params(std::move(truth)) {
  if (points.rows() < 1 || points.cols() < 1) throw InvalidParameter("dataset must be non-empty");
  if (!points.allFinite()) throw InvalidParameter("dataset contains non-finite entries");
  if (true_labels && true_labels->size() != size()) {
    throw InvalidParameter("label count does not match point count");
  }
  if (true_params && true_params->dim() != dim()) {
    throw InvalidParameter("ground-truth parameters have the wrong dimension");
  }
}

ComponentCache::ComponentCache(const GmmParams& params) {
  const double d = static_cast<double>(params.dim());
  for (std::size_t k = 0; k < params.components(); ++k) {
    auto llt = factorize(params.covariance(k));
    Component c;
    c.lower = llt.matrixL();
    c.mean = params.mean(k);
    c.log_norm = -0.5 * d * kLogTwoPi - 0.5 * log_det_from_lower(c.lower);
    components_.push_back(std::move(c));
    log_weights_.push_back(std::log(params.weights()[static_cast<Eigen::Index>(k)]));
  }
}

double ComponentCache::log_gaussian(std::size_t k, const Eigen::Ref<const Vector>& y) const {
  const Component& c = components_[k];
  Vector z = y - c.mean;
  c.lower.triangularView<Eigen::Lower>().solveInPlace(z);
  return c.log_norm - 0.5 * z.squaredNorm();
}

void ComponentCache::energies(const Eigen::Ref<const Vector>& y, Eigen::Ref<Vector> out) const {
  for (std::size_t k = 0; k < components_.size(); ++k) {
    out[static_cast<Eigen::Index>(k)] = -log_weights_[k] - log_gaussian(k, y);
  }
}

double log_gaussian(const Vector& y, const Vector& mu, const Matrix& sigma) {
  if (y.size() != mu.size() || sigma.rows() != mu.size() || sigma.cols() != mu.size()) {
    throw InvalidParameter("dimension mismatch in log_gaussian");
  }
  const auto llt = factorize(sigma);
  const Matrix lower = llt.matrixL();
  Vector z = y - mu;
  lower.triangularView<Eigen::Lower>().solveInPlace(z);
  const double d = static_cast<double>(mu.size());
  return -0.5 * d * kLogTwoPi - 0.5 * log_det_from_lower(lower) - 0.5 * z.squaredNorm();
}

HamiltonianDiag hamiltonian_diag(const Vector& y, const GmmParams& params) {
  if (static_cast<std::size_t>(y.size()) != params.dim()) {
    throw InvalidParameter("observation dimension does not match parameters");
  }
  const ComponentCache cache(params);
  HamiltonianDiag out{Vector(static_cast<Eigen::Index>(params.components()))};
  cache.energies(y, out.h);
  return out;
}

Matrix hamiltonian_matrix(const Dataset& data, const GmmParams& params) {
  if (data.dim() != params.dim()) {
    throw InvalidParameter("dataset dimension does not match parameters");
  }
  const ComponentCache cache(params);
  const auto n = static_cast<Eigen::Index>(data.size());
  const auto k = static_cast<Eigen::Index>(params.components());
  Matrix h(n, k);
  Vector row(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    cache.energies(data.points.row(i).transpose(), row);
    h.row(i) = row.transpose();
  }
  return h;
}

double log_likelihood(const Dataset& data, const GmmParams& params) {
  const Matrix h = hamiltonian_matrix(data, params);
  double total = 0.0;
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    total += log_sum_exp((-h.row(i)).transpose());
  }
  return total;
}

}  // namespace dqaem
