#pragma once

// Gaussian mixture model domain types and density evaluation.

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace dqaem {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Ridge added to every covariance after an M step.
inline constexpr double kCovarianceEpsilon = 1e-6;
/// Lower clamp on mixture weights before renormalization.
inline constexpr double kWeightFloor = 1e-10;

class InvalidParameter : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Mixture parameters {pi_k, mu_k, Sigma_k} for K components in D dimensions.
///
/// Construction validates the simplex and SPD invariants; use `regularized`
/// to build a parameter set from raw M-step moments.
class GmmParams {
 public:
  GmmParams(Vector weights, std::vector<Vector> means, std::vector<Matrix> covariances);

  /// Floors and renormalizes the weights, symmetrizes each covariance and adds
  /// `ridge`*I before validating.
  static GmmParams regularized(Vector weights, std::vector<Vector> means,
                               std::vector<Matrix> covariances,
                               double ridge = kCovarianceEpsilon);

  std::size_t components() const { return means_.size(); }
  std::size_t dim() const { return static_cast<std::size_t>(means_.front().size()); }

  const Vector& weights() const { return weights_; }
  const std::vector<Vector>& means() const { return means_; }
  const std::vector<Matrix>& covariances() const { return covariances_; }
  const Vector& mean(std::size_t k) const { return means_[k]; }
  const Matrix& covariance(std::size_t k) const { return covariances_[k]; }

  /// Component order given by `perm`: result component k is this component perm[k].
  GmmParams permuted(const std::vector<std::size_t>& perm) const;

  bool operator==(const GmmParams& other) const;

 private:
  Vector weights_;
  std::vector<Vector> means_;
  std::vector<Matrix> covariances_;
};

/// N x D observations plus optional generator ground truth.
struct Dataset {
  Matrix points;
  std::optional<std::vector<int>> true_labels;
  std::optional<GmmParams> true_params;

  explicit Dataset(Matrix pts, std::optional<std::vector<int>> labels = std::nullopt,
                   std::optional<GmmParams> truth = std::nullopt);

  std::size_t size() const { return static_cast<std::size_t>(points.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(points.cols()); }
  Vector point(std::size_t i) const { return points.row(static_cast<Eigen::Index>(i)).transpose(); }
};

/// Per-point energies h_k = -log(pi_k g(y; mu_k, Sigma_k)), in nats.
struct HamiltonianDiag {
  Vector h;
};

/// Cholesky factors of every component covariance, computed once per parameter set.
///
/// Density evaluations inside E steps go through this cache so that each
/// covariance is factorized once per iteration rather than once per point.
class ComponentCache {
 public:
  explicit ComponentCache(const GmmParams& params);

  std::size_t components() const { return log_weights_.size(); }
  double log_gaussian(std::size_t k, const Eigen::Ref<const Vector>& y) const;
  /// Energies of one observation against every component.
  void energies(const Eigen::Ref<const Vector>& y, Eigen::Ref<Vector> out) const;

 private:
  struct Component {
    Matrix lower;  // Sigma = L L^T
    Vector mean;
    double log_norm = 0.0;  // -(D/2)log(2pi) - (1/2)log det Sigma
  };
  std::vector<Component> components_;
  std::vector<double> log_weights_;
};

double log_gaussian(const Vector& y, const Vector& mu, const Matrix& sigma);

HamiltonianDiag hamiltonian_diag(const Vector& y, const GmmParams& params);

/// N x K matrix of energies, row i holding h^(i).
Matrix hamiltonian_matrix(const Dataset& data, const GmmParams& params);

double log_likelihood(const Dataset& data, const GmmParams& params);

}  // namespace dqaem
