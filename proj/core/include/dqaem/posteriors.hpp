#pragma once

// E-step kernels: classical (EM), tempered (DSAEM) and quantum (DQAEM), plus
// the objective functions used to reason about them.

#include <cstddef>

#include "dqaem/linalg.hpp"
#include "dqaem/model.hpp"

namespace dqaem {

/// N x K row-stochastic matrix of posterior component weights.
struct Responsibilities {
  Matrix r;

  std::size_t points() const { return static_cast<std::size_t>(r.rows()); }
  std::size_t components() const { return static_cast<std::size_t>(r.cols()); }
};

/// Worst row-sum error and smallest entry, for validity checks.
struct ResponsibilityStats {
  double max_row_sum_error = 0.0;
  double min_entry = 1.0;
};
ResponsibilityStats responsibility_stats(const Responsibilities& resp);

/// Symmetric K x K off-diagonal coupling sigma'. Scaled by Gamma it forms the
/// quantum fluctuation term added to the diagonal Hamiltonian.
class CouplingMatrix {
 public:
  /// Throws InvalidParameter unless `m` is symmetric with an exactly zero
  /// diagonal and, for K > 1, at least one nonzero off-diagonal entry.
  explicit CouplingMatrix(Matrix m);

  /// Every off-diagonal entry 1.
  static CouplingMatrix all_ones(std::size_t k);

  const Matrix& matrix() const { return m_; }
  std::size_t size() const { return static_cast<std::size_t>(m_.rows()); }

 private:
  Matrix m_;
};

/// Normalized Gibbs operator exp(-A)/Z for A = diag(h) + Gamma*sigma'.
struct GibbsState {
  SpectralDecomp spectrum;  // of A
  double log_partition = 0.0;

  /// Diagonal of exp(-A)/Z.
  Vector diagonal() const;
  /// Full density matrix exp(-A)/Z.
  Matrix density() const;
  /// log(exp(-A)/Z) = -A - log Z * I, assembled from the spectrum.
  Matrix log_density() const;
};

GibbsState quantum_gibbs(const Eigen::Ref<const Vector>& h, double gamma,
                         const CouplingMatrix& coupling);

struct QuantumEStepResult {
  Responsibilities responsibilities;
  Vector log_partition;  // log Z_Gamma^(i)
  double free_energy = 0.0;
};

/// Tempered kernel output; `negative_free_energy` is (1/beta) sum_i log sum_k exp(-beta h_k).
struct TemperedEStepResult {
  Responsibilities responsibilities;
  double negative_free_energy = 0.0;
};

// Kernels over a precomputed N x K energy matrix (see hamiltonian_matrix).
Responsibilities classical_posterior(const Matrix& energies);
TemperedEStepResult tempered_estep(const Matrix& energies, double beta);
QuantumEStepResult quantum_estep(const Matrix& energies, double gamma, const CouplingMatrix& coupling);

Responsibilities classical_posterior(const Dataset& data, const GmmParams& params);
Responsibilities tempered_posterior(const Dataset& data, const GmmParams& params, double beta);
QuantumEStepResult quantum_estep(const Dataset& data, const GmmParams& params, double gamma,
                                 const CouplingMatrix& coupling);

/// Expected complete-data log-likelihood sum_i sum_k r_ik * (-h_k^(i)).
double q_function(const Dataset& data, const Responsibilities& resp, const GmmParams& params);

/// sum_i Tr[P_Gamma^(i)(params_old) * log p_Gamma^(i)(params_new)].
double u_function(const Dataset& data, const GmmParams& params_new, const GmmParams& params_old,
                  double gamma, const CouplingMatrix& coupling);

/// sum_i Tr[P_Gamma^(i)(params_b) * log P_Gamma^(i)(params_a)]; a diagnostic for
/// the free-energy descent property.
double entropy_term(const Dataset& data, const GmmParams& params_a, const GmmParams& params_b,
                    double gamma, const CouplingMatrix& coupling);

}  // namespace dqaem
