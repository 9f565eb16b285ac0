#include "dqaem/posteriors.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dqaem {

namespace {

void check_gamma(double gamma) {
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) {
    throw InvalidParameter("gamma must be finite and >= 0");
  }
}

void check_coupling(const CouplingMatrix& coupling, Eigen::Index k) {
  if (static_cast<Eigen::Index>(coupling.size()) != k) {
    throw InvalidParameter("coupling matrix size does not match component count");
  }
}

// Row-wise softmax of -scale*h, shifted by the row maximum.
void softmax_rows(const Matrix& energies, double scale, Matrix& out, Vector* log_norms) {
  const Eigen::Index n = energies.rows();
  const Eigen::Index k = energies.cols();
  out.resize(n, k);
  Vector row(k);
  for (Eigen::Index i = 0; i < n; ++i) {
    row = -scale * energies.row(i).transpose();
    const double lse = log_sum_exp(row);
    for (Eigen::Index c = 0; c < k; ++c) out(i, c) = std::exp(row[c] - lse);
    if (log_norms) (*log_norms)[i] = lse;
  }
}

}  // namespace

ResponsibilityStats responsibility_stats(const Responsibilities& resp) {
  ResponsibilityStats s;
  for (Eigen::Index i = 0; i < resp.r.rows(); ++i) {
    s.max_row_sum_error = std::max(s.max_row_sum_error, std::abs(resp.r.row(i).sum() - 1.0));
    s.min_entry = std::min(s.min_entry, resp.r.row(i).minCoeff());
  }
  return s;
}

CouplingMatrix::CouplingMatrix(Matrix m) : m_(std::move(m)) {
  if (m_.rows() != m_.cols() || m_.rows() < 1) throw InvalidParameter("coupling must be square");
  if (!m_.allFinite()) throw InvalidParameter("coupling has non-finite entries");
  if (m_ != m_.transpose()) throw InvalidParameter("coupling must be symmetric");
  if ((m_.diagonal().array() != 0.0).any()) throw InvalidParameter("coupling diagonal must be zero");
  if (m_.rows() > 1 && m_.cwiseAbs().maxCoeff() == 0.0) {
    throw InvalidParameter("coupling must not commute with the component projectors");
  }
}

CouplingMatrix CouplingMatrix::all_ones(std::size_t k) {
  const auto n = static_cast<Eigen::Index>(k);
  Matrix m = Matrix::Ones(n, n);
  m.diagonal().setZero();
  return CouplingMatrix(std::move(m));
}

Vector GibbsState::diagonal() const {
  const Matrix& v = spectrum.eigenvectors;
  const Eigen::Index k = v.rows();
  Vector w(k);
  for (Eigen::Index j = 0; j < k; ++j) w[j] = std::exp(-spectrum.eigenvalues[j] - log_partition);
  Vector d(k);
  for (Eigen::Index r = 0; r < k; ++r) {
    double s = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) s += w[j] * v(r, j) * v(r, j);
    d[r] = s;
  }
  return d;
}

Matrix GibbsState::density() const {
  const double lz = log_partition;
  return spectrum.apply([lz](double lambda) { return std::exp(-lambda - lz); });
}

Matrix GibbsState::log_density() const {
  const double lz = log_partition;
  return spectrum.apply([lz](double lambda) { return -lambda - lz; });
}

GibbsState quantum_gibbs(const Eigen::Ref<const Vector>& h, double gamma,
                         const CouplingMatrix& coupling) {
  check_gamma(gamma);
  check_coupling(coupling, h.size());
  Matrix a = gamma * coupling.matrix();
  a.diagonal() += h;
  GibbsState g{sym_eig(a), 0.0};
  g.log_partition = log_sum_exp(-g.spectrum.eigenvalues);
  return g;
}

Responsibilities classical_posterior(const Matrix& energies) {
  Responsibilities out;
  softmax_rows(energies, 1.0, out.r, nullptr);
  return out;
}

TemperedEStepResult tempered_estep(const Matrix& energies, double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidParameter("beta must be finite and > 0");
  TemperedEStepResult out;
  Vector log_norms(energies.rows());
  softmax_rows(energies, beta, out.responsibilities.r, &log_norms);
  double total = 0.0;
  for (Eigen::Index i = 0; i < log_norms.size(); ++i) total += log_norms[i];
  out.negative_free_energy = total / beta;
  return out;
}

QuantumEStepResult quantum_estep(const Matrix& energies, double gamma, const CouplingMatrix& coupling) {
  check_gamma(gamma);
  check_coupling(coupling, energies.cols());
  const Eigen::Index n = energies.rows();
  QuantumEStepResult out;
  out.log_partition.resize(n);

  if (gamma == 0.0) {
    // exp(-diag(h)) is already diagonal: the Gibbs operator is the classical posterior.
    softmax_rows(energies, 1.0, out.responsibilities.r, &out.log_partition);
  } else {
    out.responsibilities.r.resize(n, energies.cols());
    for (Eigen::Index i = 0; i < n; ++i) {
      const GibbsState g = quantum_gibbs(energies.row(i).transpose(), gamma, coupling);
      out.responsibilities.r.row(i) = g.diagonal().transpose();
      out.log_partition[i] = g.log_partition;
    }
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) total += out.log_partition[i];
  out.free_energy = -total;
  return out;
}

Responsibilities classical_posterior(const Dataset& data, const GmmParams& params) {
  return classical_posterior(hamiltonian_matrix(data, params));
}

Responsibilities tempered_posterior(const Dataset& data, const GmmParams& params, double beta) {
  return tempered_estep(hamiltonian_matrix(data, params), beta).responsibilities;
}

QuantumEStepResult quantum_estep(const Dataset& data, const GmmParams& params, double gamma,
                                 const CouplingMatrix& coupling) {
  return quantum_estep(hamiltonian_matrix(data, params), gamma, coupling);
}

double q_function(const Dataset& data, const Responsibilities& resp, const GmmParams& params) {
  const Matrix h = hamiltonian_matrix(data, params);
  if (resp.r.rows() != h.rows() || resp.r.cols() != h.cols()) {
    throw InvalidParameter("responsibilities shape does not match data and parameters");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < h.rows(); ++i) {
    for (Eigen::Index k = 0; k < h.cols(); ++k) total -= resp.r(i, k) * h(i, k);
  }
  return total;
}

double u_function(const Dataset& data, const GmmParams& params_new, const GmmParams& params_old,
                  double gamma, const CouplingMatrix& coupling) {
  check_gamma(gamma);
  const Matrix h_new = hamiltonian_matrix(data, params_new);
  const Matrix h_old = hamiltonian_matrix(data, params_old);
  check_coupling(coupling, h_new.cols());
  double total = 0.0;
  for (Eigen::Index i = 0; i < h_new.rows(); ++i) {
    const Matrix p_old = quantum_gibbs(h_old.row(i).transpose(), gamma, coupling).density();
    Matrix a_new = gamma * coupling.matrix();
    a_new.diagonal() += h_new.row(i).transpose();
    total -= (p_old * a_new).trace();
  }
  return total;
}

double entropy_term(const Dataset& data, const GmmParams& params_a, const GmmParams& params_b,
                    double gamma, const CouplingMatrix& coupling) {
  check_gamma(gamma);
  const Matrix h_a = hamiltonian_matrix(data, params_a);
  const Matrix h_b = hamiltonian_matrix(data, params_b);
  double total = 0.0;
  for (Eigen::Index i = 0; i < h_a.rows(); ++i) {
    const Matrix log_p_a = quantum_gibbs(h_a.row(i).transpose(), gamma, coupling).log_density();
    const Matrix p_b = quantum_gibbs(h_b.row(i).transpose(), gamma, coupling).density();
    total += (p_b * log_p_a).trace();
  }
  return total;
}

}  // namespace dqaem
