#include "dqaem/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace dqaem {

namespace {

constexpr double kSymmetryTolerance = 1e-12;
constexpr double kOffDiagonalRelTol = 1e-14;

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double s = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) s += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(s);
}

// Zeroes a(p,q) with the rotation from Golub & Van Loan, Algorithm 8.4.1.
void rotate(Eigen::MatrixXd& a, Eigen::MatrixXd& v, Eigen::Index p, Eigen::Index q) {
  const double apq = a(p, q);
  if (apq == 0.0) return;
  const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
  const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;

  const Eigen::Index n = a.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double akp = a(k, p);
    const double akq = a(k, q);
    a(k, p) = c * akp - s * akq;
    a(k, q) = s * akp + c * akq;
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double apk = a(p, k);
    const double aqk = a(q, k);
    a(p, k) = c * apk - s * aqk;
    a(q, k) = s * apk + c * aqk;
  }
  a(p, q) = 0.0;
  a(q, p) = 0.0;
  for (Eigen::Index k = 0; k < n; ++k) {
    const double vkp = v(k, p);
    const double vkq = v(k, q);
    v(k, p) = c * vkp - s * vkq;
    v(k, q) = s * vkp + c * vkq;
  }
}

}  // namespace

SpectralDecomp sym_eig(const Eigen::Ref<const Eigen::MatrixXd>& input) {
  if (input.rows() != input.cols() || input.rows() < 1) {
    throw std::invalid_argument("sym_eig: matrix must be square and non-empty");
  }
  if (static_cast<std::size_t>(input.rows()) > kMaxSymEigDim) {
    throw std::invalid_argument("sym_eig: dimension exceeds supported maximum");
  }
  if (!input.allFinite()) throw std::invalid_argument("sym_eig: non-finite entry");
  if ((input - input.transpose()).cwiseAbs().maxCoeff() > kSymmetryTolerance) {
    throw std::invalid_argument("sym_eig: matrix is not symmetric");
  }

  const Eigen::Index n = input.rows();
  Eigen::MatrixXd a = 0.5 * (input + input.transpose());
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double threshold = kOffDiagonalRelTol * a.norm();

  for (int sweep = 0; sweep < kJacobiMaxSweeps; ++sweep) {
    if (off_diagonal_norm(a) <= threshold) break;
    for (Eigen::Index p = 0; p + 1 < n; ++p) {
      for (Eigen::Index q = p + 1; q < n; ++q) rotate(a, v, p, q);
    }
  }

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return a(x, x) < a(y, y); });

  SpectralDecomp out{Eigen::VectorXd(n), Eigen::MatrixXd(n, n)};
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index src = order[static_cast<std::size_t>(j)];
    out.eigenvalues[j] = a(src, src);
    Eigen::VectorXd col = v.col(src);
    col.normalize();
    for (Eigen::Index k = 0; k < n; ++k) {
      if (col[k] != 0.0) {
        if (col[k] < 0.0) col = -col;
        break;
      }
    }
    out.eigenvectors.col(j) = col;
  }
  return out;
}

Eigen::MatrixXd matexp_taylor_oracle(const Eigen::Ref<const Eigen::MatrixXd>& a, int terms) {
  if (a.rows() != a.cols()) throw std::invalid_argument("matexp: matrix must be square");
  if (terms < 1) throw std::invalid_argument("matexp: terms must be >= 1");

  const Eigen::Index n = a.rows();
  const double norm = a.cwiseAbs().rowwise().sum().maxCoeff();  // infinity norm
  int squarings = 0;
  double scale = 1.0;
  while (norm * scale > 0.5) {
    scale *= 0.5;
    ++squarings;
  }
  const Eigen::MatrixXd scaled = a * scale;

  Eigen::MatrixXd sum = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd term = Eigen::MatrixXd::Identity(n, n);
  for (int j = 1; j < terms; ++j) {
    term = term * scaled / static_cast<double>(j);
    sum += term;
  }
  for (int s = 0; s < squarings; ++s) sum = sum * sum;
  return sum;
}

double log_sum_exp(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if (v.size() == 0) throw std::invalid_argument("log_sum_exp: empty vector");
  const double m = v.maxCoeff();
  if (v.size() == 1) return m;
  double s = 0.0;
  for (Eigen::Index j = 0; j < v.size(); ++j) s += std::exp(v[j] - m);
  return m + std::log(s);
}

}  // namespace dqaem
