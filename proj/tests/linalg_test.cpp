#include "dqaem/linalg.hpp"

#include <cmath>
#include <random>

#include "gtest/gtest.h"

#include "oracles.hpp"

namespace dqaem {
namespace {

double max_abs(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

void expect_decomp_valid(const Eigen::MatrixXd& a, const SpectralDecomp& s) {
  const Eigen::Index k = a.rows();
  const Eigen::MatrixXd& v = s.eigenvectors;
  EXPECT_LE(max_abs(v.transpose() * v - Eigen::MatrixXd::Identity(k, k)), 1e-10);
  const Eigen::MatrixXd rebuilt = v * s.eigenvalues.asDiagonal() * v.transpose();
  EXPECT_LE(max_abs(rebuilt - a), 1e-9 * (1.0 + max_abs(a)));
  for (Eigen::Index j = 1; j < k; ++j) EXPECT_LE(s.eigenvalues[j - 1], s.eigenvalues[j]);
}

TEST(SymEig, Diagonal) {
  Eigen::MatrixXd a = Eigen::Vector3d(3.0, 1.0, 2.0).asDiagonal();
  const auto s = sym_eig(a);
  EXPECT_DOUBLE_EQ(s.eigenvalues[0], 1.0);
  EXPECT_DOUBLE_EQ(s.eigenvalues[1], 2.0);
  EXPECT_DOUBLE_EQ(s.eigenvalues[2], 3.0);
  EXPECT_LE(max_abs(s.eigenvectors.cwiseAbs() -
                    (Eigen::MatrixXd(3, 3) << 0, 0, 1, 1, 0, 0, 0, 1, 0).finished()),
            1e-15);
}

TEST(SymEig, ExchangeMatrix) {
  Eigen::MatrixXd a(2, 2);
  a << 0.0, 1.0, 1.0, 0.0;
  const auto s = sym_eig(a);
  EXPECT_NEAR(s.eigenvalues[0], -1.0, 1e-15);
  EXPECT_NEAR(s.eigenvalues[1], 1.0, 1e-15);
  const double r = 1.0 / std::sqrt(2.0);
  // Sign convention: first nonzero entry of each column is nonnegative.
  EXPECT_NEAR(s.eigenvectors(0, 0), r, 1e-15);
  EXPECT_NEAR(s.eigenvectors(1, 0), -r, 1e-15);
  EXPECT_NEAR(s.eigenvectors(0, 1), r, 1e-15);
  EXPECT_NEAR(s.eigenvectors(1, 1), r, 1e-15);
}

TEST(SymEig, RandomReconstruction) {
  std::mt19937_64 gen(1);
  for (int trial = 0; trial < 1000; ++trial) {
    const Eigen::MatrixXd a = oracle::random_symmetric(gen, 3, -5.0, 5.0);
    expect_decomp_valid(a, sym_eig(a));
  }
}

TEST(SymEig, LargerDimensionsAndTrace) {
  std::mt19937_64 gen(2);
  for (Eigen::Index k : {1, 2, 5, 10, 64}) {
    const Eigen::MatrixXd a = oracle::random_symmetric(gen, k, -3.0, 3.0);
    const auto s = sym_eig(a);
    expect_decomp_valid(a, s);
    EXPECT_NEAR(s.eigenvalues.sum(), a.trace(), 1e-10 * (1.0 + max_abs(a)));
  }
}

TEST(SymEig, InvariantUnderOrthogonalSimilarity) {
  std::mt19937_64 gen(3);
  for (int trial = 0; trial < 200; ++trial) {
    const Eigen::MatrixXd a = oracle::random_symmetric(gen, 4, -5.0, 5.0);
    const Eigen::MatrixXd q = oracle::random_orthogonal(gen, 4);
    Eigen::MatrixXd b = q * a * q.transpose();
    b = 0.5 * (b + b.transpose());
    EXPECT_LE((sym_eig(a).eigenvalues - sym_eig(b).eigenvalues).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(SymEig, RepeatedEigenvalues) {
  const Eigen::MatrixXd a = Eigen::MatrixXd::Ones(3, 3);
  const auto s = sym_eig(a);
  expect_decomp_valid(a, s);
  EXPECT_NEAR(s.eigenvalues[0], 0.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues[1], 0.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues[2], 3.0, 1e-14);
}

TEST(SymEig, RejectsBadInput) {
  Eigen::MatrixXd asym(2, 2);
  asym << 0.0, 1.0, 1.0 + 1e-9, 0.0;
  EXPECT_THROW(sym_eig(asym), std::invalid_argument);
  EXPECT_THROW(sym_eig(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
  EXPECT_THROW(sym_eig(Eigen::MatrixXd::Identity(65, 65)), std::invalid_argument);
}

TEST(MatexpTaylor, ZeroIsIdentity) {
  EXPECT_EQ(matexp_taylor_oracle(Eigen::MatrixXd::Zero(3, 3)), Eigen::MatrixXd::Identity(3, 3));
}

TEST(MatexpTaylor, Diagonal) {
  Eigen::MatrixXd a(2, 2);
  a << 1.0, 0.0, 0.0, -1.0;
  const auto e = matexp_taylor_oracle(a);
  EXPECT_NEAR(e(0, 0), std::exp(1.0), 1e-12);
  EXPECT_NEAR(e(1, 1), std::exp(-1.0), 1e-12);
  EXPECT_EQ(e(0, 1), 0.0);
}

TEST(MatexpTaylor, AgreesWithSpectralRoute) {
  std::mt19937_64 gen(4);
  for (int trial = 0; trial < 300; ++trial) {
    const Eigen::MatrixXd a = oracle::random_symmetric(gen, 3, -10.0, 10.0);
    const Eigen::MatrixXd spectral = sym_eig(a).apply([](double l) { return std::exp(l); });
    const Eigen::MatrixXd taylor = matexp_taylor_oracle(a);
    EXPECT_LE(max_abs(spectral - taylor), 1e-8 * std::max(1.0, max_abs(spectral)));
    if (max_abs(a) <= 3.0) EXPECT_LE(max_abs(spectral - taylor), 1e-8);
  }
}

TEST(MatexpTaylor, AgreesWithIndependentSeries) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::MatrixXd a = oracle::random_symmetric(gen, 3, -2.0, 2.0);
    EXPECT_LE(max_abs(matexp_taylor_oracle(a) - oracle::taylor_exp(a)), 1e-10);
  }
}

TEST(LogSumExp, Basics) {
  EXPECT_EQ(log_sum_exp(Eigen::VectorXd::Zero(1)), 0.0);
  EXPECT_NEAR(log_sum_exp(Eigen::VectorXd::Constant(3, 2.5)), 2.5 + std::log(3.0), 1e-15);
  EXPECT_NEAR(log_sum_exp(Eigen::Vector2d(1000.0, 1000.5)), 1000.5 + std::log1p(std::exp(-0.5)), 1e-12);
  EXPECT_NEAR(log_sum_exp(Eigen::Vector2d(-1000.0, -1000.5)), -1000.0 + std::log1p(std::exp(-0.5)), 1e-12);
  EXPECT_THROW(log_sum_exp(Eigen::VectorXd(0)), std::invalid_argument);
}

}  // namespace
}  // namespace dqaem
