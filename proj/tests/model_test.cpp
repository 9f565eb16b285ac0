#include "dqaem/model.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "gtest/gtest.h"

#include "dqaem/data_io.hpp"
#include "dqaem/posteriors.hpp"
#include "oracles.hpp"

namespace dqaem {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

GmmParams standard_normal_1d() {
  return GmmParams(vec({1.0}), {vec({0.0})}, {Matrix::Identity(1, 1)});
}

TEST(LogGaussian, StandardNormalAtMode) {
  EXPECT_DOUBLE_EQ(log_gaussian(vec({0.0}), vec({0.0}), Matrix::Identity(1, 1)), -0.9189385332046727);
}

TEST(LogGaussian, AtMeanIsNormalizer) {
  for (int d = 1; d <= 5; ++d) {
    Vector mu = Vector::LinSpaced(d, -1.0, 2.0);
    const double expected = -0.5 * d * std::log(2.0 * std::numbers::pi);
    EXPECT_NEAR(log_gaussian(mu, mu, Matrix::Identity(d, d)), expected, 1e-14);
  }
}

TEST(LogGaussian, DiagonalCovarianceMatchesCofactorOracle) {
  Matrix sigma(2, 2);
  sigma << 4.0, 0.0, 0.0, 1.0;
  const double got = log_gaussian(vec({1.0, 0.0}), vec({0.0, 0.0}), sigma);
  EXPECT_NEAR(got, std::log(oracle::density(vec({1.0, 0.0}), vec({0.0, 0.0}), sigma)), 1e-14);
  // Frozen from an independent reference implementation.
  EXPECT_NEAR(got, -2.6560242469692907, 1e-14);
}

TEST(LogGaussian, RandomSpdMatchesCofactorOracle) {
  std::mt19937_64 gen(11);
  for (int trial = 0; trial < 50; ++trial) {
    const Matrix sigma = oracle::random_spd(gen, 3);
    const Vector y = Vector::Random(3);
    const Vector mu = Vector::Random(3);
    EXPECT_NEAR(log_gaussian(y, mu, sigma), std::log(oracle::density(y, mu, sigma)), 1e-11);
  }
}

TEST(LogGaussian, RejectsNonSpd) {
  Matrix sigma(2, 2);
  sigma << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(log_gaussian(vec({0.0, 0.0}), vec({0.0, 0.0}), sigma), InvalidParameter);
}

TEST(GmmParams, ValidatesInvariants) {
  EXPECT_THROW(GmmParams(vec({0.5, 0.6}), {vec({0.0}), vec({1.0})},
                         {Matrix::Identity(1, 1), Matrix::Identity(1, 1)}),
               InvalidParameter);
  EXPECT_THROW(GmmParams(vec({1.0, 0.0}), {vec({0.0}), vec({1.0})},
                         {Matrix::Identity(1, 1), Matrix::Identity(1, 1)}),
               InvalidParameter);
  Matrix asym(2, 2);
  asym << 1.0, 0.1, 0.0, 1.0;
  EXPECT_THROW(GmmParams(vec({1.0}), {vec({0.0, 0.0})}, {asym}), InvalidParameter);
  EXPECT_THROW(GmmParams(vec({1.0}), {vec({0.0, 0.0})}, {Matrix::Identity(3, 3)}), InvalidParameter);
}

TEST(GmmParams, RegularizedFloorsWeightsAndAddsRidge) {
  const auto p = GmmParams::regularized(vec({1.0, 0.0}), {vec({0.0}), vec({1.0})},
                                        {Matrix::Zero(1, 1), Matrix::Identity(1, 1)});
  EXPECT_GT(p.weights()[1], 0.0);
  EXPECT_NEAR(p.weights().sum(), 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(p.covariance(0)(0, 0), kCovarianceEpsilon);
}

TEST(HamiltonianDiag, SingleStandardNormal) {
  const auto h = hamiltonian_diag(vec({0.0}), standard_normal_1d());
  ASSERT_EQ(h.h.size(), 1);
  EXPECT_DOUBLE_EQ(h.h[0], 0.9189385332046727);
}

TEST(HamiltonianDiag, EquidistantPointHasEqualEnergies) {
  const GmmParams p(vec({0.5, 0.5}), {vec({-1.0, 0.0}), vec({1.0, 0.0})},
                    {Matrix::Identity(2, 2), Matrix::Identity(2, 2)});
  const auto h = hamiltonian_diag(vec({0.0, 3.0}), p);
  EXPECT_DOUBLE_EQ(h.h[0], h.h[1]);
}

TEST(HamiltonianDiag, PresetModelAtOriginMatchesDirectDensity) {
  const GmmParams p = paper_true_params();
  const auto h = hamiltonian_diag(vec({0.0, 0.0}), p);
  const Vector joint = oracle::joint(vec({0.0, 0.0}), p);
  for (Eigen::Index k = 0; k < 3; ++k) EXPECT_NEAR(h.h[k], -std::log(joint[k]), 1e-13);
  EXPECT_NEAR(h.h[0], 7.436489355077455, 1e-13);
  EXPECT_NEAR(h.h[1], 2.9364893550774553, 1e-13);
  EXPECT_NEAR(h.h[2], 7.436489355077455, 1e-13);
}

TEST(HamiltonianDiag, ExponentiatesToJointDensity) {
  std::mt19937_64 gen(5);
  for (int trial = 0; trial < 30; ++trial) {
    const auto p = oracle::random_params(gen, 3, 2, 2.0);
    const Vector y = Vector::Random(2);
    const auto h = hamiltonian_diag(y, p);
    const Vector joint = oracle::joint(y, p);
    for (Eigen::Index k = 0; k < 3; ++k) {
      EXPECT_NEAR(std::exp(-h.h[k]) / joint[k], 1.0, 1e-12);
    }
  }
}

TEST(LogLikelihood, SinglePointStandardNormal) {
  const Dataset data(Matrix::Zero(1, 1));
  EXPECT_DOUBLE_EQ(log_likelihood(data, standard_normal_1d()), -0.9189385332046727);
}

TEST(LogLikelihood, IdenticalComponentsCollapse) {
  std::mt19937_64 gen(3);
  const Dataset data = oracle::random_dataset(gen, 25, 2);
  Matrix sigma(2, 2);
  sigma << 2.0, 0.3, 0.3, 1.0;
  const Vector mu = vec({0.5, -0.5});
  const GmmParams one(vec({1.0}), {mu}, {sigma});
  const GmmParams two(vec({0.5, 0.5}), {mu, mu}, {sigma, sigma});
  EXPECT_NEAR(log_likelihood(data, two), log_likelihood(data, one), 1e-10);
}

TEST(LogLikelihood, MatchesNaiveSummation) {
  std::mt19937_64 gen(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Dataset data = oracle::random_dataset(gen, 10, 2, 3.0);
    const auto p = oracle::random_params(gen, 3, 2, 2.0);
    EXPECT_NEAR(log_likelihood(data, p), oracle::naive_log_likelihood(data, p), 1e-10);
  }
}

TEST(LogLikelihood, InvariantUnderComponentPermutation) {
  std::mt19937_64 gen(23);
  const Dataset data = oracle::random_dataset(gen, 40, 2);
  const auto p = oracle::random_params(gen, 3, 2);
  const double base = log_likelihood(data, p);
  std::vector<std::size_t> perm{2, 0, 1};
  EXPECT_NEAR(log_likelihood(data, p.permuted(perm)), base, 1e-12 * std::abs(base));
}

TEST(LogLikelihood, FarPointsDoNotUnderflow) {
  const Dataset data(Matrix::Constant(1, 1, 200.0));
  const double ll = log_likelihood(data, standard_normal_1d());
  EXPECT_TRUE(std::isfinite(ll));
  EXPECT_NEAR(ll, -0.9189385332046727 - 0.5 * 200.0 * 200.0, 1e-9);
}

TEST(Dataset, RejectsEmptyAndNonFinite) {
  EXPECT_THROW(Dataset(Matrix(0, 2)), InvalidParameter);
  Matrix bad = Matrix::Zero(2, 2);
  bad(1, 1) = std::nan("");
  EXPECT_THROW(Dataset{bad}, InvalidParameter);
  EXPECT_THROW(Dataset(Matrix::Zero(2, 2), std::vector<int>{0}), InvalidParameter);
}

}  // namespace
}  // namespace dqaem
