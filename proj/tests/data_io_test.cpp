#include "dqaem/data_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>

#include "gtest/gtest.h"

#include "dqaem/random.hpp"
#include "oracles.hpp"

namespace dqaem {
namespace {

namespace fs = std::filesystem;

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("dqaem_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  fs::path path(const std::string& name) const { return dir_ / name; }

  fs::path dir_;
};

TEST(SampleGmm, DegenerateCovarianceLandsOnMean) {
  const Vector mu = (Vector(2) << 1.5, -2.0).finished();
  GeneratorSpec spec{GmmParams(Vector::Ones(1), {mu}, {1e-12 * Matrix::Identity(2, 2)}), 1, 3};
  const Dataset d = sample_gmm(spec);
  EXPECT_LE((d.point(0) - mu).cwiseAbs().maxCoeff(), 1e-5);
}

TEST(SampleGmm, PresetClusterMeans) {
  const Dataset d = sample_gmm(paper_generator_spec(42));
  ASSERT_EQ(d.size(), 600u);
  ASSERT_TRUE(d.true_labels && d.true_params);
  std::vector<Vector> sums(3, Vector::Zero(2));
  std::vector<double> counts(3, 0.0);
  for (std::size_t i = 0; i < d.size(); ++i) {
    const int c = (*d.true_labels)[i];
    sums[static_cast<std::size_t>(c)] += d.point(i);
    counts[static_cast<std::size_t>(c)] += 1.0;
  }
  for (std::size_t c = 0; c < 3; ++c) {
    EXPECT_LE((sums[c] / counts[c] - d.true_params->mean(c)).norm(), 0.25);
  }
}

TEST(SampleGmm, LabelFrequenciesTrackWeights) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const Dataset d = sample_gmm(paper_generator_spec(seed, 600));
    std::vector<double> freq(3, 0.0);
    for (int l : *d.true_labels) freq[static_cast<std::size_t>(l)] += 1.0 / 600.0;
    const double bound = 3.0 * std::sqrt((1.0 / 3.0) * (2.0 / 3.0) / 600.0);
    for (double f : freq) EXPECT_LE(std::abs(f - 1.0 / 3.0), bound);
  }
}

TEST(SampleGmm, DeterministicAndSampleCovariance) {
  Matrix cov(2, 2);
  cov << 2.0, 0.8, 0.8, 1.0;
  GeneratorSpec spec{GmmParams(Vector::Ones(1), {Vector::Zero(2)}, {cov}), 20000, 9};
  const Dataset a = sample_gmm(spec);
  const Dataset b = sample_gmm(spec);
  EXPECT_EQ(a.points, b.points);
  const Vector mean = a.points.colwise().mean().transpose();
  const Matrix c = (a.points.rowwise() - mean.transpose()).transpose() * (a.points.rowwise() - mean.transpose()) /
                   static_cast<double>(a.size());
  EXPECT_LE((c - cov).cwiseAbs().maxCoeff(), 0.08);
}

TEST(Rng, UniformRangeAndNormalMoments) {
  Rng rng(1);
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    const double z = rng.normal();
    sum += z;
    sq += z * z;
  }
  EXPECT_NEAR(sum / 100000.0, 0.0, 0.02);
  EXPECT_NEAR(sq / 100000.0, 1.0, 0.02);
  EXPECT_NE(mix_seed(7, 0), mix_seed(7, 1));
  EXPECT_EQ(mix_seed(7, 3), mix_seed(7, 3));
}

TEST_F(TempDir, CsvRoundTripIsLossless) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  Matrix y(50, 3);
  for (Eigen::Index i = 0; i < y.rows(); ++i) {
    for (Eigen::Index j = 0; j < 3; ++j) y(i, j) = u(gen) * std::pow(10.0, static_cast<double>(i % 7) - 9.0);
  }
  y(0, 0) = std::numeric_limits<double>::denorm_min();
  y(1, 1) = -0.0;
  y(2, 2) = std::numeric_limits<double>::max();
  write_csv(Dataset(y), path("plain.csv"));
  const Dataset back = read_csv(path("plain.csv"));
  EXPECT_EQ(back.points, y);
  EXPECT_FALSE(back.true_labels.has_value());

  const Dataset labelled = sample_gmm(paper_generator_spec(3, 40));
  write_csv(labelled, path("labels.csv"));
  const Dataset back2 = read_csv(path("labels.csv"));
  EXPECT_EQ(back2.points, labelled.points);
  EXPECT_EQ(*back2.true_labels, *labelled.true_labels);
}

TEST_F(TempDir, CsvHeaderFormat) {
  write_csv(sample_gmm(paper_generator_spec(1, 3)), path("h.csv"));
  const std::string text = read_text_file(path("h.csv"));
  EXPECT_EQ(text.substr(0, text.find('\n')), "x1,x2,label");
  EXPECT_EQ(text.find('\r'), std::string::npos);
}

TEST_F(TempDir, CsvErrorNamesLine) {
  std::ofstream(path("bad.csv")) << "x1,x2\n1,2\n3,4\n5,6\n7,8\n9,10\nabc,1\n";
  try {
    read_csv(path("bad.csv"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 7u);
    EXPECT_NE(std::string(e.what()).find(":7:"), std::string::npos);
  }
  std::ofstream(path("short.csv")) << "x1,x2\n1\n";
  EXPECT_THROW(read_csv(path("short.csv")), ParseError);
  std::ofstream(path("hdr.csv")) << "a,b\n1,2\n";
  EXPECT_THROW(read_csv(path("hdr.csv")), ParseError);
  EXPECT_THROW(read_csv(path("missing.csv")), IoError);
}

FitResult small_fit(Algorithm a, std::size_t max_iters = 500) {
  const Dataset data = sample_gmm(paper_generator_spec(2, 150));
  FitConfig c = default_config(a);
  c.max_iters = max_iters;
  return fit(data, c, random_init(data, 3, 4));
}

TEST_F(TempDir, EmResultDocument) {
  const FitResult r = small_fit(Algorithm::kEm);
  FitConfig c = default_config(Algorithm::kEm);
  write_result_json(r, c, path("em.json"));
  const auto j = nlohmann::json::parse(read_text_file(path("em.json")));
  EXPECT_EQ(j.at("schema_version"), "1");
  EXPECT_EQ(j.at("algorithm"), "EM");
  EXPECT_EQ(j.at("rng"), "mt19937_64");
  for (const char* key : {"seed", "config", "trace", "final_params", "events"}) EXPECT_TRUE(j.contains(key)) << key;
  const auto& trace = j.at("trace");
  for (std::size_t t = 1; t < trace.size(); ++t) {
    EXPECT_GE(trace[t].at("log_likelihood").get<double>(), trace[t - 1].at("log_likelihood").get<double>() - 1e-9);
  }
}

TEST_F(TempDir, DqaemResultRoundTrip) {
  const FitResult r = small_fit(Algorithm::kDqaem);
  write_result_json(r, default_config(Algorithm::kDqaem), path("dq.json"));
  const auto j = nlohmann::json::parse(read_text_file(path("dq.json")));
  EXPECT_EQ(j.at("trace").front().at("gamma"), 1.0);
  EXPECT_EQ(j.at("trace").back().at("gamma"), 0.0);
  const FitDocument doc = read_result_json(path("dq.json"));
  EXPECT_TRUE(doc.final_params == r.final_params);
  EXPECT_EQ(doc.algorithm, Algorithm::kDqaem);
  EXPECT_EQ(doc.trace.size(), r.trace.size());
}

TEST_F(TempDir, ScheduleAndParamsJsonRoundTrip) {
  const Schedule s = beta_schedule(0.7, 0.9, 1e-4);
  const Schedule back = schedule_from_json(schedule_to_json(s));
  EXPECT_EQ(back.init, s.init);
  EXPECT_EQ(back.rate, s.rate);
  EXPECT_EQ(back.cutoff, s.cutoff);
  const GmmParams p = paper_true_params();
  EXPECT_TRUE(params_from_json(params_to_json(p)) == p);
}

TEST_F(TempDir, IoErrorsCarryPath) {
  const fs::path bad = path("no_such_dir") / "x.json";
  try {
    write_text_file(bad, "{}");
    FAIL() << "expected IoError";
  } catch (const IoError& e) {
    EXPECT_NE(std::string(e.what()).find("no_such_dir"), std::string::npos);
  }
}

}  // namespace
}  // namespace dqaem
