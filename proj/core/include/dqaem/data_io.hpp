#pragma once

// Synthetic data generation, CSV exchange and JSON persistence.

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "dqaem/estimators.hpp"
#include "dqaem/model.hpp"

namespace dqaem {

inline constexpr std::string_view kSchemaVersion = "1";

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what), line_(line) {}
  /// 1-based line number of the offending row, 0 when not line-specific.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct GeneratorSpec {
  GmmParams true_params;
  std::size_t n_points = 600;
  std::uint64_t seed = 0;
};

/// Three unit-covariance, equally weighted components at (-3,0), (0,0), (3,0).
GmmParams paper_true_params();
GeneratorSpec paper_generator_spec(std::uint64_t seed, std::size_t n_points = 600);

/// Component index from the weights, then mu + L z with Sigma = L L^T.
Dataset sample_gmm(const GeneratorSpec& spec);

/// Header x1..xD[,label]; values printed with 17 significant digits.
void write_csv(const Dataset& data, const std::filesystem::path& path);
/// Throws ParseError naming the line for malformed rows, IoError when the file cannot be read.
Dataset read_csv(const std::filesystem::path& path);

/// Writes `text` to `path`, wrapping failures in IoError with the path.
void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

nlohmann::json params_to_json(const GmmParams& params);
GmmParams params_from_json(const nlohmann::json& j);

nlohmann::json schedule_to_json(const Schedule& s);
Schedule schedule_from_json(const nlohmann::json& j);

/// Self-describing fit document: schema_version, algorithm, seed, rng,
/// config, trace[], final_params, events[], converged, iterations_used.
/// Trace rows carry "gamma" (DQAEM) or "beta" (DSAEM) alongside the objective.
nlohmann::json fit_result_to_json(const FitResult& result, const FitConfig& config);
void write_result_json(const FitResult& result, const FitConfig& config,
                       const std::filesystem::path& path);

/// Parsed fit document; only the fields needed to resume or compare a fit.
struct FitDocument {
  Algorithm algorithm = Algorithm::kEm;
  std::uint64_t seed = 0;
  GmmParams final_params;
  std::vector<TraceRecord> trace;
  bool converged = false;
};
FitDocument fit_document_from_json(const nlohmann::json& j);
FitDocument read_result_json(const std::filesystem::path& path);

/// Pretty-printed JSON with a trailing newline.
void write_json_file(const std::filesystem::path& path, const nlohmann::json& j);

}  // namespace dqaem
