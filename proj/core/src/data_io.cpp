#include "dqaem/data_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <Eigen/Cholesky>

#include "dqaem/random.hpp"

namespace dqaem {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

template <typename T>
bool parse_number(const std::string& text, T& out) {
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

json vector_to_json(const Vector& v) {
  return json(std::vector<double>(v.data(), v.data() + v.size()));
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const Vector r = m.row(i).transpose();
    rows.push_back(vector_to_json(r));
  }
  return rows;
}

Vector vector_from_json(const json& j) {
  const auto values = j.get<std::vector<double>>();
  return Eigen::Map<const Vector>(values.data(), static_cast<Eigen::Index>(values.size()));
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.get<std::vector<std::vector<double>>>();
  if (rows.empty()) return Matrix();
  Matrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw InvalidParameter("ragged matrix in JSON");
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
  }
  return m;
}

const char* annealing_key(Algorithm a) {
  switch (a) {
    case Algorithm::kDqaem:
      return "gamma";
    case Algorithm::kDsaem:
      return "beta";
    case Algorithm::kEm:
      break;
  }
  return nullptr;
}

}  // namespace

GmmParams paper_true_params() {
  Vector w = Vector::Constant(3, 1.0 / 3.0);
  w /= w.sum();
  std::vector<Vector> means;
  for (double x : {-3.0, 0.0, 3.0}) {
    Vector mu(2);
    mu << x, 0.0;
    means.push_back(mu);
  }
  std::vector<Matrix> covs(3, Matrix::Identity(2, 2));
  return GmmParams(std::move(w), std::move(means), std::move(covs));
}

GeneratorSpec paper_generator_spec(std::uint64_t seed, std::size_t n_points) {
  return GeneratorSpec{paper_true_params(), n_points, seed};
}

Dataset sample_gmm(const GeneratorSpec& spec) {
  if (spec.n_points < 1) throw InvalidParameter("generator needs n_points >= 1");
  const GmmParams& p = spec.true_params;
  const auto d = static_cast<Eigen::Index>(p.dim());
  const std::size_t k = p.components();

  std::vector<Matrix> factors;
  for (std::size_t c = 0; c < k; ++c) {
    Eigen::LLT<Matrix> llt(p.covariance(c));
    factors.push_back(llt.matrixL());
  }
  std::vector<double> cumulative;
  double acc = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    acc += p.weights()[static_cast<Eigen::Index>(c)];
    cumulative.push_back(acc);
  }

  Rng rng(spec.seed);
  Matrix points(static_cast<Eigen::Index>(spec.n_points), d);
  std::vector<int> labels(spec.n_points);
  Vector z(d);
  for (std::size_t i = 0; i < spec.n_points; ++i) {
    const std::size_t c = rng.categorical(cumulative);
    for (Eigen::Index j = 0; j < d; ++j) z[j] = rng.normal();
    points.row(static_cast<Eigen::Index>(i)) = (p.mean(c) + factors[c] * z).transpose();
    labels[i] = static_cast<int>(c);
  }
  return Dataset(std::move(points), std::move(labels), p);
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_csv(const Dataset& data, const fs::path& path) {
  std::string out;
  const std::size_t d = data.dim();
  for (std::size_t j = 0; j < d; ++j) {
    if (j) out += ',';
    out += "x" + std::to_string(j + 1);
  }
  if (data.true_labels) out += ",label";
  out += '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      if (j) out += ',';
      out += format_double(data.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    }
    if (data.true_labels) out += "," + std::to_string((*data.true_labels)[i]);
    out += '\n';
  }
  write_text_file(path, out);
}

Dataset read_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file", 1);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  std::size_t d = 0;
  bool has_label = false;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (header[j] == "x" + std::to_string(j + 1)) {
      if (has_label) throw ParseError(path.string() + ": label column must be last", 1);
      ++d;
    } else if (header[j] == "label" && j + 1 == header.size()) {
      has_label = true;
    } else {
      throw ParseError(path.string() + ":1: unexpected header column '" + header[j] + "'", 1);
    }
  }
  if (d == 0) throw ParseError(path.string() + ":1: no coordinate columns", 1);

  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    const std::string where = path.string() + ":" + std::to_string(line_no) + ": ";
    if (cells.size() != header.size()) {
      throw ParseError(where + "expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(cells.size()),
                       line_no);
    }
    for (std::size_t j = 0; j < d; ++j) {
      double v = 0.0;
      if (!parse_number(cells[j], v) || !std::isfinite(v)) {
        throw ParseError(where + "invalid number '" + cells[j] + "'", line_no);
      }
      values.push_back(v);
    }
    if (has_label) {
      int label = 0;
      if (!parse_number(cells[d], label) || label < 0) {
        throw ParseError(where + "invalid label '" + cells[d] + "'", line_no);
      }
      labels.push_back(label);
    }
  }
  const std::size_t n = values.size() / d;
  if (n == 0) throw ParseError(path.string() + ": no data rows", line_no);
  Matrix points(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < d; ++j) {
      points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = values[i * d + j];
    }
  }
  std::optional<std::vector<int>> opt_labels;
  if (has_label) opt_labels = std::move(labels);
  return Dataset(std::move(points), std::move(opt_labels));
}

json params_to_json(const GmmParams& params) {
  json means = json::array();
  json covs = json::array();
  for (std::size_t k = 0; k < params.components(); ++k) {
    means.push_back(vector_to_json(params.mean(k)));
    covs.push_back(matrix_to_json(params.covariance(k)));
  }
  return json{{"K", params.components()},
              {"D", params.dim()},
              {"weights", vector_to_json(params.weights())},
              {"means", means},
              {"covariances", covs}};
}

GmmParams params_from_json(const json& j) {
  std::vector<Vector> means;
  std::vector<Matrix> covs;
  for (const auto& m : j.at("means")) means.push_back(vector_from_json(m));
  for (const auto& c : j.at("covariances")) covs.push_back(matrix_from_json(c));
  return GmmParams(vector_from_json(j.at("weights")), std::move(means), std::move(covs));
}

json schedule_to_json(const Schedule& s) {
  return json{{"kind", s.kind == Schedule::Kind::kConstant ? "constant" : "exponential"},
              {"init", s.init},
              {"rate", s.rate},
              {"target", s.target},
              {"cutoff", s.cutoff}};
}

Schedule schedule_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  Schedule::Kind k;
  if (kind == "constant") {
    k = Schedule::Kind::kConstant;
  } else if (kind == "exponential") {
    k = Schedule::Kind::kExponential;
  } else {
    throw InvalidParameter("unknown schedule kind '" + kind + "'");
  }
  return make_schedule(k, j.at("init").get<double>(), j.at("rate").get<double>(),
                       j.at("target").get<double>(), j.at("cutoff").get<double>());
}

json fit_result_to_json(const FitResult& result, const FitConfig& config) {
  const char* key = annealing_key(result.algorithm);
  json trace = json::array();
  for (const auto& r : result.trace) {
    json row{{"iteration", r.iteration}, {"objective", r.objective}, {"log_likelihood", r.log_likelihood}};
    if (key) row[key] = r.annealing;
    trace.push_back(std::move(row));
  }
  json events = json::array();
  for (const auto& e : result.events) {
    events.push_back({{"type", "degenerate_component"},
                      {"iteration", e.iteration},
                      {"component", e.component},
                      {"effective_count", e.effective_count}});
  }
  json cfg{{"algorithm", to_string(config.algorithm)},
           {"max_iters", config.max_iters},
           {"rel_tol", config.rel_tol},
           {"seed", config.seed}};
  if (config.algorithm != Algorithm::kEm) cfg["schedule"] = schedule_to_json(config.schedule);
  if (config.algorithm == Algorithm::kDqaem) {
    const CouplingMatrix c = config.coupling ? *config.coupling
                                             : CouplingMatrix::all_ones(result.final_params.components());
    cfg["coupling"] = matrix_to_json(c.matrix());
  }
  return json{{"schema_version", kSchemaVersion},
              {"kind", "fit"},
              {"algorithm", to_string(result.algorithm)},
              {"seed", config.seed},
              {"rng", kRngName},
              {"normal_sampler", kNormalMethod},
              {"config", cfg},
              {"converged", result.converged},
              {"iterations_used", result.iterations_used},
              {"trace", trace},
              {"final_params", params_to_json(result.final_params)},
              {"events", events},
              {"responsibility_check",
               {{"max_row_sum_error", result.responsibility_stats.max_row_sum_error},
                {"min_entry", result.responsibility_stats.min_entry}}}};
}

void write_json_file(const fs::path& path, const json& j) {
  write_text_file(path, j.dump(2) + "\n");
}

void write_result_json(const FitResult& result, const FitConfig& config, const fs::path& path) {
  write_json_file(path, fit_result_to_json(result, config));
}

FitDocument fit_document_from_json(const json& j) {
  if (j.at("schema_version").get<std::string>() != kSchemaVersion) {
    throw InvalidParameter("unsupported schema_version");
  }
  const Algorithm algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
  const char* key = annealing_key(algorithm);
  std::vector<TraceRecord> trace;
  for (const auto& row : j.at("trace")) {
    trace.push_back({row.at("iteration").get<std::size_t>(), key ? row.at(key).get<double>() : 1.0,
                     row.at("objective").get<double>(), row.at("log_likelihood").get<double>()});
  }
  return FitDocument{algorithm, j.at("seed").get<std::uint64_t>(), params_from_json(j.at("final_params")),
                     std::move(trace), j.at("converged").get<bool>()};
}

FitDocument read_result_json(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_text_file(path));
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
  return fit_document_from_json(j);
}

}  // namespace dqaem
