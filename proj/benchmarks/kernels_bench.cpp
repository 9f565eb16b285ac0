#include <benchmark/benchmark.h>

#include <string>

#include "dqaem/data_io.hpp"
#include "dqaem/estimators.hpp"
#include "dqaem/linalg.hpp"
#include "dqaem/posteriors.hpp"

namespace {

using namespace dqaem;

const Dataset& paper_data() {
  static const Dataset data = sample_gmm(paper_generator_spec(0));
  return data;
}

void BM_SymEig3(benchmark::State& state) {
  Matrix a(3, 3);
  a << 0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 2.0;
  for (auto _ : state) benchmark::DoNotOptimize(sym_eig(a));
}
BENCHMARK(BM_SymEig3);

void BM_HamiltonianMatrix(benchmark::State& state) {
  const GmmParams p = paper_true_params();
  for (auto _ : state) benchmark::DoNotOptimize(hamiltonian_matrix(paper_data(), p));
}
BENCHMARK(BM_HamiltonianMatrix);

void BM_QuantumEStep(benchmark::State& state) {
  const Matrix h = hamiltonian_matrix(paper_data(), paper_true_params());
  const CouplingMatrix ones = CouplingMatrix::all_ones(3);
  const double gamma = static_cast<double>(state.range(0)) / 10.0;
  for (auto _ : state) benchmark::DoNotOptimize(quantum_estep(h, gamma, ones));
}
BENCHMARK(BM_QuantumEStep)->Arg(0)->Arg(5)->Arg(10);

void BM_Fit(benchmark::State& state) {
  const auto algo = static_cast<Algorithm>(state.range(0));
  const GmmParams init = random_init(paper_data(), 3, 1);
  const FitConfig config = default_config(algo);
  for (auto _ : state) benchmark::DoNotOptimize(fit(paper_data(), config, init));
  state.SetLabel(std::string(to_string(algo)));
}
BENCHMARK(BM_Fit)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
