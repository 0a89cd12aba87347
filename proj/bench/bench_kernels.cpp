#include <benchmark/benchmark.h>

#include <random>

#include "tmap/estimation.hpp"
#include "tmap/kernels.hpp"
#include "tmap/sparsity.hpp"

using namespace tmap;

namespace {

Eigen::MatrixXd normal_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  Eigen::MatrixXd x(rows, cols);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = nd(gen);
  return x;
}

Execution execution_of(const benchmark::State& state) {
  return state.range(1) == 0 ? Execution::serial : Execution::parallel;
}

void BM_PropagateLorenz96(benchmark::State& state) {
  const auto spec = DynamicsSpec::lorenz96();
  const auto m = state.range(0);
  const Eigen::MatrixXd x = 3.0 * normal_matrix(m, 40, 1);
  std::uint64_t step = 0;
  for (auto _ : state) benchmark::DoNotOptimize(propagate_ensemble(spec, x, 1, ++step, execution_of(state)));
  state.SetItemsProcessed(state.iterations() * m);
}

void BM_ConditionalTransport(benchmark::State& state) {
  const auto m = state.range(0);
  const std::size_t n = 10;
  MapSpec spec;
  spec.p = 2;
  const auto sparsity = with_data_slots(distance_sparsity(line_distance, n, 3.0), 1, false);
  const Eigen::MatrixXd samples = normal_matrix(m, n + 1, 2);
  const auto fitted = fit_map(samples, spec, sparsity);
  const Eigen::VectorXd data = Eigen::VectorXd::Constant(1, 0.3);
  for (auto _ : state) {
    benchmark::DoNotOptimize(conditional_transport(fitted.map, samples, data, execution_of(state)));
  }
  state.SetItemsProcessed(state.iterations() * m);
}

}  // namespace

BENCHMARK(BM_PropagateLorenz96)->ArgsProduct({{100, 400}, {0, 1}})->ArgNames({"M", "parallel"});
BENCHMARK(BM_ConditionalTransport)->ArgsProduct({{400, 2000}, {0, 1}})->ArgNames({"M", "parallel"});

BENCHMARK_MAIN();
