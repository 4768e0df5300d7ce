#include <benchmark/benchmark.h>

#include <vector>

#include "metrotwin/propagation.hpp"

using namespace metrotwin;

namespace {

void BM_CombineLinear(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> c(n, 1.5), v(n, 2.0), u(n, 0.1);
  const auto inputs = UncertainVector::independent(v, u);
  for (auto _ : state) {
    benchmark::DoNotOptimize(combine_linear(c, inputs, Unit::dimensionless()));
  }
}
BENCHMARK(BM_CombineLinear)->Arg(2)->Arg(16)->Arg(128);

void BM_MonteCarlo(benchmark::State& state) {
  std::vector<DistributionSpec> dists{DistributionSpec::gaussian(1.0, 0.1), DistributionSpec::gaussian(2.0, 0.2),
                                      DistributionSpec::gaussian(3.0, 0.3)};
  const Eigen::MatrixXd corr = Eigen::MatrixXd::Identity(3, 3);
  MonteCarloOptions opt;
  opt.draws = static_cast<std::size_t>(state.range(0));
  const ScalarModel model = [](std::span<const double> x) { return x[0] * x[1] + x[2]; };
  for (auto _ : state) {
    benchmark::DoNotOptimize(monte_carlo_propagate(model, dists, corr, opt));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MonteCarlo)->Arg(10'000)->Arg(1'000'000)->Unit(benchmark::kMillisecond);

}  // namespace
