#include <benchmark/benchmark.h>

#include <random>

#include "sgdg2/convlab.hpp"

namespace {

using namespace sgdg2;

void BM_ExactOneStepMoments(benchmark::State& state) {
  std::mt19937_64 rng(5);
  RandomQuadraticOptions options;
  options.dimension = 4;
  options.samples = static_cast<std::size_t>(state.range(0));
  const QuadraticProblem problem = make_random_quadratic(options, rng);
  const ParamVector x = ParamVector::Ones(4);
  for (auto _ : state) {
    OneStepMoments m = exact_one_step_moments(problem, x, 0.05, MomentScheme::sh);
    benchmark::DoNotOptimize(m.second.data());
  }
}
BENCHMARK(BM_ExactOneStepMoments)->Arg(4)->Arg(64);

void BM_OdeGlobalErrorScan(benchmark::State& state) {
  std::mt19937_64 rng(6);
  RandomQuadraticOptions options;
  options.dimension = 5;
  options.samples = 1;
  options.spread = 0.0;
  const QuadraticProblem problem = make_random_quadratic(options, rng);
  const ParamVector x0 = ParamVector::Ones(5);
  const auto steps = dyadic_steps(3, 8);
  for (auto _ : state) {
    OrderFit fit = ode_global_error(problem, OdeScheme::heun, x0, 1.0, steps);
    benchmark::DoNotOptimize(fit.slope);
  }
}
BENCHMARK(BM_OdeGlobalErrorScan);

}  // namespace
