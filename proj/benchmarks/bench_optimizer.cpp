#include <benchmark/benchmark.h>

#include <memory>
#include <random>

#include "sgdg2/dataset.hpp"
#include "sgdg2/mlp.hpp"
#include "sgdg2/optimizer.hpp"
#include "sgdg2/quadratic.hpp"
#include "sgdg2/schedule.hpp"

namespace {

using namespace sgdg2;

std::shared_ptr<const LabeledDataset> blobs(std::size_t dim) {
  return std::make_shared<const LabeledDataset>(make_gaussian_blobs(10, 100, dim, 0.8, 3));
}

// 784-256-256-256-10 network, batch 32.
void BM_SgdG2StepMlp(benchmark::State& state) {
  const std::vector<std::size_t> dims{784, 256, 256, 256, 10};
  const MlpObjective objective(MlpModel(dims), blobs(784));
  ParamVector x = init_weights(dims, 1);
  OptimizerState opt = OptimizerState::initial(1e-6, kDefaultBeta);
  EpochSchedule schedule(objective.sample_count(), static_cast<std::size_t>(state.range(0)), 2);
  for (auto _ : state) {
    SgdG2Step step = sgdg2_step(opt, objective, x, schedule.next_batch());
    x = std::move(step.x_next);
    opt = step.state;
    benchmark::DoNotOptimize(x.data());
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SgdG2StepMlp)->Arg(32)->Unit(benchmark::kMillisecond);

void BM_SgdStepMlp(benchmark::State& state) {
  const std::vector<std::size_t> dims{784, 256, 256, 256, 10};
  const MlpObjective objective(MlpModel(dims), blobs(784));
  ParamVector x = init_weights(dims, 1);
  OptimizerState opt = OptimizerState::initial(1e-2, kDefaultBeta);
  EpochSchedule schedule(objective.sample_count(), 32, 2);
  for (auto _ : state) {
    SgdStep step = plain_sgd_step(opt, objective, x, schedule.next_batch());
    x = std::move(step.x_next);
    opt = step.state;
    benchmark::DoNotOptimize(x.data());
  }
}
BENCHMARK(BM_SgdStepMlp)->Unit(benchmark::kMillisecond);

void BM_HeunStepQuadratic(benchmark::State& state) {
  std::mt19937_64 rng(4);
  RandomQuadraticOptions options;
  options.dimension = static_cast<std::size_t>(state.range(0));
  options.samples = 16;
  const QuadraticProblem problem = make_random_quadratic(options, rng);
  ParamVector x = ParamVector::Ones(static_cast<Eigen::Index>(options.dimension));
  const MiniBatch batch({1, 5, 9});
  for (auto _ : state) {
    HeunStep step = heun_step(problem, x, 0.01, batch);
    benchmark::DoNotOptimize(step.next.data());
  }
}
BENCHMARK(BM_HeunStepQuadratic)->Arg(8)->Arg(64)->Arg(256);

}  // namespace
