#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgdg2/optimizer.hpp"
#include "sgdg2/schedule.hpp"

namespace sgdg2 {

struct RunConfig {
  OptimizerKind optimizer = OptimizerKind::sgd_g2;
  double h0 = kDefaultInitialRate;
  double beta = kDefaultBeta;
  std::size_t epochs = 10;
  /// Hard cap on iterations; 0 means epochs alone decide.
  std::uint64_t max_iterations = 0;
  /// Evaluate every this many iterations; 0 means at the end of each epoch.
  std::uint64_t eval_every = 0;
  double critical_tolerance = kDefaultCriticalTolerance;
};

/// Whole-dataset metrics computed periodically during a run.
struct Evaluation {
  std::optional<double> train_loss;
  std::optional<double> train_accuracy;
  std::optional<double> test_accuracy;
};

/// One row per iteration.
struct RunRow {
  std::uint64_t iteration = 0;  // 1-based
  std::uint64_t grad_evals = 0;
  std::size_t epoch = 0;  // 1-based
  double minibatch_loss = 0.0;
  Evaluation evaluation;
  /// Learning rate applied to this iteration's parameter update.
  double h = 0.0;
  /// Rate-controller fields; empty for plain SGD.
  std::optional<double> p;
  std::optional<double> h_opt;
  std::optional<Branch> branch;
};

struct RunRecord {
  std::vector<RunRow> rows;
};

enum class RunStatus { completed, diverged };

struct RunResult {
  RunStatus status = RunStatus::completed;
  RunRecord record;
  ParamVector final_params;
  OptimizerState final_state;
  /// Iteration that produced a non-finite value; rows before it are kept.
  std::optional<std::uint64_t> diverged_at;
  std::string message;
};

struct RunHooks {
  std::function<Evaluation(const ParamVector&)> evaluate;
  std::function<void(const RunRow&)> on_row;
};

/// Runs SGD or SGD-G2 over the schedule's epochs. A non-finite loss,
/// gradient or parameter stops the run with status diverged.
RunResult run_optimizer(const RunConfig& config, const StochasticObjective& objective,
                        ParamVector x0, EpochSchedule& schedule, const RunHooks& hooks = {});

}  // namespace sgdg2
