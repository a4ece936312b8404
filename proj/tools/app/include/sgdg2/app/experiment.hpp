#pragma once

#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "sgdg2/app/config.hpp"
#include "sgdg2/dataset.hpp"
#include "sgdg2/runner.hpp"

namespace sgdg2::app {

/// IDX file names expected inside data_dir for mnist and fmnist.
const std::vector<std::string>& idx_file_names();

/// Objective, starting point and evaluator built from a config.
struct Experiment {
  std::shared_ptr<const StochasticObjective> objective;
  ParamVector x0;
  std::function<Evaluation(const ParamVector&)> evaluate;
  /// Present for classification datasets.
  std::shared_ptr<const LabeledDataset> train;
  std::shared_ptr<const LabeledDataset> test;
};

/// Throws Error(io_error) naming the expected IDX paths when they are missing.
Experiment build_experiment(const ExperimentConfig& config);

/// Runs one optimizer over a built experiment. Deterministic in config.seed.
RunResult run_experiment(const ExperimentConfig& config, const Experiment& experiment,
                         const RunHooks& hooks = {});

}  // namespace sgdg2::app
