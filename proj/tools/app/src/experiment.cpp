#include "sgdg2/app/experiment.hpp"

#include <random>

#include <fmt/format.h>

#include "sgdg2/error.hpp"
#include "sgdg2/mlp.hpp"
#include "sgdg2/quadratic.hpp"

namespace sgdg2::app {

namespace {

// Independent streams for data, weights and batches from one seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream)};
  std::uint32_t words[2];
  seq.generate(words, words + 2);
  return (static_cast<std::uint64_t>(words[0]) << 32) | words[1];
}

std::pair<LabeledDataset, LabeledDataset> load_idx_pair(const std::filesystem::path& dir) {
  const auto& names = idx_file_names();
  std::vector<std::filesystem::path> paths;
  std::string missing;
  for (const auto& name : names) {
    paths.push_back(dir / name);
    if (!std::filesystem::is_regular_file(paths.back())) missing += "\n  " + paths.back().string();
  }
  if (!missing.empty()) {
    throw Error(ErrorCode::io_error,
                fmt::format("IDX files not found:{}\nDownload the four uncompressed IDX files "
                            "(gunzip the .gz archives) into {} or set data-dir / SGDG2_DATA_DIR.",
                            missing, dir.empty() ? std::string("<data-dir>") : dir.string()));
  }
  return {load_idx_dataset(paths[0], paths[1]), load_idx_dataset(paths[2], paths[3])};
}

Experiment classification(const ExperimentConfig& config, LabeledDataset train,
                          LabeledDataset test) {
  std::vector<std::size_t> dims{train.input_dim()};
  dims.insert(dims.end(), config.hidden.begin(), config.hidden.end());
  dims.push_back(static_cast<std::size_t>(train.class_count));

  Experiment e;
  auto shared_train = std::make_shared<const LabeledDataset>(std::move(train));
  auto shared_test = std::make_shared<const LabeledDataset>(std::move(test));
  auto objective = std::make_shared<const MlpObjective>(MlpModel(dims), shared_train);
  e.x0 = init_weights(dims, derive_seed(config.seed, 1));
  e.train = shared_train;
  e.test = shared_test;
  e.evaluate = [objective, shared_train, shared_test](const ParamVector& x) {
    Evaluation out;
    const DatasetScore train_score = score_dataset(objective->model(), x, *shared_train);
    out.train_loss = train_score.mean_loss;
    out.train_accuracy = train_score.accuracy;
    if (shared_test->size() > 0) {
      out.test_accuracy = score_dataset(objective->model(), x, *shared_test).accuracy;
    }
    return out;
  };
  e.objective = std::move(objective);
  return e;
}

Experiment quadratic(const ExperimentConfig& config) {
  std::shared_ptr<const QuadraticProblem> problem;
  if (!config.quad_curvatures.empty()) {
    problem = std::make_shared<const QuadraticProblem>(QuadraticProblem::scalar(config.quad_curvatures));
  } else {
    std::mt19937_64 rng(derive_seed(config.seed, 0));
    RandomQuadraticOptions options;
    options.dimension = config.quad_dim;
    options.samples = config.quad_samples;
    options.min_eigenvalue = config.quad_min_eig;
    options.max_eigenvalue = config.quad_max_eig;
    options.spread = config.quad_spread;
    problem = std::make_shared<const QuadraticProblem>(make_random_quadratic(options, rng));
  }
  const auto d = static_cast<Eigen::Index>(problem->dimension());
  Experiment e;
  if (config.quad_x0.size() == 1) {
    e.x0 = ParamVector::Constant(d, config.quad_x0.front());
  } else if (static_cast<Eigen::Index>(config.quad_x0.size()) == d) {
    e.x0 = Eigen::Map<const ParamVector>(config.quad_x0.data(), d);
  } else {
    throw Error(ErrorCode::dimension_mismatch,
                fmt::format("quad-x0 has {} entries, problem dimension is {}",
                            config.quad_x0.size(), d));
  }
  e.evaluate = [problem](const ParamVector& x) {
    Evaluation out;
    out.train_loss = full_loss(*problem, x);
    return out;
  };
  e.objective = std::move(problem);
  return e;
}

}  // namespace

const std::vector<std::string>& idx_file_names() {
  static const std::vector<std::string> names{
      "train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
      "t10k-labels-idx1-ubyte"};
  return names;
}

Experiment build_experiment(const ExperimentConfig& config) {
  validate(config);
  switch (config.dataset) {
    case DatasetKind::mnist:
    case DatasetKind::fmnist: {
      auto [train, test] = load_idx_pair(config.data_dir);
      return classification(config, std::move(train), std::move(test));
    }
    case DatasetKind::blobs: {
      const std::size_t per_class = config.blob_per_class + config.blob_test_per_class;
      LabeledDataset all = make_gaussian_blobs(config.blob_classes, per_class, config.blob_dim,
                                               config.blob_separation, derive_seed(config.seed, 0));
      const std::size_t tail =
          config.blob_test_per_class * static_cast<std::size_t>(config.blob_classes);
      auto [train, test] = split_tail(all, tail);
      return classification(config, std::move(train), std::move(test));
    }
    case DatasetKind::quadratic:
      return quadratic(config);
  }
  throw Error(ErrorCode::invalid_argument, "unknown dataset");
}

RunResult run_experiment(const ExperimentConfig& config, const Experiment& experiment,
                         const RunHooks& hooks) {
  RunConfig run;
  run.optimizer = config.optimizer;
  run.h0 = config.h0;
  run.beta = config.beta;
  run.epochs = config.epochs;
  run.max_iterations = config.max_iterations;
  run.eval_every = config.eval_every;
  EpochSchedule schedule(experiment.objective->sample_count(), config.batch_size,
                         derive_seed(config.seed, 2));
  RunHooks effective = hooks;
  if (!effective.evaluate) effective.evaluate = experiment.evaluate;
  return run_optimizer(run, *experiment.objective, experiment.x0, schedule, effective);
}

}  // namespace sgdg2::app
