#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "sgdg2/optimizer.hpp"

namespace sgdg2::app {

enum class DatasetKind { mnist, fmnist, blobs, quadratic };

std::string_view to_string(DatasetKind kind) noexcept;

/// Everything one experiment needs. Each field has a setting key (the long
/// flag name without dashes) used by config files, flags and the CSV header.
struct ExperimentConfig {
  DatasetKind dataset = DatasetKind::blobs;
  std::filesystem::path data_dir;
  std::vector<std::size_t> hidden{256, 256, 256};

  OptimizerKind optimizer = OptimizerKind::sgd_g2;
  double h0 = kDefaultInitialRate;
  double beta = kDefaultBeta;
  std::size_t batch_size = 32;
  std::size_t epochs = 10;
  std::uint64_t max_iterations = 0;
  std::uint64_t seed = 1;
  std::uint64_t eval_every = 0;

  std::filesystem::path out = "sgdg2-out";
  bool svg = true;

  int blob_classes = 4;
  std::size_t blob_per_class = 250;
  std::size_t blob_test_per_class = 50;
  std::size_t blob_dim = 20;
  double blob_separation = 0.8;

  std::size_t quad_dim = 2;
  std::size_t quad_samples = 4;
  double quad_min_eig = 0.1;
  double quad_max_eig = 1.0;
  double quad_spread = 0.5;
  /// Per-sample curvatures of a 1-D problem; overrides the random problem.
  std::vector<double> quad_curvatures;
  /// Starting point, one entry broadcast to every coordinate.
  std::vector<double> quad_x0{1.0};

  std::vector<double> h0_list{1e-6, 1e-4, 1e-2};
  std::vector<OptimizerKind> optimizers{OptimizerKind::sgd, OptimizerKind::sgd_g2};
};

/// Setting keys in canonical order.
const std::vector<std::string>& setting_keys();

/// Sets one field from text. Accepts '-' or '_' inside the key. Throws
/// Error(invalid_argument) for unknown keys or unparsable values.
void apply_setting(ExperimentConfig& config, std::string_view key, std::string_view value);

/// Parses `key = value` lines; '#' starts a comment.
void apply_config_text(ExperimentConfig& config, std::string_view text);
void apply_config_file(ExperimentConfig& config, const std::filesystem::path& path);

/// Fills data_dir from SGDG2_DATA_DIR when unset.
void apply_environment(ExperimentConfig& config);

/// Checks the invariants (h0 > 0, beta in (0, 1), batch_size >= 1, ...).
void validate(const ExperimentConfig& config);

/// (key, value) for every setting, in setting_keys() order, formatted so
/// that apply_setting reproduces the config.
std::vector<std::pair<std::string, std::string>> settings(const ExperimentConfig& config);

}  // namespace sgdg2::app
