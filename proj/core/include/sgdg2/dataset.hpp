#pragma once

#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "sgdg2/idx.hpp"

namespace sgdg2 {

/// Feature rows in [0, 1] with integer labels in [0, class_count).
struct LabeledDataset {
  FeatureMatrix features;
  std::vector<int> labels;
  int class_count = 0;

  std::size_t size() const noexcept { return labels.size(); }
  std::size_t input_dim() const noexcept { return static_cast<std::size_t>(features.cols()); }

  /// Throws format_error on shape mismatch, out-of-range features or labels.
  void validate() const;
};

/// Loads an (images, labels) IDX pair.
LabeledDataset load_idx_dataset(const std::filesystem::path& images,
                                const std::filesystem::path& labels, int class_count = 10);

/// `classes` Gaussian clusters (std 0.1 per coordinate) around distinct
/// centers 0.5 + separation * s_k with s_k in {-1/2, +1/2}^dim, clipped to
/// [0, 1]. Samples are interleaved by class: sample i has label i % classes.
/// separation = 0 puts every class on the same center.
LabeledDataset make_gaussian_blobs(int classes, std::size_t per_class, std::size_t dim,
                                   double separation, std::uint64_t seed);

/// Splits off the last `tail` samples as a second dataset.
std::pair<LabeledDataset, LabeledDataset> split_tail(const LabeledDataset& dataset,
                                                     std::size_t tail);

}  // namespace sgdg2
