#include "sgdg2/dataset.hpp"

#include <algorithm>
#include <random>
#include <set>
#include <string>

#include "sgdg2/error.hpp"

namespace sgdg2 {

void LabeledDataset::validate() const {
  if (static_cast<std::size_t>(features.rows()) != labels.size()) {
    throw Error(ErrorCode::format_error, "feature rows and label count differ");
  }
  if (class_count < 1) throw Error(ErrorCode::format_error, "class count must be positive");
  if (features.size() > 0 && (features.minCoeff() < 0.0 || features.maxCoeff() > 1.0)) {
    throw Error(ErrorCode::format_error, "features outside [0, 1]");
  }
  for (const int label : labels) {
    if (label < 0 || label >= class_count) {
      throw Error(ErrorCode::format_error, "label " + std::to_string(label) + " out of range");
    }
  }
}

LabeledDataset load_idx_dataset(const std::filesystem::path& images,
                                const std::filesystem::path& labels, int class_count) {
  LabeledDataset dataset{load_idx_images(images), load_idx_labels(labels, class_count),
                         class_count};
  dataset.validate();
  return dataset;
}

LabeledDataset make_gaussian_blobs(int classes, std::size_t per_class, std::size_t dim,
                                   double separation, std::uint64_t seed) {
  if (classes < 2) throw Error(ErrorCode::invalid_argument, "blobs need at least two classes");
  if (dim < 1) throw Error(ErrorCode::invalid_argument, "blob dimension must be >= 1");
  if (dim < 63 && static_cast<std::uint64_t>(classes) > (std::uint64_t{1} << dim)) {
    throw Error(ErrorCode::invalid_argument, "more classes than sign patterns in dim");
  }

  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin;
  std::set<std::vector<bool>> used;
  std::vector<std::vector<double>> centers;
  while (centers.size() < static_cast<std::size_t>(classes)) {
    std::vector<bool> signs(dim);
    for (std::size_t j = 0; j < dim; ++j) signs[j] = coin(rng);
    if (!used.insert(signs).second) continue;
    std::vector<double> center(dim);
    for (std::size_t j = 0; j < dim; ++j) center[j] = 0.5 + separation * (signs[j] ? 0.5 : -0.5);
    centers.push_back(std::move(center));
  }

  const std::size_t n = per_class * static_cast<std::size_t>(classes);
  LabeledDataset dataset;
  dataset.class_count = classes;
  dataset.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  dataset.labels.resize(n);
  std::normal_distribution<double> noise(0.0, 0.1);
  for (std::size_t i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % static_cast<std::size_t>(classes));
    dataset.labels[i] = label;
    for (std::size_t j = 0; j < dim; ++j) {
      const double value = centers[static_cast<std::size_t>(label)][j] + noise(rng);
      dataset.features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
          std::clamp(value, 0.0, 1.0);
    }
  }
  return dataset;
}

std::pair<LabeledDataset, LabeledDataset> split_tail(const LabeledDataset& dataset,
                                                     std::size_t tail) {
  if (tail > dataset.size()) throw Error(ErrorCode::invalid_argument, "tail larger than dataset");
  const auto head = static_cast<Eigen::Index>(dataset.size() - tail);
  LabeledDataset first{dataset.features.topRows(head), {}, dataset.class_count};
  LabeledDataset second{dataset.features.bottomRows(static_cast<Eigen::Index>(tail)), {},
                        dataset.class_count};
  first.labels.assign(dataset.labels.begin(), dataset.labels.begin() + head);
  second.labels.assign(dataset.labels.begin() + head, dataset.labels.end());
  return {std::move(first), std::move(second)};
}

}  // namespace sgdg2
