#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "sgdg2/objective.hpp"

namespace sgdg2 {

/// Sampling without replacement: each epoch is a fresh permutation of
/// [1..N] cut into consecutive batches of size M. The last batch of an epoch
/// is kept even when shorter than M.
class EpochSchedule {
 public:
  /// batch_size is clamped to sample_count.
  EpochSchedule(std::size_t sample_count, std::size_t batch_size, std::uint64_t seed);

  MiniBatch next_batch();

  std::size_t sample_count() const noexcept { return permutation_.size(); }
  std::size_t batch_size() const noexcept { return batch_size_; }
  std::size_t batches_per_epoch() const noexcept;

  /// 1-based epoch of the most recently returned batch (0 before the first).
  std::size_t epoch() const noexcept { return epoch_; }

  /// Permutation of the current epoch.
  std::span<const std::size_t> permutation() const noexcept { return permutation_; }

 private:
  void reshuffle();

  std::mt19937_64 rng_;
  std::vector<std::size_t> permutation_;
  std::size_t batch_size_;
  std::size_t cursor_ = 0;
  std::size_t epoch_ = 0;
};

}  // namespace sgdg2
