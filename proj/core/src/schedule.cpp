#include "sgdg2/schedule.hpp"

#include <algorithm>
#include <numeric>

#include "sgdg2/error.hpp"

namespace sgdg2 {

EpochSchedule::EpochSchedule(std::size_t sample_count, std::size_t batch_size,
                             std::uint64_t seed)
    : rng_(seed), permutation_(sample_count), batch_size_(std::min(batch_size, sample_count)) {
  if (sample_count == 0) throw Error(ErrorCode::invalid_argument, "schedule over zero samples");
  if (batch_size == 0) throw Error(ErrorCode::invalid_argument, "batch size must be >= 1");
  cursor_ = sample_count;  // first call reshuffles
}

std::size_t EpochSchedule::batches_per_epoch() const noexcept {
  return (permutation_.size() + batch_size_ - 1) / batch_size_;
}

void EpochSchedule::reshuffle() {
  std::iota(permutation_.begin(), permutation_.end(), std::size_t{1});
  std::shuffle(permutation_.begin(), permutation_.end(), rng_);
  cursor_ = 0;
  ++epoch_;
}

MiniBatch EpochSchedule::next_batch() {
  if (cursor_ >= permutation_.size()) reshuffle();
  const std::size_t end = std::min(cursor_ + batch_size_, permutation_.size());
  std::vector<std::size_t> indices(permutation_.begin() + static_cast<std::ptrdiff_t>(cursor_),
                                   permutation_.begin() + static_cast<std::ptrdiff_t>(end));
  cursor_ = end;
  return MiniBatch(std::move(indices));
}

}  // namespace sgdg2
