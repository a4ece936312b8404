#include "sgdg2/objective.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "sgdg2/error.hpp"

namespace sgdg2 {

MiniBatch MiniBatch::full(std::size_t n) {
  std::vector<std::size_t> indices(n);
  std::iota(indices.begin(), indices.end(), std::size_t{1});
  return MiniBatch(std::move(indices));
}

void StochasticObjective::check_inputs(const ParamVector& x, const MiniBatch& batch) const {
  if (static_cast<std::size_t>(x.size()) != dimension()) {
    throw Error(ErrorCode::dimension_mismatch,
                "point has " + std::to_string(x.size()) + " entries, objective expects " +
                    std::to_string(dimension()));
  }
  if (batch.empty()) {
    throw Error(ErrorCode::invalid_batch, "empty mini-batch");
  }
  const std::size_t n = sample_count();
  for (const std::size_t index : batch.indices()) {
    if (index < 1 || index > n) {
      throw Error(ErrorCode::invalid_batch, "sample index " + std::to_string(index) +
                                                " outside [1.." + std::to_string(n) + "]");
    }
  }
}

LossAndGradient StochasticObjective::evaluate(const ParamVector& x, const MiniBatch& batch) const {
  check_inputs(x, batch);
  LossAndGradient result = batch_loss_and_gradient(x, batch.indices());
  if (!std::isfinite(result.loss) || !result.gradient.allFinite()) {
    throw Error(ErrorCode::numeric_overflow, "non-finite loss or gradient");
  }
  return result;
}

double StochasticObjective::loss(const ParamVector& x, const MiniBatch& batch) const {
  check_inputs(x, batch);
  const double value = batch_loss(x, batch.indices());
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::numeric_overflow, "non-finite loss");
  }
  return value;
}

ParamVector StochasticObjective::gradient_change(const ParamVector& x, const ParamVector& g_x,
                                                 const ParamVector& y,
                                                 const MiniBatch& batch) const {
  check_inputs(x, batch);
  check_inputs(y, batch);
  if (g_x.size() != x.size()) {
    throw Error(ErrorCode::dimension_mismatch, "gradient and point sizes differ");
  }
  ParamVector change = batch_gradient_change(x, g_x, y, batch.indices());
  if (!change.allFinite()) {
    throw Error(ErrorCode::numeric_overflow, "non-finite gradient");
  }
  return change;
}

ParamVector StochasticObjective::batch_gradient_change(const ParamVector&, const ParamVector& g_x,
                                                       const ParamVector& y,
                                                       std::span<const std::size_t> indices) const {
  return g_x - batch_loss_and_gradient(y, indices).gradient;
}

LossAndGradient StochasticObjective::batch_loss_and_gradient(
    const ParamVector& x, std::span<const std::size_t> indices) const {
  LossAndGradient result{0.0, ParamVector::Zero(static_cast<Eigen::Index>(dimension()))};
  for (const std::size_t index : indices) {
    result.loss += accumulate_sample(index, x, result.gradient);
  }
  const double scale = 1.0 / static_cast<double>(indices.size());
  result.loss *= scale;
  result.gradient *= scale;
  return result;
}

double StochasticObjective::batch_loss(const ParamVector& x,
                                       std::span<const std::size_t> indices) const {
  double total = 0.0;
  for (const std::size_t index : indices) total += sample_loss(index, x);
  return total / static_cast<double>(indices.size());
}

ParamVector sample_gradient(const StochasticObjective& objective, const ParamVector& x,
                            const MiniBatch& batch) {
  return objective.evaluate(x, batch).gradient;
}

ParamVector full_gradient(const StochasticObjective& objective, const ParamVector& x) {
  return sample_gradient(objective, x, MiniBatch::full(objective.sample_count()));
}

double full_loss(const StochasticObjective& objective, const ParamVector& x) {
  return objective.loss(x, MiniBatch::full(objective.sample_count()));
}

Matrix noise_covariance(const StochasticObjective& objective, const ParamVector& x) {
  const std::size_t n = objective.sample_count();
  const auto d = static_cast<Eigen::Index>(objective.dimension());
  const ParamVector mean = full_gradient(objective, x);
  Matrix covariance = Matrix::Zero(d, d);
  for (std::size_t k = 1; k <= n; ++k) {
    const ParamVector deviation = sample_gradient(objective, x, MiniBatch({k})) - mean;
    covariance.noalias() += deviation * deviation.transpose();
  }
  covariance /= static_cast<double>(n);
  // Symmetric by construction up to rounding in the rank-one sums.
  covariance = 0.5 * (covariance + covariance.transpose()).eval();
  if (!covariance.allFinite()) {
    throw Error(ErrorCode::numeric_overflow, "non-finite noise covariance");
  }
  return covariance;
}

}  // namespace sgdg2
