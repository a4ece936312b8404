#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace sgdg2 {

/// Flat vector holding every model parameter.
using ParamVector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A set of sample indices, 1-based in [1..N]. Duplicates are allowed; the
/// epoch scheduler never produces them.
class MiniBatch {
 public:
  MiniBatch() = default;
  explicit MiniBatch(std::vector<std::size_t> indices) : indices_(std::move(indices)) {}

  /// Every index 1..n, in order.
  static MiniBatch full(std::size_t n);

  std::span<const std::size_t> indices() const noexcept { return indices_; }
  std::size_t size() const noexcept { return indices_.size(); }
  bool empty() const noexcept { return indices_.empty(); }

 private:
  std::vector<std::size_t> indices_;
};

struct LossAndGradient {
  double loss = 0.0;
  ParamVector gradient;
};

/// The mean-of-samples loss f(x) = (1/N) sum_i f_i(x). Optimizers only ever
/// see this interface. Implementations are immutable after construction.
///
/// The public entry points validate the batch, the dimension of x and the
/// finiteness of the result; subclasses only supply the raw arithmetic.
class StochasticObjective {
 public:
  virtual ~StochasticObjective() = default;

  virtual std::size_t sample_count() const = 0;
  virtual std::size_t dimension() const = 0;

  /// Mean loss and mean gradient over `batch`.
  LossAndGradient evaluate(const ParamVector& x, const MiniBatch& batch) const;

  /// Mean loss over `batch`, without the gradient.
  double loss(const ParamVector& x, const MiniBatch& batch) const;

  /// Batch gradient at x minus batch gradient at y, given g_x (the batch
  /// gradient at x). Linear-gradient models compute it from x - y directly,
  /// which avoids the cancellation of subtracting two nearby gradients.
  ParamVector gradient_change(const ParamVector& x, const ParamVector& g_x, const ParamVector& y,
                              const MiniBatch& batch) const;

 protected:
  /// Adds the gradient of f_index at x into `gradient` and returns f_index(x).
  /// `index` is 1-based and already validated.
  virtual double accumulate_sample(std::size_t index, const ParamVector& x,
                                   ParamVector& gradient) const = 0;

  virtual double sample_loss(std::size_t index, const ParamVector& x) const = 0;

  /// Mean over `indices`. The default loops over accumulate_sample; models
  /// with a batched kernel override it.
  virtual LossAndGradient batch_loss_and_gradient(const ParamVector& x,
                                                  std::span<const std::size_t> indices) const;

  virtual double batch_loss(const ParamVector& x, std::span<const std::size_t> indices) const;

  virtual ParamVector batch_gradient_change(const ParamVector& x, const ParamVector& g_x,
                                            const ParamVector& y,
                                            std::span<const std::size_t> indices) const;

 private:
  void check_inputs(const ParamVector& x, const MiniBatch& batch) const;
};

/// (1/M) sum_m grad f_{batch[m]}(x).
ParamVector sample_gradient(const StochasticObjective& objective, const ParamVector& x,
                            const MiniBatch& batch);

/// Gradient of the full N-sample mean.
ParamVector full_gradient(const StochasticObjective& objective, const ParamVector& x);

double full_loss(const StochasticObjective& objective, const ParamVector& x);

/// Covariance of the per-sample gradients around the full gradient:
/// (1/N) sum_k (g_k - g)(g_k - g)^T.
Matrix noise_covariance(const StochasticObjective& objective, const ParamVector& x);

}  // namespace sgdg2
