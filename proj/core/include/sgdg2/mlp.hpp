#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "sgdg2/dataset.hpp"
#include "sgdg2/objective.hpp"

namespace sgdg2 {

/// Cross-entropy uses max(p, kProbabilityFloor) so confident mistakes stay finite.
inline constexpr double kProbabilityFloor = 1e-30;

/// Numerically stable softmax of one logit vector.
Eigen::VectorXd softmax(const Eigen::VectorXd& logits);

/// Dense feed-forward network: ReLU on hidden layers, softmax on the output.
///
/// Parameters are packed layer by layer as [W_1, b_1, W_2, b_2, ...] where
/// W_l is d_out x d_in stored column-major. ReLU'(0) is taken as 0.
class MlpModel {
 public:
  /// layer_dims = {input, hidden..., classes}; at least two entries.
  explicit MlpModel(std::vector<std::size_t> layer_dims);

  const std::vector<std::size_t>& layer_dims() const noexcept { return dims_; }
  std::size_t input_dim() const noexcept { return dims_.front(); }
  std::size_t output_dim() const noexcept { return dims_.back(); }
  std::size_t layer_count() const noexcept { return dims_.size() - 1; }
  std::size_t parameter_count() const noexcept { return offsets_.back(); }

  /// Offset of W_l in the packed vector; b_l follows it. l is 0-based.
  std::size_t weight_offset(std::size_t layer) const { return offsets_.at(layer); }

  /// Class probabilities for one input.
  Eigen::VectorXd forward(const ParamVector& params, const Eigen::VectorXd& input) const;

  /// Pre-activations of every layer for a batch of inputs (one per column).
  std::vector<Matrix> pre_activations(const ParamVector& params, const Matrix& inputs) const;

  /// Logits for a batch of inputs (one per column).
  Matrix logits(const ParamVector& params, const Matrix& inputs) const;

  /// Sum over the batch of the cross-entropy loss; adds the summed gradient
  /// into `gradient_sum`.
  double accumulate_batch(const ParamVector& params, const Matrix& inputs,
                          std::span<const int> labels, ParamVector& gradient_sum) const;

  /// Single-sample loss and gradient.
  LossAndGradient loss_and_gradient(const ParamVector& params, const Eigen::VectorXd& input,
                                    int label) const;

 private:
  void check_params(const ParamVector& params) const;

  std::vector<std::size_t> dims_;
  std::vector<std::size_t> offsets_;
};

/// Glorot-uniform weights in +-sqrt(6 / (d_in + d_out)), zero biases.
ParamVector init_weights(std::span<const std::size_t> layer_dims, std::uint64_t seed);

/// Training-set loss of an MLP as a StochasticObjective; sample i is row
/// i - 1 of the dataset.
class MlpObjective final : public StochasticObjective {
 public:
  MlpObjective(MlpModel model, std::shared_ptr<const LabeledDataset> dataset);

  std::size_t sample_count() const override { return dataset_->size(); }
  std::size_t dimension() const override { return model_.parameter_count(); }

  const MlpModel& model() const noexcept { return model_; }
  const LabeledDataset& dataset() const noexcept { return *dataset_; }

 protected:
  double accumulate_sample(std::size_t index, const ParamVector& x,
                           ParamVector& gradient) const override;
  double sample_loss(std::size_t index, const ParamVector& x) const override;
  LossAndGradient batch_loss_and_gradient(const ParamVector& x,
                                          std::span<const std::size_t> indices) const override;
  double batch_loss(const ParamVector& x, std::span<const std::size_t> indices) const override;

 private:
  Matrix gather(std::span<const std::size_t> indices) const;
  std::vector<int> gather_labels(std::span<const std::size_t> indices) const;

  MlpModel model_;
  std::shared_ptr<const LabeledDataset> dataset_;
};

struct DatasetScore {
  double mean_loss = 0.0;
  double accuracy = 0.0;
};

/// Mean cross-entropy and top-1 accuracy over a whole dataset.
DatasetScore score_dataset(const MlpModel& model, const ParamVector& params,
                           const LabeledDataset& dataset);

}  // namespace sgdg2
