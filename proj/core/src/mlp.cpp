#include "sgdg2/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "sgdg2/error.hpp"

namespace sgdg2 {

namespace {

using ConstMatrixMap = Eigen::Map<const Matrix>;
using ConstVectorMap = Eigen::Map<const Eigen::VectorXd>;
using MatrixMap = Eigen::Map<Matrix>;
using VectorMap = Eigen::Map<Eigen::VectorXd>;

const double kLossCap = -std::log(kProbabilityFloor);

/// Column-wise log-softmax.
Matrix log_softmax_columns(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index j = 0; j < logits.cols(); ++j) {
    const double peak = logits.col(j).maxCoeff();
    const double lse = peak + std::log((logits.col(j).array() - peak).exp().sum());
    out.col(j) = logits.col(j).array() - lse;
  }
  return out;
}

constexpr std::size_t kScoreChunk = 1024;

}  // namespace

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::ArrayXd shifted = (logits.array() - logits.maxCoeff()).exp();
  return shifted / shifted.sum();
}

MlpModel::MlpModel(std::vector<std::size_t> layer_dims) : dims_(std::move(layer_dims)) {
  if (dims_.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "MLP needs at least input and output layers");
  }
  if (std::any_of(dims_.begin(), dims_.end(), [](std::size_t d) { return d == 0; })) {
    throw Error(ErrorCode::invalid_argument, "layer widths must be positive");
  }
  offsets_.push_back(0);
  for (std::size_t l = 0; l + 1 < dims_.size(); ++l) {
    offsets_.push_back(offsets_.back() + dims_[l] * dims_[l + 1] + dims_[l + 1]);
  }
}

void MlpModel::check_params(const ParamVector& params) const {
  if (static_cast<std::size_t>(params.size()) != parameter_count()) {
    throw Error(ErrorCode::dimension_mismatch,
                "MLP expects " + std::to_string(parameter_count()) + " parameters, got " +
                    std::to_string(params.size()));
  }
}

std::vector<Matrix> MlpModel::pre_activations(const ParamVector& params,
                                              const Matrix& inputs) const {
  check_params(params);
  if (static_cast<std::size_t>(inputs.rows()) != input_dim()) {
    throw Error(ErrorCode::dimension_mismatch, "input has " + std::to_string(inputs.rows()) +
                                                   " features, model expects " +
                                                   std::to_string(input_dim()));
  }
  std::vector<Matrix> z;
  z.reserve(layer_count());
  Matrix activation = inputs;
  for (std::size_t l = 0; l < layer_count(); ++l) {
    const auto in = static_cast<Eigen::Index>(dims_[l]);
    const auto out = static_cast<Eigen::Index>(dims_[l + 1]);
    const ConstMatrixMap w(params.data() + offsets_[l], out, in);
    const ConstVectorMap b(params.data() + offsets_[l] + out * in, out);
    Matrix pre = w * activation;
    pre.colwise() += b;
    if (l + 1 < layer_count()) activation = pre.cwiseMax(0.0);
    z.push_back(std::move(pre));
  }
  return z;
}

Matrix MlpModel::logits(const ParamVector& params, const Matrix& inputs) const {
  return pre_activations(params, inputs).back();
}

Eigen::VectorXd MlpModel::forward(const ParamVector& params, const Eigen::VectorXd& input) const {
  const Matrix z = logits(params, input);
  return softmax(z.col(0));
}

double MlpModel::accumulate_batch(const ParamVector& params, const Matrix& inputs,
                                  std::span<const int> labels, ParamVector& gradient_sum) const {
  const std::vector<Matrix> z = pre_activations(params, inputs);
  const Eigen::Index batch = inputs.cols();
  if (static_cast<std::size_t>(batch) != labels.size()) {
    throw Error(ErrorCode::dimension_mismatch, "inputs and labels differ in count");
  }
  if (gradient_sum.size() != params.size()) {
    throw Error(ErrorCode::dimension_mismatch, "gradient buffer has the wrong size");
  }

  const Matrix log_p = log_softmax_columns(z.back());
  // d loss / d logits = softmax - onehot, zeroed where the probability floor
  // is active (the clamped loss is flat there).
  Matrix delta = log_p.array().exp().matrix();
  double loss = 0.0;
  for (Eigen::Index j = 0; j < batch; ++j) {
    const int label = labels[static_cast<std::size_t>(j)];
    if (label < 0 || static_cast<std::size_t>(label) >= output_dim()) {
      throw Error(ErrorCode::invalid_argument, "label outside model output range");
    }
    const double sample_loss = -log_p(label, j);
    if (sample_loss >= kLossCap) {
      loss += kLossCap;
      delta.col(j).setZero();
    } else {
      loss += sample_loss;
      delta(label, j) -= 1.0;
    }
  }

  for (std::size_t l = layer_count(); l-- > 0;) {
    const auto in = static_cast<Eigen::Index>(dims_[l]);
    const auto out = static_cast<Eigen::Index>(dims_[l + 1]);
    MatrixMap grad_w(gradient_sum.data() + offsets_[l], out, in);
    VectorMap grad_b(gradient_sum.data() + offsets_[l] + out * in, out);
    if (l == 0) {
      grad_w.noalias() += delta * inputs.transpose();
    } else {
      grad_w.noalias() += delta * z[l - 1].cwiseMax(0.0).transpose();
    }
    grad_b += delta.rowwise().sum();
    if (l > 0) {
      const ConstMatrixMap w(params.data() + offsets_[l], out, in);
      Matrix back = w.transpose() * delta;
      delta = (z[l - 1].array() > 0.0).select(back.array(), 0.0).matrix();
    }
  }
  return loss;
}

LossAndGradient MlpModel::loss_and_gradient(const ParamVector& params,
                                            const Eigen::VectorXd& input, int label) const {
  LossAndGradient result{0.0, ParamVector::Zero(params.size())};
  const int labels[] = {label};
  result.loss = accumulate_batch(params, input, labels, result.gradient);
  return result;
}

ParamVector init_weights(std::span<const std::size_t> layer_dims, std::uint64_t seed) {
  const MlpModel shape(std::vector<std::size_t>(layer_dims.begin(), layer_dims.end()));
  ParamVector params = ParamVector::Zero(static_cast<Eigen::Index>(shape.parameter_count()));
  std::mt19937_64 rng(seed);
  for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
    const double fan_in = static_cast<double>(layer_dims[l]);
    const double fan_out = static_cast<double>(layer_dims[l + 1]);
    const double bound = std::sqrt(6.0 / (fan_in + fan_out));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    const std::size_t begin = shape.weight_offset(l);
    const std::size_t count = layer_dims[l] * layer_dims[l + 1];
    for (std::size_t i = 0; i < count; ++i) {
      params(static_cast<Eigen::Index>(begin + i)) = uniform(rng);
    }
  }
  return params;
}

MlpObjective::MlpObjective(MlpModel model, std::shared_ptr<const LabeledDataset> dataset)
    : model_(std::move(model)), dataset_(std::move(dataset)) {
  if (!dataset_ || dataset_->size() == 0) {
    throw Error(ErrorCode::invalid_argument, "MLP objective needs a non-empty dataset");
  }
  if (dataset_->input_dim() != model_.input_dim()) {
    throw Error(ErrorCode::dimension_mismatch, "dataset and model input widths differ");
  }
  if (static_cast<std::size_t>(dataset_->class_count) > model_.output_dim()) {
    throw Error(ErrorCode::dimension_mismatch, "model has fewer outputs than classes");
  }
}

Matrix MlpObjective::gather(std::span<const std::size_t> indices) const {
  Matrix inputs(static_cast<Eigen::Index>(model_.input_dim()),
                static_cast<Eigen::Index>(indices.size()));
  for (std::size_t j = 0; j < indices.size(); ++j) {
    inputs.col(static_cast<Eigen::Index>(j)) =
        dataset_->features.row(static_cast<Eigen::Index>(indices[j] - 1)).transpose();
  }
  return inputs;
}

std::vector<int> MlpObjective::gather_labels(std::span<const std::size_t> indices) const {
  std::vector<int> labels(indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) labels[j] = dataset_->labels[indices[j] - 1];
  return labels;
}

double MlpObjective::accumulate_sample(std::size_t index, const ParamVector& x,
                                       ParamVector& gradient) const {
  const std::size_t one[] = {index};
  return model_.accumulate_batch(x, gather(one), gather_labels(one), gradient);
}

double MlpObjective::sample_loss(std::size_t index, const ParamVector& x) const {
  const std::size_t one[] = {index};
  return batch_loss(x, one);
}

LossAndGradient MlpObjective::batch_loss_and_gradient(
    const ParamVector& x, std::span<const std::size_t> indices) const {
  LossAndGradient result{0.0, ParamVector::Zero(x.size())};
  result.loss = model_.accumulate_batch(x, gather(indices), gather_labels(indices),
                                        result.gradient);
  const double scale = 1.0 / static_cast<double>(indices.size());
  result.loss *= scale;
  result.gradient *= scale;
  return result;
}

double MlpObjective::batch_loss(const ParamVector& x, std::span<const std::size_t> indices) const {
  const Matrix log_p = log_softmax_columns(model_.logits(x, gather(indices)));
  double total = 0.0;
  for (std::size_t j = 0; j < indices.size(); ++j) {
    const int label = dataset_->labels[indices[j] - 1];
    total += std::min(-log_p(label, static_cast<Eigen::Index>(j)), kLossCap);
  }
  return total / static_cast<double>(indices.size());
}

DatasetScore score_dataset(const MlpModel& model, const ParamVector& params,
                           const LabeledDataset& dataset) {
  DatasetScore score;
  const std::size_t n = dataset.size();
  if (n == 0) return score;
  std::size_t correct = 0;
  double loss = 0.0;
  for (std::size_t begin = 0; begin < n; begin += kScoreChunk) {
    const std::size_t count = std::min(kScoreChunk, n - begin);
    const Matrix inputs =
        dataset.features
            .middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(count))
            .transpose();
    const Matrix log_p = log_softmax_columns(model.logits(params, inputs));
    for (std::size_t j = 0; j < count; ++j) {
      const auto col = static_cast<Eigen::Index>(j);
      const int label = dataset.labels[begin + j];
      Eigen::Index predicted = 0;
      log_p.col(col).maxCoeff(&predicted);
      if (predicted == label) ++correct;
      loss += std::min(-log_p(label, col), kLossCap);
    }
  }
  score.mean_loss = loss / static_cast<double>(n);
  score.accuracy = static_cast<double>(correct) / static_cast<double>(n);
  return score;
}

}  // namespace sgdg2
