#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "sgdg2/error.hpp"
#include "sgdg2/mlp.hpp"
#include "test_support.hpp"

namespace sgdg2 {
namespace {

using testing::relative_error;

// Independent forward pass: plain loops over the documented packing
// [W_1 (column-major, out x in), b_1, W_2, b_2, ...].
struct ReferenceForward {
  std::vector<std::vector<double>> pre;  // per layer pre-activations
  std::vector<double> probabilities;
};

ReferenceForward reference_forward(const std::vector<std::size_t>& dims, const ParamVector& params,
                                   const std::vector<double>& input) {
  ReferenceForward out;
  std::vector<double> activation = input;
  std::size_t offset = 0;
  for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
    const std::size_t in = dims[l];
    const std::size_t n_out = dims[l + 1];
    std::vector<double> z(n_out, 0.0);
    for (std::size_t o = 0; o < n_out; ++o) {
      double sum = params(static_cast<Eigen::Index>(offset + in * n_out + o));
      for (std::size_t i = 0; i < in; ++i) {
        sum += params(static_cast<Eigen::Index>(offset + i * n_out + o)) * activation[i];
      }
      z[o] = sum;
    }
    offset += in * n_out + n_out;
    out.pre.push_back(z);
    activation.assign(n_out, 0.0);
    for (std::size_t o = 0; o < n_out; ++o) activation[o] = z[o] > 0.0 ? z[o] : 0.0;
  }
  const std::vector<double>& logits = out.pre.back();
  double peak = logits[0];
  for (double v : logits) peak = std::max(peak, v);
  double total = 0.0;
  for (double v : logits) total += std::exp(v - peak);
  for (double v : logits) out.probabilities.push_back(std::exp(v - peak) / total);
  return out;
}

double reference_loss(const std::vector<std::size_t>& dims, const ParamVector& params,
                      const std::vector<double>& input, int label) {
  return -std::log(reference_forward(dims, params, input).probabilities[static_cast<std::size_t>(label)]);
}

Eigen::VectorXd as_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> random_input(std::size_t n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  std::vector<double> v(n);
  for (double& x : v) x = uniform(rng);
  return v;
}

TEST(MlpModel, ParameterCount) {
  const MlpModel mnist_sized({784, 256, 256, 256, 10});
  EXPECT_EQ(mnist_sized.parameter_count(),
            784u * 256 + 256 + 256u * 256 + 256 + 256u * 256 + 256 + 256u * 10 + 10);
  EXPECT_THROW(MlpModel({5}), Error);
  EXPECT_THROW(MlpModel({5, 0, 3}), Error);
}

TEST(MlpForward, ZeroParametersGiveUniformOutput) {
  const MlpModel model({6, 8, 10});
  const Eigen::VectorXd p =
      model.forward(ParamVector::Zero(static_cast<Eigen::Index>(model.parameter_count())),
                    Eigen::VectorXd::Constant(6, 0.4));
  for (Eigen::Index k = 0; k < 10; ++k) EXPECT_NEAR(p(k), 0.1, 1e-15);
}

TEST(MlpForward, LargeLogitSelectsItsClass) {
  const MlpModel model({4, 4});
  ParamVector params = ParamVector::Zero(static_cast<Eigen::Index>(model.parameter_count()));
  for (Eigen::Index k = 0; k < 4; ++k) params(k * 4 + k) = 50.0;  // W = 50 I
  for (Eigen::Index k = 0; k < 4; ++k) {
    Eigen::Index argmax = -1;
    model.forward(params, Eigen::VectorXd::Unit(4, k)).maxCoeff(&argmax);
    EXPECT_EQ(argmax, k);
  }
}

TEST(MlpForward, MatchesIndependentImplementation) {
  const std::vector<std::size_t> dims{12, 9, 7, 5};
  const MlpModel model(dims);
  ParamVector params = init_weights(dims, 42);
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal(0.0, 0.2);
  for (Eigen::Index i = 0; i < params.size(); ++i) params(i) += normal(rng);
  const auto input = random_input(12, rng);
  const auto expected = reference_forward(dims, params, input).probabilities;
  const Eigen::VectorXd actual = model.forward(params, as_eigen(input));
  EXPECT_NEAR(actual.sum(), 1.0, 1e-12);
  for (std::size_t k = 0; k < expected.size(); ++k) {
    EXPECT_NEAR(actual(static_cast<Eigen::Index>(k)), expected[k], 1e-14);
  }
}

TEST(MlpForward, DimensionMismatch) {
  const MlpModel model({3, 2});
  EXPECT_THROW(model.forward(ParamVector::Zero(8), Eigen::VectorXd::Zero(4)), Error);
  EXPECT_THROW(model.forward(ParamVector::Zero(7), Eigen::VectorXd::Zero(3)), Error);
}

TEST(MlpLoss, ZeroParametersGiveLogOfClassCount) {
  const MlpModel model({5, 7, 10});
  const auto result = model.loss_and_gradient(
      ParamVector::Zero(static_cast<Eigen::Index>(model.parameter_count())),
      Eigen::VectorXd::Constant(5, 0.5), 3);
  EXPECT_NEAR(result.loss, 2.302585093, 1e-9);
}

TEST(MlpLoss, ConfidentCorrectPredictionHasNearZeroLoss) {
  const MlpModel model({3, 3});
  ParamVector params = ParamVector::Zero(12);
  for (Eigen::Index k = 0; k < 3; ++k) params(k * 3 + k) = 200.0;
  const auto result = model.loss_and_gradient(params, Eigen::VectorXd::Unit(3, 1), 1);
  EXPECT_LT(result.loss, 1e-80);
  EXPECT_GE(result.loss, 0.0);
}

TEST(MlpLoss, ConfidentWrongPredictionIsClamped) {
  const MlpModel model({3, 3});
  ParamVector params = ParamVector::Zero(12);
  for (Eigen::Index k = 0; k < 3; ++k) params(k * 3 + k) = 1e4;
  const auto result = model.loss_and_gradient(params, Eigen::VectorXd::Unit(3, 0), 2);
  EXPECT_NEAR(result.loss, -std::log(kProbabilityFloor), 1e-12);
  EXPECT_TRUE(result.gradient.allFinite());
}

TEST(MlpProperty, LossIsNonNegative) {
  std::mt19937_64 rng(3);
  const std::vector<std::size_t> dims{6, 5, 4};
  const MlpModel model(dims);
  std::uniform_int_distribution<int> label(0, 3);
  for (int trial = 0; trial < 50; ++trial) {
    const ParamVector params = 3.0 * init_weights(dims, static_cast<std::uint64_t>(trial));
    EXPECT_GE(model.loss_and_gradient(params, as_eigen(random_input(6, rng)), label(rng)).loss, 0.0);
  }
}

TEST(MlpProperty, SoftmaxTranslationInvariance) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd logits(10);
    for (Eigen::Index i = 0; i < 10; ++i) logits(i) = normal(rng);
    const Eigen::VectorXd p = softmax(logits);
    const Eigen::VectorXd shifted = softmax((logits.array() + normal(rng) * 10.0).matrix());
    EXPECT_LE((p - shifted).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_NEAR(p.sum(), 1.0, 1e-12);
    EXPECT_GE(p.minCoeff(), 0.0);
    EXPECT_LE(p.maxCoeff(), 1.0);
  }
}

// Backprop against 5-point central differences of the independent
// reference loss, with ReLU pre-activations kept away from the kink.
TEST(MlpProperty, BackpropMatchesFiniteDifferences) {
  const std::vector<std::size_t> dims{8, 7, 6, 6, 4};
  const MlpModel model(dims);
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal(0.0, 0.3);
  std::uniform_int_distribution<int> label_dist(0, 3);
  int probes = 0;
  int rejected = 0;
  while (probes < 20) {
    ParamVector params = init_weights(dims, rng());
    for (Eigen::Index i = 0; i < params.size(); ++i) params(i) += 0.5 * normal(rng);
    const auto input = random_input(8, rng);
    const int label = label_dist(rng);
    const auto forward = reference_forward(dims, params, input);
    bool near_kink = false;
    for (std::size_t l = 0; l + 1 < forward.pre.size(); ++l) {
      for (double z : forward.pre[l]) near_kink |= std::abs(z) < 1e-3;
    }
    if (near_kink) {
      ++rejected;
      continue;
    }
    ++probes;
    const double eps = 1e-5;
    ParamVector numeric(params.size());
    for (Eigen::Index i = 0; i < params.size(); ++i) {
      auto at = [&](double delta) {
        ParamVector shifted = params;
        shifted(i) += delta;
        return reference_loss(dims, shifted, input, label);
      };
      numeric(i) = (-at(2 * eps) + 8 * at(eps) - 8 * at(-eps) + at(-2 * eps)) / (12 * eps);
    }
    const auto analytic = model.loss_and_gradient(params, as_eigen(input), label);
    EXPECT_NEAR(analytic.loss, reference_loss(dims, params, input, label), 1e-12);
    EXPECT_LE(relative_error(analytic.gradient, numeric), 1e-5) << "probe " << probes;
  }
  EXPECT_LT(rejected, 200);
}

TEST(InitWeights, DeterministicWithZeroBiases) {
  const std::vector<std::size_t> dims{5, 4, 3};
  const ParamVector a = init_weights(dims, 17);
  EXPECT_EQ(a, init_weights(dims, 17));
  EXPECT_NE(a, init_weights(dims, 18));
  const MlpModel model(dims);
  for (std::size_t l = 0; l < model.layer_count(); ++l) {
    const std::size_t bias = model.weight_offset(l) + dims[l] * dims[l + 1];
    for (std::size_t i = 0; i < dims[l + 1]; ++i) EXPECT_EQ(a(static_cast<Eigen::Index>(bias + i)), 0.0);
  }
}

TEST(InitWeights, UniformGlorotSpread) {
  const std::vector<std::size_t> dims{256, 256};
  const ParamVector params = init_weights(dims, 5);
  const auto weights = params.head(256 * 256);
  const double bound = std::sqrt(6.0 / 512.0);
  EXPECT_LE(weights.cwiseAbs().maxCoeff(), bound);
  const double mean = weights.mean();
  const double stdev = std::sqrt((weights.array() - mean).square().mean());
  EXPECT_NEAR(stdev, bound / std::sqrt(3.0), 0.2 * bound / std::sqrt(3.0));
}

std::shared_ptr<LabeledDataset> tiny_dataset(std::size_t n, std::size_t dim, int classes,
                                             std::mt19937_64& rng) {
  auto dataset = std::make_shared<LabeledDataset>();
  dataset->class_count = classes;
  dataset->features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(dim));
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (Eigen::Index i = 0; i < dataset->features.size(); ++i) dataset->features.data()[i] = uniform(rng);
  for (std::size_t i = 0; i < n; ++i) dataset->labels.push_back(static_cast<int>(i % static_cast<std::size_t>(classes)));
  return dataset;
}

TEST(MlpObjective, BatchedGradientIsMeanOfSampleGradients) {
  std::mt19937_64 rng(8);
  const std::vector<std::size_t> dims{5, 6, 3};
  const MlpObjective objective(MlpModel(dims), tiny_dataset(9, 5, 3, rng));
  for (int trial = 0; trial < 100; ++trial) {
    const ParamVector x = init_weights(dims, rng()) + testing::random_vector(
        static_cast<Eigen::Index>(objective.dimension()), rng, 0.1);
    ParamVector mean = ParamVector::Zero(x.size());
    for (std::size_t k = 1; k <= 9; ++k) mean += sample_gradient(objective, x, MiniBatch({k}));
    mean /= 9.0;
    EXPECT_LE(relative_error(full_gradient(objective, x), mean), 1e-12);
  }
}

TEST(MlpObjective, LossAgreesWithGradientPath) {
  std::mt19937_64 rng(9);
  const std::vector<std::size_t> dims{4, 3};
  const MlpObjective objective(MlpModel(dims), tiny_dataset(6, 4, 3, rng));
  const ParamVector x = init_weights(dims, 1);
  const MiniBatch batch({2, 5, 6});
  EXPECT_NEAR(objective.loss(x, batch), objective.evaluate(x, batch).loss, 1e-14);
  const DatasetScore score = score_dataset(objective.model(), x, objective.dataset());
  EXPECT_NEAR(score.mean_loss, full_loss(objective, x), 1e-14);
}

TEST(MlpObjective, RejectsMismatchedDataset) {
  std::mt19937_64 rng(10);
  EXPECT_THROW(MlpObjective(MlpModel({3, 2}), tiny_dataset(4, 4, 2, rng)), Error);
  EXPECT_THROW(MlpObjective(MlpModel({4, 2}), tiny_dataset(4, 4, 3, rng)), Error);
}

}  // namespace
}  // namespace sgdg2
