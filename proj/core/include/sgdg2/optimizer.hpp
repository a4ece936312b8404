#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "sgdg2/objective.hpp"

namespace sgdg2 {

inline constexpr double kDefaultBeta = 0.9;
inline constexpr double kDefaultInitialRate = 1e-6;
/// Relative guard on |g - g~|: the pair is treated as equal when
/// |g - g~|^2 <= tol^2 (1 + |g|^2).
inline constexpr double kDefaultCriticalTolerance = 1e-12;

enum class OptimizerKind { sgd, sgd_g2 };

std::string_view to_string(OptimizerKind kind) noexcept;
std::optional<OptimizerKind> parse_optimizer_kind(std::string_view text) noexcept;

/// Which arm of the rate controller fired on a step.
enum class Branch {
  increase,        // p > 0, h_opt >= h: blend towards h_opt
  decrease,        // p > 0, h_opt < h: drop to (1 - beta) h_opt
  negative_p,      // p <= 0: local quadratic model rejected, h_opt = h
  critical_point,  // g ~= g~: no curvature information, h_opt = h
};

std::string_view to_string(Branch branch) noexcept;

struct OptimizerState {
  double h = kDefaultInitialRate;
  double beta = kDefaultBeta;
  std::uint64_t iteration = 0;
  /// Mini-batch gradient evaluations so far: +1 per SGD step, +2 per SGD-G2 step.
  std::uint64_t grad_evals = 0;

  /// Validated starting state (h0 > 0, beta in (0, 1)).
  static OptimizerState initial(double h0, double beta = kDefaultBeta);
};

struct RateEstimate {
  double h_opt = 0.0;
  Branch branch = Branch::critical_point;
  /// <g - g~, g>
  double p = 0.0;
};

/// Largest step that keeps the gradient norm from growing, estimated from
/// the gradient g at x and g~ at x - h g (same samples).
RateEstimate compute_h_opt(const ParamVector& g, const ParamVector& g_tilde, double h,
                           double tolerance = kDefaultCriticalTolerance);

/// Gradual increase towards h_opt, or a drastic cut to (1 - beta) h_opt.
double update_learning_rate(double h, double h_opt, double beta);

/// x - h g.
ParamVector sgd_step(const ParamVector& x, double h, const ParamVector& g);

struct HeunStep {
  ParamVector predictor;
  ParamVector next;
};

/// One stochastic Heun step; both gradients use the same mini-batch.
HeunStep heun_step(const StochasticObjective& objective, const ParamVector& x, double h,
                   const MiniBatch& batch);

struct StepReport {
  ParamVector g;
  ParamVector g_tilde;
  double p = 0.0;
  double h_opt = 0.0;
  double h_next = 0.0;
  Branch branch = Branch::critical_point;
  /// Mini-batch loss at the starting point.
  double loss = 0.0;
};

struct SgdG2Step {
  ParamVector x_next;
  OptimizerState state;
  StepReport report;
};

/// One SGD-G2 iteration. The parameter update applies the new rate h_{n+1}
/// to the gradient g_n taken at the old point.
SgdG2Step sgdg2_step(const OptimizerState& state, const StochasticObjective& objective,
                     const ParamVector& x, const MiniBatch& batch,
                     double tolerance = kDefaultCriticalTolerance);

struct SgdStep {
  ParamVector x_next;
  OptimizerState state;
  double loss = 0.0;
};

/// Fixed-rate SGD iteration on a mini-batch.
SgdStep plain_sgd_step(const OptimizerState& state, const StochasticObjective& objective,
                       const ParamVector& x, const MiniBatch& batch);

}  // namespace sgdg2
