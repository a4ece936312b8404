#include "sgdg2/optimizer.hpp"

#include <cmath>
#include <string>

#include "sgdg2/error.hpp"

namespace sgdg2 {

namespace {

void require_same_size(const ParamVector& a, const ParamVector& b, const char* what) {
  if (a.size() != b.size()) {
    throw Error(ErrorCode::dimension_mismatch,
                std::string(what) + ": sizes " + std::to_string(a.size()) + " and " +
                    std::to_string(b.size()));
  }
}

void require_positive_rate(double h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw Error(ErrorCode::invalid_argument, "learning rate must be finite and > 0");
  }
}

}  // namespace

std::string_view to_string(OptimizerKind kind) noexcept {
  switch (kind) {
    case OptimizerKind::sgd: return "sgd";
    case OptimizerKind::sgd_g2: return "sgd-g2";
  }
  return "unknown";
}

std::optional<OptimizerKind> parse_optimizer_kind(std::string_view text) noexcept {
  if (text == "sgd") return OptimizerKind::sgd;
  if (text == "sgd-g2" || text == "sgdg2") return OptimizerKind::sgd_g2;
  return std::nullopt;
}

std::string_view to_string(Branch branch) noexcept {
  switch (branch) {
    case Branch::increase: return "INCREASE";
    case Branch::decrease: return "DECREASE";
    case Branch::negative_p: return "NEGATIVE_P";
    case Branch::critical_point: return "CRITICAL_POINT";
  }
  return "UNKNOWN";
}

OptimizerState OptimizerState::initial(double h0, double beta) {
  require_positive_rate(h0);
  if (!(beta > 0.0 && beta < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "beta must lie in (0, 1)");
  }
  return OptimizerState{h0, beta, 0, 0};
}

namespace {

// h_opt from the gradient change over a probe step of length h_probe along
// -g; branches compare against the current rate h.
RateEstimate rate_from_change(const ParamVector& g, const ParamVector& change, double h_probe,
                              double h, double tolerance) {
  const double change_sq = change.squaredNorm();
  RateEstimate estimate;
  estimate.p = change.dot(g);

  if (change_sq <= tolerance * tolerance * (1.0 + g.squaredNorm())) {
    estimate.h_opt = h;
    estimate.branch = Branch::critical_point;
    return estimate;
  }
  if (estimate.p > 0.0) {
    estimate.h_opt = 2.0 * h_probe * estimate.p / change_sq;
    estimate.branch = estimate.h_opt >= h ? Branch::increase : Branch::decrease;
    return estimate;
  }
  estimate.h_opt = h;
  estimate.branch = Branch::negative_p;
  return estimate;
}

}  // namespace

RateEstimate compute_h_opt(const ParamVector& g, const ParamVector& g_tilde, double h,
                           double tolerance) {
  require_same_size(g, g_tilde, "compute_h_opt");
  require_positive_rate(h);
  if (!(tolerance >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "tolerance must be >= 0");
  }
  return rate_from_change(g, g - g_tilde, h, h, tolerance);
}

double update_learning_rate(double h, double h_opt, double beta) {
  require_positive_rate(h);
  require_positive_rate(h_opt);
  if (!(beta > 0.0 && beta < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "beta must lie in (0, 1)");
  }
  if (h_opt >= h) {
    // beta h + (1 - beta) h_opt, written so that h_opt == h returns h exactly.
    return h + (1.0 - beta) * (h_opt - h);
  }
  return (1.0 - beta) * h_opt;
}

ParamVector sgd_step(const ParamVector& x, double h, const ParamVector& g) {
  require_same_size(x, g, "sgd_step");
  return x - h * g;
}

HeunStep heun_step(const StochasticObjective& objective, const ParamVector& x, double h,
                   const MiniBatch& batch) {
  require_positive_rate(h);
  const ParamVector g = sample_gradient(objective, x, batch);
  HeunStep step;
  step.predictor = x - h * g;
  const ParamVector g_tilde = sample_gradient(objective, step.predictor, batch);
  step.next = x - 0.5 * h * (g + g_tilde);
  if (!step.next.allFinite()) {
    throw Error(ErrorCode::numeric_overflow, "non-finite Heun step");
  }
  return step;
}

SgdG2Step sgdg2_step(const OptimizerState& state, const StochasticObjective& objective,
                     const ParamVector& x, const MiniBatch& batch, double tolerance) {
  if (!(tolerance >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "tolerance must be >= 0");
  }
  const LossAndGradient at_x = objective.evaluate(x, batch);
  const ParamVector& g = at_x.gradient;
  const ParamVector probe = x - state.h * g;
  const ParamVector change = objective.gradient_change(x, g, probe, batch);

  // Rounding in x - h g perturbs the realized probe step; measure it as
  // <x - probe, g> / |g|^2 so h_opt refers to the step actually taken.
  const double g_sq = g.squaredNorm();
  const double realized = g_sq > 0.0 ? (x - probe).dot(g) / g_sq : state.h;
  const double h_probe = realized > 0.0 ? realized : state.h;
  const RateEstimate estimate = rate_from_change(g, change, h_probe, state.h, tolerance);
  const double h_next = update_learning_rate(state.h, estimate.h_opt, state.beta);

  SgdG2Step step;
  step.x_next = x - h_next * at_x.gradient;
  if (!step.x_next.allFinite()) {
    throw Error(ErrorCode::numeric_overflow, "non-finite parameters after SGD-G2 step");
  }
  step.state = state;
  step.state.h = h_next;
  step.state.iteration += 1;
  step.state.grad_evals += 2;
  step.report.g = at_x.gradient;
  step.report.g_tilde = g - change;
  step.report.p = estimate.p;
  step.report.h_opt = estimate.h_opt;
  step.report.h_next = h_next;
  step.report.branch = estimate.branch;
  step.report.loss = at_x.loss;
  return step;
}

SgdStep plain_sgd_step(const OptimizerState& state, const StochasticObjective& objective,
                       const ParamVector& x, const MiniBatch& batch) {
  const LossAndGradient at_x = objective.evaluate(x, batch);
  SgdStep step;
  step.x_next = sgd_step(x, state.h, at_x.gradient);
  if (!step.x_next.allFinite()) {
    throw Error(ErrorCode::numeric_overflow, "non-finite parameters after SGD step");
  }
  step.state = state;
  step.state.iteration += 1;
  step.state.grad_evals += 1;
  step.loss = at_x.loss;
  return step;
}

}  // namespace sgdg2
