#pragma once

#include <span>
#include <vector>

#include "sgdg2/quadratic.hpp"

namespace sgdg2 {

// Order-of-convergence checks on quadratic problems. Everything here is
// deterministic: one-step moments come from exact enumeration over the
// sample index, reference trajectories from the exact matrix exponential.

/// Largest N for which one-step moments are enumerated.
inline constexpr std::size_t kMaxEnumerationSamples = 64;

enum class MomentScheme { sgd, sh };

/// Reference expansion to compare one-step moments against.
enum class MomentReference {
  /// Limiting SDE: E[D] = -h g + h^2/2 H g, E[D D^T] = h^2 (g g^T + V).
  sde,
  /// SH expansion with the opposite sign on the first-moment h^2 term:
  /// E[D] = -h g - h^2/2 H g, E[D D^T] = h^2 (1/N) sum_l g_l g_l^T.
  sh_printed,
};

struct OneStepMoments {
  ParamVector first;
  Matrix second;
};

/// E[D] and E[D D^T] of one step from x with a sample drawn uniformly from
/// [1..N], computed by summing over all N samples.
OneStepMoments exact_one_step_moments(const QuadraticProblem& problem, const ParamVector& x,
                                      double h, MomentScheme scheme);

/// Second-order-in-h moment expansion with exact derivatives.
OneStepMoments analytic_moment_expansion(const QuadraticProblem& problem, const ParamVector& x,
                                         double h, MomentReference reference);

struct OrderPoint {
  double h = 0.0;
  double error = 0.0;
  /// Unstable points are reported but never fitted.
  bool stable = true;
};

enum class FitStatus { fitted, exact_match };

/// Least-squares slope of log(error) against log(h).
struct OrderFit {
  std::vector<OrderPoint> points;
  FitStatus status = FitStatus::fitted;
  double slope = 0.0;
  double correlation = 0.0;
};

/// Relative residual below which a point counts as an exact match.
inline constexpr double kExactMatchTolerance = 1e-12;

/// Fits the stable points. Requires >= 4 of them with h_max / h_min >= 4.
/// `scales` (optional, one per point) turns the exact-match test relative:
/// error <= kExactMatchTolerance * scale for every point yields exact_match.
OrderFit fit_order(std::vector<OrderPoint> points, std::span<const double> scales = {});

struct MomentReport {
  std::vector<double> step_sizes;
  std::vector<OneStepMoments> empirical;
  std::vector<OneStepMoments> analytic;
  OrderFit first_moment;   // residual |E1_emp - E1_ref|
  OrderFit second_moment;  // residual |E2_emp - E2_ref|_F
};

/// h_list must be strictly decreasing with at least 4 entries.
MomentReport moment_residual_scan(const QuadraticProblem& problem, const ParamVector& x,
                                  MomentScheme scheme, std::span<const double> h_list,
                                  MomentReference reference = MomentReference::sde);

enum class OdeScheme { euler, heun };

/// X_opt + exp(-A t) (x0 - X_opt) for the mean quadratic, via the symmetric
/// eigendecomposition of A.
ParamVector exact_gradient_flow(const QuadraticProblem& problem, const ParamVector& x0, double t);

/// Integrates x' = -grad f(x) with the full gradient; T / h must be an integer.
ParamVector integrate_gradient_flow(const QuadraticProblem& problem, OdeScheme scheme,
                                    const ParamVector& x0, double t_end, double h);

/// Global error at t_end for every h; points with h lambda_max >= 2 are
/// flagged unstable and excluded from the fit.
OrderFit ode_global_error(const QuadraticProblem& problem, OdeScheme scheme,
                          const ParamVector& x0, double t_end, std::span<const double> h_list);

/// {2^-first, ..., 2^-last}.
std::vector<double> dyadic_steps(int first_exponent, int last_exponent);

}  // namespace sgdg2
