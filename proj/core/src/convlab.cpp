#include "sgdg2/convlab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "sgdg2/error.hpp"

namespace sgdg2 {

namespace {

void check_step_list(std::span<const double> h_list) {
  if (h_list.size() < 4) {
    throw Error(ErrorCode::invalid_argument, "need at least 4 step sizes, got " +
                                                 std::to_string(h_list.size()));
  }
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    if (!(h_list[i] > 0.0)) throw Error(ErrorCode::invalid_argument, "step sizes must be > 0");
    if (i > 0 && !(h_list[i] < h_list[i - 1])) {
      throw Error(ErrorCode::invalid_argument, "step sizes must be strictly decreasing");
    }
  }
}

ParamVector one_step_displacement(const QuadraticProblem& problem, std::size_t sample,
                                  const ParamVector& x, double h, MomentScheme scheme) {
  const MiniBatch batch({sample});
  if (scheme == MomentScheme::sgd) {
    return -h * sample_gradient(problem, x, batch);
  }
  const ParamVector g = sample_gradient(problem, x, batch);
  const ParamVector g_tilde = sample_gradient(problem, x - h * g, batch);
  return -0.5 * h * (g + g_tilde);
}

}  // namespace

OneStepMoments exact_one_step_moments(const QuadraticProblem& problem, const ParamVector& x,
                                      double h, MomentScheme scheme) {
  const std::size_t n = problem.sample_count();
  if (n > kMaxEnumerationSamples) {
    throw Error(ErrorCode::enumeration_limit,
                std::to_string(n) + " samples exceeds the enumeration limit of " +
                    std::to_string(kMaxEnumerationSamples));
  }
  const auto d = static_cast<Eigen::Index>(problem.dimension());
  OneStepMoments moments{ParamVector::Zero(d), Matrix::Zero(d, d)};
  for (std::size_t sample = 1; sample <= n; ++sample) {
    const ParamVector delta = one_step_displacement(problem, sample, x, h, scheme);
    moments.first += delta;
    moments.second.noalias() += delta * delta.transpose();
  }
  moments.first /= static_cast<double>(n);
  moments.second /= static_cast<double>(n);
  return moments;
}

OneStepMoments analytic_moment_expansion(const QuadraticProblem& problem, const ParamVector& x,
                                         double h, MomentReference reference) {
  const ParamVector g = full_gradient(problem, x);
  // sum_k d_k f d^2_kj f = (H g)_j; the Hessian of a quadratic is its mean matrix.
  const ParamVector curvature_term = problem.mean_matrix() * g;
  OneStepMoments moments;
  if (reference == MomentReference::sde) {
    moments.first = -h * g + 0.5 * h * h * curvature_term;
    moments.second = h * h * (g * g.transpose() + noise_covariance(problem, x));
  } else {
    moments.first = -h * g - 0.5 * h * h * curvature_term;
    const auto d = static_cast<Eigen::Index>(problem.dimension());
    Matrix raw = Matrix::Zero(d, d);
    for (std::size_t l = 1; l <= problem.sample_count(); ++l) {
      const ParamVector gl = sample_gradient(problem, x, MiniBatch({l}));
      raw.noalias() += gl * gl.transpose();
    }
    moments.second = h * h * raw / static_cast<double>(problem.sample_count());
  }
  return moments;
}

OrderFit fit_order(std::vector<OrderPoint> points, std::span<const double> scales) {
  if (!scales.empty() && scales.size() != points.size()) {
    throw Error(ErrorCode::dimension_mismatch, "one scale per point expected");
  }
  OrderFit fit;
  std::vector<double> log_h;
  std::vector<double> log_e;
  bool all_exact = true;
  double h_max = 0.0;
  double h_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < points.size(); ++i) {
    const OrderPoint& point = points[i];
    if (!point.stable) continue;
    h_max = std::max(h_max, point.h);
    h_min = std::min(h_min, point.h);
    const double scale = scales.empty() ? 1.0 : scales[i];
    if (!(point.error <= kExactMatchTolerance * scale)) all_exact = false;
    if (point.error > 0.0) {
      log_h.push_back(std::log(point.h));
      log_e.push_back(std::log(point.error));
    }
  }
  const std::size_t stable = static_cast<std::size_t>(
      std::count_if(points.begin(), points.end(), [](const OrderPoint& p) { return p.stable; }));
  if (stable < 4) {
    throw Error(ErrorCode::invalid_argument,
                "order fit needs at least 4 stable step sizes, got " + std::to_string(stable));
  }
  if (h_max < 4.0 * h_min) {
    throw Error(ErrorCode::invalid_argument, "step sizes must span at least two octaves");
  }
  fit.points = std::move(points);
  if (all_exact) {
    fit.status = FitStatus::exact_match;
    return fit;
  }
  if (log_h.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "too few non-zero residuals to fit a slope");
  }

  const double count = static_cast<double>(log_h.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (std::size_t i = 0; i < log_h.size(); ++i) {
    mean_x += log_h[i];
    mean_y += log_e[i];
  }
  mean_x /= count;
  mean_y /= count;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < log_h.size(); ++i) {
    const double dx = log_h[i] - mean_x;
    const double dy = log_e[i] - mean_y;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  fit.slope = sxy / sxx;
  fit.correlation = syy > 0.0 ? sxy / std::sqrt(sxx * syy) : 1.0;
  return fit;
}

MomentReport moment_residual_scan(const QuadraticProblem& problem, const ParamVector& x,
                                  MomentScheme scheme, std::span<const double> h_list,
                                  MomentReference reference) {
  check_step_list(h_list);
  MomentReport report;
  std::vector<OrderPoint> first_points;
  std::vector<OrderPoint> second_points;
  std::vector<double> first_scales;
  std::vector<double> second_scales;
  for (const double h : h_list) {
    OneStepMoments empirical = exact_one_step_moments(problem, x, h, scheme);
    OneStepMoments analytic = analytic_moment_expansion(problem, x, h, reference);
    first_points.push_back({h, (empirical.first - analytic.first).norm(), true});
    second_points.push_back({h, (empirical.second - analytic.second).norm(), true});
    first_scales.push_back(std::max(empirical.first.norm(), analytic.first.norm()));
    second_scales.push_back(std::max(empirical.second.norm(), analytic.second.norm()));
    report.step_sizes.push_back(h);
    report.empirical.push_back(std::move(empirical));
    report.analytic.push_back(std::move(analytic));
  }
  report.first_moment = fit_order(std::move(first_points), first_scales);
  report.second_moment = fit_order(std::move(second_points), second_scales);
  return report;
}

ParamVector exact_gradient_flow(const QuadraticProblem& problem, const ParamVector& x0,
                                double t) {
  const ParamVector x_opt = quadratic_minimizer(problem);
  const Eigen::SelfAdjointEigenSolver<Matrix> eig(problem.mean_matrix());
  if (eig.info() != Eigen::Success) {
    throw Error(ErrorCode::singular_system, "eigendecomposition failed");
  }
  const Matrix& v = eig.eigenvectors();
  const ParamVector decay = (-t * eig.eigenvalues().array()).exp().matrix();
  return x_opt + v * decay.asDiagonal() * v.transpose() * (x0 - x_opt);
}

ParamVector integrate_gradient_flow(const QuadraticProblem& problem, OdeScheme scheme,
                                    const ParamVector& x0, double t_end, double h) {
  if (!(h > 0.0) || !(t_end >= 0.0)) {
    throw Error(ErrorCode::invalid_argument, "need h > 0 and t_end >= 0");
  }
  const double steps_real = t_end / h;
  const auto steps = static_cast<std::uint64_t>(std::llround(steps_real));
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * std::max(1.0, steps_real)) {
    throw Error(ErrorCode::invalid_argument, "t_end must be an integer multiple of h");
  }
  ParamVector x = x0;
  for (std::uint64_t n = 0; n < steps; ++n) {
    const ParamVector g = full_gradient(problem, x);
    if (scheme == OdeScheme::euler) {
      x -= h * g;
    } else {
      const ParamVector g_pred = full_gradient(problem, x - h * g);
      x -= 0.5 * h * (g + g_pred);
    }
  }
  return x;
}

OrderFit ode_global_error(const QuadraticProblem& problem, OdeScheme scheme,
                          const ParamVector& x0, double t_end, std::span<const double> h_list) {
  check_step_list(h_list);
  const double lambda_max =
      Eigen::SelfAdjointEigenSolver<Matrix>(problem.mean_matrix(), Eigen::EigenvaluesOnly)
          .eigenvalues()
          .maxCoeff();
  const ParamVector exact = exact_gradient_flow(problem, x0, t_end);
  std::vector<OrderPoint> points;
  for (const double h : h_list) {
    OrderPoint point{h, 0.0, h * lambda_max < 2.0};
    if (point.stable) {
      point.error = (integrate_gradient_flow(problem, scheme, x0, t_end, h) - exact).norm();
    } else {
      point.error = std::numeric_limits<double>::quiet_NaN();
    }
    points.push_back(point);
  }
  return fit_order(std::move(points));
}

std::vector<double> dyadic_steps(int first_exponent, int last_exponent) {
  if (first_exponent > last_exponent) {
    throw Error(ErrorCode::invalid_argument, "dyadic range is empty");
  }
  std::vector<double> steps;
  for (int k = first_exponent; k <= last_exponent; ++k) steps.push_back(std::ldexp(1.0, -k));
  return steps;
}

}  // namespace sgdg2
