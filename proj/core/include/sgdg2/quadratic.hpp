#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "sgdg2/objective.hpp"

namespace sgdg2 {

/// f_i(x) = 1/2 <A_i x, x> - <b_i, x>, with symmetric A_i.
///
/// Gradients are exact (A_i x - b_i), so this is the reference problem for
/// every order-of-convergence check.
class QuadraticProblem final : public StochasticObjective {
 public:
  QuadraticProblem(std::vector<Matrix> matrices, std::vector<ParamVector> vectors);

  /// One-dimensional problem with f_i(x) = a_i x^2 / 2 - b_i x. Empty
  /// `offsets` means b_i = 0.
  static QuadraticProblem scalar(const std::vector<double>& curvatures,
                                 const std::vector<double>& offsets = {});

  std::size_t sample_count() const override { return matrices_.size(); }
  std::size_t dimension() const override { return static_cast<std::size_t>(mean_matrix_.rows()); }

  /// 1-based accessors.
  const Matrix& sample_matrix(std::size_t index) const { return matrices_.at(index - 1); }
  const ParamVector& sample_vector(std::size_t index) const { return vectors_.at(index - 1); }

  const Matrix& mean_matrix() const noexcept { return mean_matrix_; }
  const ParamVector& mean_vector() const noexcept { return mean_vector_; }

  /// True when the mean matrix admits a Cholesky factorization.
  bool is_convex() const;

 protected:
  double accumulate_sample(std::size_t index, const ParamVector& x,
                           ParamVector& gradient) const override;
  double sample_loss(std::size_t index, const ParamVector& x) const override;
  ParamVector batch_gradient_change(const ParamVector& x, const ParamVector& g_x,
                                    const ParamVector& y,
                                    std::span<const std::size_t> indices) const override;

 private:
  std::vector<Matrix> matrices_;
  std::vector<ParamVector> vectors_;
  Matrix mean_matrix_;
  ParamVector mean_vector_;
};

/// Solves A x = b for the mean matrix and vector. Throws singular_system when
/// A is not invertible or the residual exceeds 1e-10 (1 + |b|).
ParamVector quadratic_minimizer(const QuadraticProblem& problem);

struct RandomQuadraticOptions {
  std::size_t dimension = 2;
  std::size_t samples = 4;
  /// Eigenvalues of the mean matrix are drawn uniformly in this range.
  double min_eigenvalue = 0.1;
  double max_eigenvalue = 1.0;
  /// Scale of the zero-mean per-sample perturbation of A_i and b_i.
  double spread = 0.5;
  /// Scale of the mean vector b.
  double offset_scale = 1.0;
};

/// Random problem whose mean matrix is SPD with spectrum inside
/// [min_eigenvalue, max_eigenvalue]. Per-sample perturbations sum to zero so
/// the mean matrix and vector are exactly the drawn ones.
QuadraticProblem make_random_quadratic(const RandomQuadraticOptions& options, std::mt19937_64& rng);

/// Random SPD matrix with eigenvalues uniform in [lo, hi].
Matrix random_spd_matrix(std::size_t dimension, double lo, double hi, std::mt19937_64& rng);

}  // namespace sgdg2
