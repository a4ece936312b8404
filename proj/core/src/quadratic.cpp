#include "sgdg2/quadratic.hpp"

#include <string>

#include "sgdg2/error.hpp"

namespace sgdg2 {

namespace {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = normal(rng);
  return m;
}

}  // namespace

QuadraticProblem::QuadraticProblem(std::vector<Matrix> matrices, std::vector<ParamVector> vectors)
    : matrices_(std::move(matrices)), vectors_(std::move(vectors)) {
  if (matrices_.empty()) {
    throw Error(ErrorCode::invalid_argument, "quadratic problem needs at least one sample");
  }
  if (matrices_.size() != vectors_.size()) {
    throw Error(ErrorCode::dimension_mismatch, "matrix and vector counts differ");
  }
  const Eigen::Index d = matrices_.front().rows();
  if (d < 1) throw Error(ErrorCode::invalid_argument, "dimension must be at least 1");

  mean_matrix_ = Matrix::Zero(d, d);
  mean_vector_ = ParamVector::Zero(d);
  for (std::size_t i = 0; i < matrices_.size(); ++i) {
    const Matrix& a = matrices_[i];
    if (a.rows() != d || a.cols() != d || vectors_[i].size() != d) {
      throw Error(ErrorCode::dimension_mismatch,
                  "sample " + std::to_string(i + 1) + " has inconsistent shape");
    }
    const double asymmetry = (a - a.transpose()).norm();
    if (asymmetry > 1e-12 * (1.0 + a.norm())) {
      throw Error(ErrorCode::invalid_argument,
                  "sample matrix " + std::to_string(i + 1) + " is not symmetric");
    }
    mean_matrix_ += a;
    mean_vector_ += vectors_[i];
  }
  mean_matrix_ /= static_cast<double>(matrices_.size());
  mean_vector_ /= static_cast<double>(matrices_.size());
}

QuadraticProblem QuadraticProblem::scalar(const std::vector<double>& curvatures,
                                          const std::vector<double>& offsets) {
  if (!offsets.empty() && offsets.size() != curvatures.size()) {
    throw Error(ErrorCode::dimension_mismatch, "curvature and offset counts differ");
  }
  std::vector<Matrix> matrices;
  std::vector<ParamVector> vectors;
  for (std::size_t i = 0; i < curvatures.size(); ++i) {
    matrices.push_back(Matrix::Constant(1, 1, curvatures[i]));
    vectors.push_back(ParamVector::Constant(1, offsets.empty() ? 0.0 : offsets[i]));
  }
  return QuadraticProblem(std::move(matrices), std::move(vectors));
}

bool QuadraticProblem::is_convex() const {
  return Eigen::LLT<Matrix>(mean_matrix_).info() == Eigen::Success;
}

double QuadraticProblem::accumulate_sample(std::size_t index, const ParamVector& x,
                                           ParamVector& gradient) const {
  const Matrix& a = matrices_[index - 1];
  const ParamVector& b = vectors_[index - 1];
  const ParamVector ax = a * x;
  gradient += ax - b;
  return 0.5 * ax.dot(x) - b.dot(x);
}

ParamVector QuadraticProblem::batch_gradient_change(const ParamVector& x, const ParamVector&,
                                                    const ParamVector& y,
                                                    std::span<const std::size_t> indices) const {
  const ParamVector step = x - y;
  ParamVector change = ParamVector::Zero(step.size());
  for (const std::size_t index : indices) change += matrices_[index - 1] * step;
  return change / static_cast<double>(indices.size());
}

double QuadraticProblem::sample_loss(std::size_t index, const ParamVector& x) const {
  const Matrix& a = matrices_[index - 1];
  return 0.5 * x.dot(a * x) - vectors_[index - 1].dot(x);
}

ParamVector quadratic_minimizer(const QuadraticProblem& problem) {
  const Matrix& a = problem.mean_matrix();
  const ParamVector& b = problem.mean_vector();
  const Eigen::FullPivLU<Matrix> lu(a);
  if (!lu.isInvertible()) {
    throw Error(ErrorCode::singular_system, "mean matrix is singular");
  }
  ParamVector solution = lu.solve(b);
  const double residual = (a * solution - b).norm();
  if (!solution.allFinite() || residual > 1e-10 * (1.0 + b.norm())) {
    throw Error(ErrorCode::singular_system,
                "minimizer residual " + std::to_string(residual) + " too large");
  }
  return solution;
}

Matrix random_spd_matrix(std::size_t dimension, double lo, double hi, std::mt19937_64& rng) {
  if (dimension < 1 || !(lo > 0.0) || hi < lo) {
    throw Error(ErrorCode::invalid_argument, "need dimension >= 1 and 0 < lo <= hi");
  }
  const auto d = static_cast<Eigen::Index>(dimension);
  const Eigen::HouseholderQR<Matrix> qr(gaussian_matrix(d, d, rng));
  const Matrix q = qr.householderQ();
  std::uniform_real_distribution<double> uniform(lo, hi);
  ParamVector eigenvalues(d);
  for (Eigen::Index i = 0; i < d; ++i) eigenvalues(i) = uniform(rng);
  Matrix spd = q * eigenvalues.asDiagonal() * q.transpose();
  return 0.5 * (spd + spd.transpose());
}

QuadraticProblem make_random_quadratic(const RandomQuadraticOptions& options,
                                       std::mt19937_64& rng) {
  if (options.samples < 1) {
    throw Error(ErrorCode::invalid_argument, "need at least one sample");
  }
  const auto d = static_cast<Eigen::Index>(options.dimension);
  const Matrix mean_a =
      random_spd_matrix(options.dimension, options.min_eigenvalue, options.max_eigenvalue, rng);
  const ParamVector mean_b = options.offset_scale * gaussian_matrix(d, 1, rng);

  const std::size_t n = options.samples;
  std::vector<Matrix> perturbations;
  std::vector<ParamVector> shifts;
  Matrix perturbation_sum = Matrix::Zero(d, d);
  ParamVector shift_sum = ParamVector::Zero(d);
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix g = gaussian_matrix(d, d, rng);
    perturbations.push_back(0.5 * (g + g.transpose()));
    shifts.push_back(gaussian_matrix(d, 1, rng));
    perturbation_sum += perturbations.back();
    shift_sum += shifts.back();
  }

  std::vector<Matrix> matrices;
  std::vector<ParamVector> vectors;
  for (std::size_t i = 0; i < n; ++i) {
    const Matrix centered = perturbations[i] - perturbation_sum / static_cast<double>(n);
    matrices.push_back(mean_a + options.spread * centered);
    vectors.push_back(mean_b + options.spread * (shifts[i] - shift_sum / static_cast<double>(n)));
  }
  return QuadraticProblem(std::move(matrices), std::move(vectors));
}

}  // namespace sgdg2
