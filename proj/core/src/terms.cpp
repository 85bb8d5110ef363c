#include "spgm/terms.hpp"

#include <Eigen/Eigenvalues>

namespace spgm {

ScaledSquaredNorm::ScaledSquaredNorm(Index dimension, double lambda)
    : dimension_(dimension), lambda_(lambda) {
  if (dimension_ < 1) throw std::invalid_argument("ScaledSquaredNorm: dimension must be >= 1");
  if (!(lambda_ >= 0.0)) throw std::invalid_argument("ScaledSquaredNorm: lambda must be >= 0");
}

double ScaledSquaredNorm::value(const Vector& w, Index) const {
  return 0.5 * lambda_ * w.squaredNorm();
}

void ScaledSquaredNorm::accumulate_gradient(const Vector& w, Index, double scale,
                                            Vector& out) const {
  out.noalias() += (scale * lambda_) * w;
}

void ScaledSquaredNorm::hash_into(ContentHash& h) const {
  h.tag("scaled-squared-norm");
  h.integer(dimension_);
  h.scalar(lambda_);
}

RidgeLeastSquares::RidgeLeastSquares(const Matrix& rows, Vector targets, double alpha)
    : columns_(rows.transpose()), targets_(std::move(targets)), alpha_(alpha) {
  if (rows.rows() < 1 || rows.cols() < 1)
    throw std::invalid_argument("RidgeLeastSquares: empty data matrix");
  if (targets_.size() != rows.rows())
    throw std::invalid_argument("RidgeLeastSquares: target length differs from row count");
  if (!(alpha_ >= 0.0)) throw std::invalid_argument("RidgeLeastSquares: alpha must be >= 0");
}

double RidgeLeastSquares::value(const Vector& w, Index sample) const {
  const double r = columns_.col(sample).dot(w) - targets_[sample];
  return 0.5 * r * r + 0.5 * alpha_ * w.squaredNorm();
}

void RidgeLeastSquares::accumulate_gradient(const Vector& w, Index sample, double scale,
                                            Vector& out) const {
  const auto row = columns_.col(sample);
  const double r = row.dot(w) - targets_[sample];
  out.noalias() += (scale * r) * row;
  out.noalias() += (scale * alpha_) * w;
}

void RidgeLeastSquares::hash_into(ContentHash& h) const {
  h.tag("ridge-least-squares");
  h.matrix(columns_);
  h.vector(targets_);
  h.scalar(alpha_);
}

double RidgeLeastSquares::per_sample_lipschitz() const {
  return columns_.colwise().squaredNorm().maxCoeff() + alpha_;
}

double RidgeLeastSquares::mean_strong_convexity() const {
  const Matrix gram = columns_ * columns_.transpose() / static_cast<double>(columns_.cols());
  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram, Eigen::EigenvaluesOnly);
  return alpha_ + std::max(0.0, eig.eigenvalues().minCoeff());
}

}  // namespace spgm
