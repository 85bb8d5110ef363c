#pragma once

#include "spgm/problem.hpp"

namespace spgm {

/// f(w; xi) = (lambda/2) ||w||^2 for every sample (a single-sample space).
class ScaledSquaredNorm final : public SmoothTerm {
 public:
  ScaledSquaredNorm(Index dimension, double lambda);

  Index dimension() const override { return dimension_; }
  Index sample_count() const override { return 1; }
  double value(const Vector& w, Index sample) const override;
  void accumulate_gradient(const Vector& w, Index sample, double scale,
                           Vector& out) const override;
  void hash_into(ContentHash& h) const override;

  double lambda() const { return lambda_; }

 private:
  Index dimension_;
  double lambda_;
};

/// f(w; xi) = 1/2 (r_xi^T w - y_xi)^2 + (alpha/2) ||w||^2.
///
/// Rows r_xi are stored as columns of an n x m matrix so each sample is contiguous.
class RidgeLeastSquares final : public SmoothTerm {
 public:
  /// `rows` is m x n (one sample per row).
  RidgeLeastSquares(const Matrix& rows, Vector targets, double alpha);

  Index dimension() const override { return columns_.rows(); }
  Index sample_count() const override { return columns_.cols(); }
  double value(const Vector& w, Index sample) const override;
  void accumulate_gradient(const Vector& w, Index sample, double scale,
                           Vector& out) const override;
  void hash_into(ContentHash& h) const override;

  double alpha() const { return alpha_; }
  const Matrix& columns() const { return columns_; }
  const Vector& targets() const { return targets_; }

  /// max_xi ||r_xi||^2 + alpha: Lipschitz constant of every per-sample gradient.
  double per_sample_lipschitz() const;
  /// alpha + lambda_min((1/m) R^T R): strong convexity of the empirical mean.
  double mean_strong_convexity() const;

 private:
  Matrix columns_;
  Vector targets_;
  double alpha_;
};

}  // namespace spgm
