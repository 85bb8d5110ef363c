#pragma once

#include <variant>

#include "spgm/problem.hpp"

namespace spgm {

/// Dual of the minibatch prox subproblem
///
///   min_z (1/N) sum_i l_i(t_i(z)) + 1/(2 mu) ||z - w||^2,   t(z) = A^T z,
///
/// written as the box-constrained concave quadratic
///
///   max_{lower <= v <= upper}  (1/N) (-1/2 v^T Q v + b^T v),
///   Q = (mu/N) A^T A,   b = A^T w - kink,
///
/// with primal recovery z(v) = w - (mu/N) A v. Each dual coordinate i carries a
/// piecewise-linear l_i with conjugate kink_i * s on [lower_i, upper_i].
///
/// For a linear composition A holds the batch atoms (n x N). For separable
/// conjugates A = [I I ... I] (n x Nn) and is kept implicit.
class BoxQuadDual {
 public:
  struct BlockIdentity {
    Index dimension;
    Index blocks;
  };
  using Operator = std::variant<Matrix, BlockIdentity>;

  BoxQuadDual(double mu, Index batch_size, Vector anchor, Operator op, Vector lower,
              Vector upper, Vector kink);

  Index size() const { return lower_.size(); }
  Index primal_dimension() const { return anchor_.size(); }
  Index batch_size() const { return batch_size_; }
  double mu() const { return mu_; }
  const Vector& anchor() const { return anchor_; }
  const Vector& lower() const { return lower_; }
  const Vector& upper() const { return upper_; }
  const Vector& kink() const { return kink_; }
  const Vector& linear() const { return linear_; }
  const Operator& op() const { return op_; }

  /// A v (primal space)
  Vector apply_operator(const Vector& v) const;
  /// A^T z (dual space)
  Vector apply_adjoint(const Vector& z) const;
  Vector apply_q(const Vector& v) const;
  Matrix dense_q() const;

  /// b - Q v
  Vector gradient(const Vector& v) const;
  /// -1/2 v^T Q v + b^T v (the bracket, without the 1/N factor)
  double objective(const Vector& v) const;
  /// True dual function value, equal to the prox objective at the optimum.
  double dual_value(const Vector& v) const;

  Vector recover(const Vector& v) const;
  double primal_value(const Vector& z) const;
  /// primal_value(recover(v)) - dual_value(v), summed from Fenchel-Young terms.
  double duality_gap(const Vector& v) const;

  Vector project(const Vector& v) const;
  /// Euclidean diameter of the box; bounds ||v - v*|| for any feasible v.
  double diameter() const;
  /// lambda_max(Q) by power iteration (30 iterations, tolerance 1e-9).
  double lambda_max() const { return lambda_max_; }
  /// Trace bound on lambda_max(Q); never below the true value.
  double lambda_bound() const { return lambda_bound_; }

 private:
  double mu_;
  Index batch_size_;
  Vector anchor_;
  Operator op_;
  Vector lower_;
  Vector upper_;
  Vector kink_;
  Vector linear_;
  double lambda_max_ = 0.0;
  double lambda_bound_ = 0.0;
};

/// Dual of prox_{h,mu}(w; batch). Batch indices address h's own sample space.
BoxQuadDual build_dual(const NonsmoothComponent& h, const Vector& w, const Minibatch& batch,
                       double mu);

}  // namespace spgm
