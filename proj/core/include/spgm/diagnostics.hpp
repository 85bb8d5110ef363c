#pragma once

#include "spgm/problem.hpp"

namespace spgm {

struct Diagnostics {
  /// Mean over the sample space of ||grad f(w*; xi) + g_h(w*; xi)||^2.
  double sigma_sq = 0.0;
  /// Mean over h's samples of ||g_h(w*; xi)||^2.
  double subgradient_bound = 0.0;
  /// Largest and smallest curvature of the mean of f, by power iteration on
  /// finite-difference Hessian-vector products.
  double lipschitz_estimate = 0.0;
  double strong_convexity_estimate = 0.0;
  /// Constants the problem declares.
  double lipschitz_declared = 0.0;
  double strong_convexity_declared = 0.0;
};

Diagnostics estimate_diagnostics(const CompositeProblem& p, const Vector& w_star);

}  // namespace spgm
