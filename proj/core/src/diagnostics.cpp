#include "spgm/diagnostics.hpp"

#include <cmath>

namespace spgm {

namespace {

constexpr int kPowerIterations = 200;

Vector hessian_times(const CompositeProblem& p, const Vector& w, const Vector& v) {
  const double step = 1e-4 * std::max(1.0, w.norm()) / std::max(v.norm(), 1e-300);
  return (full_gradient(p, w + step * v) - full_gradient(p, w - step * v)) / (2.0 * step);
}

// Largest eigenvalue of (shift I - sign H), sign = +1 or -1 selecting the end.
double power_iteration(const CompositeProblem& p, const Vector& w, double shift, double sign) {
  const Index n = p.dimension();
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = 1.0 + 0.1 * static_cast<double>(i % 7);
  x.normalize();
  double estimate = 0.0;
  for (int it = 0; it < kPowerIterations; ++it) {
    Vector y = shift * x - sign * hessian_times(p, w, x);
    const double norm = y.norm();
    if (norm == 0.0) return 0.0;
    const double next = x.dot(y);
    x = y / norm;
    if (std::abs(next - estimate) <= 1e-10 * std::abs(next)) return next;
    estimate = next;
  }
  return estimate;
}

}  // namespace

Diagnostics estimate_diagnostics(const CompositeProblem& p, const Vector& w_star) {
  if (w_star.size() != p.dimension()) throw std::invalid_argument("estimate_diagnostics: dimension mismatch");
  Diagnostics d;
  d.lipschitz_declared = p.lipschitz_L();
  d.strong_convexity_declared = p.strong_convexity_sigma();

  const Index m = p.sample_count();
  const Index n = p.dimension();
  double total = 0.0;
  Vector g(n);
  for (Index xi = 0; xi < m; ++xi) {
    g.setZero();
    p.smooth().accumulate_gradient(w_star, p.smooth_index(xi), 1.0, g);
    p.nonsmooth().accumulate_subgradient(w_star, p.nonsmooth_index(xi), 1.0, g);
    total += g.squaredNorm();
  }
  d.sigma_sq = total / static_cast<double>(m);

  const Index mh = p.nonsmooth().sample_count();
  total = 0.0;
  for (Index xi = 0; xi < mh; ++xi) total += p.nonsmooth().subgradient(w_star, xi).squaredNorm();
  d.subgradient_bound = total / static_cast<double>(mh);

  d.lipschitz_estimate = power_iteration(p, w_star, 0.0, -1.0);
  const double shift = std::max(d.lipschitz_estimate, d.lipschitz_declared);
  d.strong_convexity_estimate = std::max(0.0, shift - power_iteration(p, w_star, shift, 1.0));
  return d;
}

}  // namespace spgm
