#pragma once

#include <algorithm>
#include <memory>
#include <variant>
#include <vector>

#include "spgm/types.hpp"

namespace spgm {

/// Smooth per-sample term f(.; xi) with a finite sample space [sample_count()).
class SmoothTerm {
 public:
  virtual ~SmoothTerm() = default;

  virtual Index dimension() const = 0;
  virtual Index sample_count() const = 0;
  virtual double value(const Vector& w, Index sample) const = 0;
  /// out += scale * grad f(w; sample)
  virtual void accumulate_gradient(const Vector& w, Index sample, double scale,
                                   Vector& out) const = 0;
  virtual void hash_into(ContentHash& h) const = 0;

  Vector gradient(const Vector& w, Index sample) const;
};

/// Scalar piecewise-linear convex function l(t) = max(lower*(t-kink), upper*(t-kink)).
///
/// Its conjugate is l*(s) = kink * s on [lower, upper] and +inf outside, so the
/// dual of any prox built from it is a box-constrained concave quadratic.
/// Hinge: max(0, 1+t) is {0, 1, -1}; scaled absolute value c|t| is {-c, c, 0}.
struct ScalarLoss {
  double lower = 0.0;
  double upper = 0.0;
  double kink = 0.0;

  static ScalarLoss hinge() { return {0.0, 1.0, -1.0}; }
  static ScalarLoss absolute(double scale = 1.0) { return {-scale, scale, 0.0}; }

  double value(double t) const {
    const double r = t - kink;
    return r >= 0.0 ? upper * r : lower * r;
  }
  /// Subgradient with the convention that the kink maps to the element of
  /// [lower, upper] closest to zero (sgn(0) = 0 for the absolute value).
  double subgradient(double t) const {
    if (t > kink) return upper;
    if (t < kink) return lower;
    return std::clamp(0.0, lower, upper);
  }
  double conjugate(double s) const { return kink * s; }
  /// l(t) + l*(s) - s t >= 0 for s in [lower, upper], computed without cancellation.
  double fenchel_young_gap(double t, double s) const {
    const double r = t - kink;
    return r >= 0.0 ? (upper - s) * r : (lower - s) * r;
  }
};

struct ZeroFunction {};

/// h(w; xi) = l(a_xi^T w); column xi of `atoms` is a_xi.
struct LinearComposition {
  Matrix atoms;
  ScalarLoss loss;
};

/// h(w; xi) = sum_k max(lower_k (w_k - kink_k), upper_k (w_k - kink_k)) with
/// per-sample columns. Its conjugate is linear on the box [lower, upper].
struct SeparableConjugate {
  Matrix lower;
  Matrix upper;
  Matrix kink;
};

/// h(w; xi) = indicator of the box [lower_xi, upper_xi].
struct BoxIndicator {
  Matrix lower;
  Matrix upper;
};

using NonsmoothStructure =
    std::variant<ZeroFunction, LinearComposition, SeparableConjugate, BoxIndicator>;

class NonsmoothComponent {
 public:
  NonsmoothComponent(Index dimension, NonsmoothStructure structure);

  static NonsmoothComponent zero(Index dimension) {
    return NonsmoothComponent(dimension, ZeroFunction{});
  }

  Index dimension() const { return dimension_; }
  Index sample_count() const;
  const NonsmoothStructure& structure() const { return structure_; }
  bool has_dual_structure() const;

  double value(const Vector& w, Index sample) const;
  void accumulate_subgradient(const Vector& w, Index sample, double scale, Vector& out) const;
  Vector subgradient(const Vector& w, Index sample) const;
  void hash_into(ContentHash& h) const;

 private:
  Index dimension_;
  NonsmoothStructure structure_;
};

/// Sample indices of one SPG-M step. Indices address the sample space of the
/// object they are handed to (problem-level or term-level).
struct Minibatch {
  std::vector<Index> indices;

  Index size() const { return static_cast<Index>(indices.size()); }
  static Minibatch full(Index m);
};

/// F(w) = E[f(w; xi)] + E[h(w; xi)] over a uniform finite sample space.
///
/// The smooth and nonsmooth terms may have different sample counts; the problem
/// samples over lcm(m_f, m_h) and maps xi to (xi mod m_f, xi mod m_h), which
/// keeps both marginals uniform.
class CompositeProblem {
 public:
  CompositeProblem(std::shared_ptr<const SmoothTerm> smooth,
                   std::shared_ptr<const NonsmoothComponent> nonsmooth, double lipschitz_L,
                   double strong_convexity_sigma);

  Index dimension() const { return smooth_->dimension(); }
  Index sample_count() const { return sample_count_; }
  double lipschitz_L() const { return lipschitz_L_; }
  double strong_convexity_sigma() const { return sigma_f_; }

  const SmoothTerm& smooth() const { return *smooth_; }
  const NonsmoothComponent& nonsmooth() const { return *nonsmooth_; }
  std::shared_ptr<const SmoothTerm> smooth_ptr() const { return smooth_; }
  std::shared_ptr<const NonsmoothComponent> nonsmooth_ptr() const { return nonsmooth_; }

  Index smooth_index(Index sample) const { return sample % smooth_->sample_count(); }
  Index nonsmooth_index(Index sample) const { return sample % nonsmooth_->sample_count(); }
  Minibatch nonsmooth_batch(const Minibatch& batch) const;

  std::uint64_t content_hash() const;

 private:
  std::shared_ptr<const SmoothTerm> smooth_;
  std::shared_ptr<const NonsmoothComponent> nonsmooth_;
  double lipschitz_L_;
  double sigma_f_;
  Index sample_count_;
};

/// N i.i.d. uniform draws from [0, m) with replacement.
Minibatch sample_minibatch(Rng& rng, Index m, Index batch_size);

/// (1/N) sum_{i in batch} grad f(w; i)
Vector minibatch_gradient(const CompositeProblem& p, const Vector& w, const Minibatch& batch);

/// (1/N) sum_{i in batch} g_h(w; i)
Vector minibatch_subgradient(const CompositeProblem& p, const Vector& w, const Minibatch& batch);

/// Gradient of the empirical mean of f.
Vector full_gradient(const CompositeProblem& p, const Vector& w);

/// (1/m) sum_xi [f(w; xi) + h(w; xi)]
double empirical_objective(const CompositeProblem& p, const Vector& w);

}  // namespace spgm
