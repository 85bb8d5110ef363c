#include "spgm/problem.hpp"

#include <limits>
#include <numeric>
#include <string>

namespace spgm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_dimension(const Vector& w, Index n, const char* what) {
  if (w.size() != n) {
    throw std::invalid_argument(std::string(what) + ": vector has length " +
                                std::to_string(w.size()) + ", expected " + std::to_string(n));
  }
}

}  // namespace

Vector SmoothTerm::gradient(const Vector& w, Index sample) const {
  Vector g = Vector::Zero(dimension());
  accumulate_gradient(w, sample, 1.0, g);
  return g;
}

NonsmoothComponent::NonsmoothComponent(Index dimension, NonsmoothStructure structure)
    : dimension_(dimension), structure_(std::move(structure)) {
  if (dimension_ < 1) throw std::invalid_argument("NonsmoothComponent: dimension must be >= 1");
  std::visit(overloaded{
                 [](const ZeroFunction&) {},
                 [&](const LinearComposition& c) {
                   if (c.atoms.rows() != dimension_ || c.atoms.cols() < 1)
                     throw std::invalid_argument("LinearComposition: atoms must be n x m, m >= 1");
                   if (!(c.loss.lower <= c.loss.upper))
                     throw std::invalid_argument("LinearComposition: empty conjugate domain");
                 },
                 [&](const SeparableConjugate& s) {
                   if (s.lower.rows() != dimension_ || s.lower.cols() < 1 ||
                       s.upper.rows() != s.lower.rows() || s.upper.cols() != s.lower.cols() ||
                       s.kink.rows() != s.lower.rows() || s.kink.cols() != s.lower.cols())
                     throw std::invalid_argument("SeparableConjugate: inconsistent shapes");
                   if ((s.lower.array() > s.upper.array()).any())
                     throw std::invalid_argument("SeparableConjugate: empty conjugate domain");
                 },
                 [&](const BoxIndicator& b) {
                   if (b.lower.rows() != dimension_ || b.lower.cols() < 1 ||
                       b.upper.rows() != b.lower.rows() || b.upper.cols() != b.lower.cols())
                     throw std::invalid_argument("BoxIndicator: inconsistent shapes");
                   if ((b.lower.array() > b.upper.array()).any())
                     throw std::invalid_argument("BoxIndicator: empty box");
                 },
             },
             structure_);
}

Index NonsmoothComponent::sample_count() const {
  return std::visit(overloaded{
                        [](const ZeroFunction&) -> Index { return 1; },
                        [](const LinearComposition& c) -> Index { return c.atoms.cols(); },
                        [](const SeparableConjugate& s) -> Index { return s.lower.cols(); },
                        [](const BoxIndicator& b) -> Index { return b.lower.cols(); },
                    },
                    structure_);
}

bool NonsmoothComponent::has_dual_structure() const {
  return std::holds_alternative<LinearComposition>(structure_) ||
         std::holds_alternative<SeparableConjugate>(structure_);
}

double NonsmoothComponent::value(const Vector& w, Index sample) const {
  require_dimension(w, dimension_, "NonsmoothComponent::value");
  return std::visit(
      overloaded{
          [](const ZeroFunction&) { return 0.0; },
          [&](const LinearComposition& c) { return c.loss.value(c.atoms.col(sample).dot(w)); },
          [&](const SeparableConjugate& s) {
            double total = 0.0;
            for (Index k = 0; k < dimension_; ++k) {
              const ScalarLoss l{s.lower(k, sample), s.upper(k, sample), s.kink(k, sample)};
              total += l.value(w[k]);
            }
            return total;
          },
          [&](const BoxIndicator& b) {
            const bool inside = (w.array() >= b.lower.col(sample).array()).all() &&
                                (w.array() <= b.upper.col(sample).array()).all();
            return inside ? 0.0 : std::numeric_limits<double>::infinity();
          },
      },
      structure_);
}

void NonsmoothComponent::accumulate_subgradient(const Vector& w, Index sample, double scale,
                                                Vector& out) const {
  require_dimension(w, dimension_, "NonsmoothComponent::subgradient");
  std::visit(overloaded{
                 [](const ZeroFunction&) {},
                 [&](const LinearComposition& c) {
                   const auto a = c.atoms.col(sample);
                   const double g = c.loss.subgradient(a.dot(w));
                   if (g != 0.0) out.noalias() += (scale * g) * a;
                 },
                 [&](const SeparableConjugate& s) {
                   for (Index k = 0; k < dimension_; ++k) {
                     const ScalarLoss l{s.lower(k, sample), s.upper(k, sample), s.kink(k, sample)};
                     out[k] += scale * l.subgradient(w[k]);
                   }
                 },
                 // Zero is a valid element of the normal cone at every feasible point.
                 [](const BoxIndicator&) {},
             },
             structure_);
}

Vector NonsmoothComponent::subgradient(const Vector& w, Index sample) const {
  Vector g = Vector::Zero(dimension_);
  accumulate_subgradient(w, sample, 1.0, g);
  return g;
}

void NonsmoothComponent::hash_into(ContentHash& h) const {
  h.integer(dimension_);
  std::visit(overloaded{
                 [&](const ZeroFunction&) { h.tag("zero"); },
                 [&](const LinearComposition& c) {
                   h.tag("composition");
                   h.matrix(c.atoms);
                   h.scalar(c.loss.lower);
                   h.scalar(c.loss.upper);
                   h.scalar(c.loss.kink);
                 },
                 [&](const SeparableConjugate& s) {
                   h.tag("separable");
                   h.matrix(s.lower);
                   h.matrix(s.upper);
                   h.matrix(s.kink);
                 },
                 [&](const BoxIndicator& b) {
                   h.tag("indicator");
                   h.matrix(b.lower);
                   h.matrix(b.upper);
                 },
             },
             structure_);
}

Minibatch Minibatch::full(Index m) {
  if (m < 1) throw std::invalid_argument("Minibatch::full: m must be >= 1");
  Minibatch b;
  b.indices.resize(static_cast<std::size_t>(m));
  std::iota(b.indices.begin(), b.indices.end(), Index{0});
  return b;
}

CompositeProblem::CompositeProblem(std::shared_ptr<const SmoothTerm> smooth,
                                   std::shared_ptr<const NonsmoothComponent> nonsmooth,
                                   double lipschitz_L, double strong_convexity_sigma)
    : smooth_(std::move(smooth)),
      nonsmooth_(std::move(nonsmooth)),
      lipschitz_L_(lipschitz_L),
      sigma_f_(strong_convexity_sigma) {
  if (!smooth_ || !nonsmooth_) throw std::invalid_argument("CompositeProblem: null term");
  if (smooth_->dimension() != nonsmooth_->dimension())
    throw std::invalid_argument("CompositeProblem: smooth and nonsmooth dimensions differ");
  if (!(lipschitz_L_ > 0.0)) throw std::invalid_argument("CompositeProblem: L_f must be > 0");
  if (!(sigma_f_ >= 0.0)) throw std::invalid_argument("CompositeProblem: sigma_f must be >= 0");
  sample_count_ = std::lcm(smooth_->sample_count(), nonsmooth_->sample_count());
}

Minibatch CompositeProblem::nonsmooth_batch(const Minibatch& batch) const {
  Minibatch mapped;
  mapped.indices.reserve(batch.indices.size());
  for (Index i : batch.indices) mapped.indices.push_back(nonsmooth_index(i));
  return mapped;
}

std::uint64_t CompositeProblem::content_hash() const {
  ContentHash h;
  smooth_->hash_into(h);
  nonsmooth_->hash_into(h);
  h.scalar(lipschitz_L_);
  h.scalar(sigma_f_);
  return h.value();
}

Minibatch sample_minibatch(Rng& rng, Index m, Index batch_size) {
  if (m < 1) throw std::invalid_argument("sample_minibatch: sample count must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("sample_minibatch: batch size must be >= 1");
  std::uniform_int_distribution<Index> pick(0, m - 1);
  Minibatch b;
  b.indices.resize(static_cast<std::size_t>(batch_size));
  for (auto& i : b.indices) i = pick(rng);
  return b;
}

Vector minibatch_gradient(const CompositeProblem& p, const Vector& w, const Minibatch& batch) {
  require_dimension(w, p.dimension(), "minibatch_gradient");
  if (batch.size() < 1) throw std::invalid_argument("minibatch_gradient: empty batch");
  Vector g = Vector::Zero(p.dimension());
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (Index i : batch.indices) p.smooth().accumulate_gradient(w, p.smooth_index(i), scale, g);
  return g;
}

Vector minibatch_subgradient(const CompositeProblem& p, const Vector& w, const Minibatch& batch) {
  require_dimension(w, p.dimension(), "minibatch_subgradient");
  if (batch.size() < 1) throw std::invalid_argument("minibatch_subgradient: empty batch");
  Vector g = Vector::Zero(p.dimension());
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (Index i : batch.indices)
    p.nonsmooth().accumulate_subgradient(w, p.nonsmooth_index(i), scale, g);
  return g;
}

Vector full_gradient(const CompositeProblem& p, const Vector& w) {
  require_dimension(w, p.dimension(), "full_gradient");
  const Index m = p.smooth().sample_count();
  Vector g = Vector::Zero(p.dimension());
  const double scale = 1.0 / static_cast<double>(m);
  for (Index i = 0; i < m; ++i) p.smooth().accumulate_gradient(w, i, scale, g);
  return g;
}

double empirical_objective(const CompositeProblem& p, const Vector& w) {
  require_dimension(w, p.dimension(), "empirical_objective");
  // Both marginals of the lcm sample space are uniform, so the mean over the
  // problem's sample space splits into the per-term means.
  const Index mf = p.smooth().sample_count();
  const Index mh = p.nonsmooth().sample_count();
  double fsum = 0.0;
  for (Index i = 0; i < mf; ++i) fsum += p.smooth().value(w, i);
  double hsum = 0.0;
  for (Index i = 0; i < mh; ++i) hsum += p.nonsmooth().value(w, i);
  return fsum / static_cast<double>(mf) + hsum / static_cast<double>(mh);
}

}  // namespace spgm
