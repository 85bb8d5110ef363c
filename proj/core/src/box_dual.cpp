#include "spgm/box_dual.hpp"

#include <cmath>

namespace spgm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr int kPowerIterations = 30;
constexpr double kPowerTolerance = 1e-9;

}  // namespace

BoxQuadDual::BoxQuadDual(double mu, Index batch_size, Vector anchor, Operator op, Vector lower,
                         Vector upper, Vector kink)
    : mu_(mu),
      batch_size_(batch_size),
      anchor_(std::move(anchor)),
      op_(std::move(op)),
      lower_(std::move(lower)),
      upper_(std::move(upper)),
      kink_(std::move(kink)) {
  if (!(mu_ > 0.0)) throw std::invalid_argument("BoxQuadDual: mu must be > 0");
  if (batch_size_ < 1) throw std::invalid_argument("BoxQuadDual: batch size must be >= 1");
  const Index d = lower_.size();
  if (upper_.size() != d || kink_.size() != d)
    throw std::invalid_argument("BoxQuadDual: box and kink sizes differ");
  if ((lower_.array() > upper_.array()).any())
    throw std::invalid_argument("BoxQuadDual: empty box coordinate");
  std::visit(overloaded{
                 [&](const Matrix& a) {
                   if (a.rows() != anchor_.size() || a.cols() != d)
                     throw std::invalid_argument("BoxQuadDual: operator shape mismatch");
                 },
                 [&](const BlockIdentity& b) {
                   if (b.dimension != anchor_.size() || b.dimension * b.blocks != d)
                     throw std::invalid_argument("BoxQuadDual: block operator shape mismatch");
                 },
             },
             op_);

  linear_ = apply_adjoint(anchor_) - kink_;

  const double scale = mu_ / static_cast<double>(batch_size_);
  lambda_bound_ = std::visit(
      overloaded{
          [&](const Matrix& a) { return scale * a.squaredNorm(); },
          [&](const BlockIdentity& b) {
            return scale * static_cast<double>(b.blocks * b.dimension);
          },
      },
      op_);

  // Power iteration from a fixed, non-symmetric start so reruns are bitwise equal.
  Vector x(d);
  for (Index i = 0; i < d; ++i) x[i] = 1.0 + 0.1 * static_cast<double>(i % 7);
  x.normalize();
  double estimate = 0.0;
  for (int it = 0; it < kPowerIterations; ++it) {
    Vector y = apply_q(x);
    const double norm = y.norm();
    if (norm == 0.0) {
      estimate = 0.0;
      break;
    }
    const double next = x.dot(y);
    x = y / norm;
    const bool settled = std::abs(next - estimate) <= kPowerTolerance * std::abs(next);
    estimate = next;
    if (settled) break;
  }
  lambda_max_ = std::max(0.0, estimate);
}

Vector BoxQuadDual::apply_operator(const Vector& v) const {
  return std::visit(overloaded{
                        [&](const Matrix& a) -> Vector { return a * v; },
                        [&](const BlockIdentity& b) -> Vector {
                          Vector out = Vector::Zero(b.dimension);
                          for (Index j = 0; j < b.blocks; ++j)
                            out += v.segment(j * b.dimension, b.dimension);
                          return out;
                        },
                    },
                    op_);
}

Vector BoxQuadDual::apply_adjoint(const Vector& z) const {
  return std::visit(overloaded{
                        [&](const Matrix& a) -> Vector { return a.transpose() * z; },
                        [&](const BlockIdentity& b) -> Vector {
                          Vector out(b.dimension * b.blocks);
                          for (Index j = 0; j < b.blocks; ++j)
                            out.segment(j * b.dimension, b.dimension) = z;
                          return out;
                        },
                    },
                    op_);
}

Vector BoxQuadDual::apply_q(const Vector& v) const {
  return (mu_ / static_cast<double>(batch_size_)) * apply_adjoint(apply_operator(v));
}

Matrix BoxQuadDual::dense_q() const {
  const double scale = mu_ / static_cast<double>(batch_size_);
  return std::visit(overloaded{
                        [&](const Matrix& a) -> Matrix {
                          return scale * (a.transpose() * a);
                        },
                        [&](const BlockIdentity& b) -> Matrix {
                          const Index d = b.dimension * b.blocks;
                          Matrix q = Matrix::Zero(d, d);
                          for (Index i = 0; i < b.blocks; ++i)
                            for (Index j = 0; j < b.blocks; ++j)
                              q.block(i * b.dimension, j * b.dimension, b.dimension, b.dimension)
                                  .diagonal()
                                  .setConstant(scale);
                          return q;
                        },
                    },
                    op_);
}

Vector BoxQuadDual::gradient(const Vector& v) const { return linear_ - apply_q(v); }

double BoxQuadDual::objective(const Vector& v) const {
  const Vector av = apply_operator(v);
  const double quad = (mu_ / static_cast<double>(batch_size_)) * av.squaredNorm();
  return -0.5 * quad + linear_.dot(v);
}

double BoxQuadDual::dual_value(const Vector& v) const {
  return objective(v) / static_cast<double>(batch_size_);
}

Vector BoxQuadDual::recover(const Vector& v) const {
  return anchor_ - (mu_ / static_cast<double>(batch_size_)) * apply_operator(v);
}

double BoxQuadDual::primal_value(const Vector& z) const {
  const Vector t = apply_adjoint(z);
  double loss = 0.0;
  for (Index i = 0; i < t.size(); ++i) loss += ScalarLoss{lower_[i], upper_[i], kink_[i]}.value(t[i]);
  return loss / static_cast<double>(batch_size_) + (z - anchor_).squaredNorm() / (2.0 * mu_);
}

double BoxQuadDual::duality_gap(const Vector& v) const {
  const Vector t = apply_adjoint(recover(v));
  double gap = 0.0;
  for (Index i = 0; i < t.size(); ++i)
    gap += ScalarLoss{lower_[i], upper_[i], kink_[i]}.fenchel_young_gap(t[i], v[i]);
  return std::max(0.0, gap / static_cast<double>(batch_size_));
}

Vector BoxQuadDual::project(const Vector& v) const {
  return v.cwiseMax(lower_).cwiseMin(upper_);
}

double BoxQuadDual::diameter() const { return (upper_ - lower_).norm(); }

BoxQuadDual build_dual(const NonsmoothComponent& h, const Vector& w, const Minibatch& batch,
                       double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("build_dual: mu must be > 0");
  if (w.size() != h.dimension()) throw std::invalid_argument("build_dual: dimension mismatch");
  const Index n_batch = batch.size();
  if (n_batch < 1) throw std::invalid_argument("build_dual: empty batch");
  for (Index i : batch.indices)
    if (i < 0 || i >= h.sample_count())
      throw std::invalid_argument("build_dual: batch index outside the sample space");

  return std::visit(
      overloaded{
          [&](const LinearComposition& c) -> BoxQuadDual {
            Matrix a(h.dimension(), n_batch);
            for (Index j = 0; j < n_batch; ++j) a.col(j) = c.atoms.col(batch.indices[j]);
            return BoxQuadDual(mu, n_batch, w, std::move(a),
                               Vector::Constant(n_batch, c.loss.lower),
                               Vector::Constant(n_batch, c.loss.upper),
                               Vector::Constant(n_batch, c.loss.kink));
          },
          [&](const SeparableConjugate& s) -> BoxQuadDual {
            const Index n = h.dimension();
            Vector lo(n * n_batch), hi(n * n_batch), kink(n * n_batch);
            for (Index j = 0; j < n_batch; ++j) {
              const Index xi = batch.indices[j];
              lo.segment(j * n, n) = s.lower.col(xi);
              hi.segment(j * n, n) = s.upper.col(xi);
              kink.segment(j * n, n) = s.kink.col(xi);
            }
            return BoxQuadDual(mu, n_batch, w, BoxQuadDual::BlockIdentity{n, n_batch},
                               std::move(lo), std::move(hi), std::move(kink));
          },
          [](const auto&) -> BoxQuadDual {
            throw UnsupportedStructure(
                "build_dual: nonsmooth term has no box-conjugate dual structure");
          },
      },
      h.structure());
}

}  // namespace spgm
