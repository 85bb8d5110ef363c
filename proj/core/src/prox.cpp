#include "spgm/prox.hpp"

#include <algorithm>
#include <cstdio>
#include <cmath>
#include <numeric>
#include <limits>
#include <optional>
#include <string>

namespace spgm {

namespace {

std::string format_real(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

constexpr Index kPolishMaxSize = 2000;
constexpr int kStallChecks = 100;
constexpr Index kMinimumCap = 50;

Index iteration_cap(double bound, Index ceiling) {
  if (!std::isfinite(bound) || bound > static_cast<double>(ceiling)) return ceiling;
  const auto scaled = static_cast<Index>(10.0 * std::ceil(std::max(0.0, bound)));
  return std::clamp(scaled, kMinimumCap, ceiling);
}

double gap_at(const BoxQuadDual& d, const Vector& v, const Vector& av) {
  const double scale = d.mu() / static_cast<double>(d.batch_size());
  const Vector t = d.apply_adjoint(d.anchor() - scale * av);
  double gap = 0.0;
  for (Index i = 0; i < t.size(); ++i)
    gap += ScalarLoss{d.lower()[i], d.upper()[i], d.kink()[i]}.fenchel_young_gap(t[i], v[i]);
  return std::max(0.0, gap / static_cast<double>(d.batch_size()));
}

// Maximizer of a linear function over the box; ties go to the point closest to 0.
Vector vertex_maximizer(const BoxQuadDual& d) {
  Vector v(d.size());
  for (Index i = 0; i < v.size(); ++i) {
    const double b = d.linear()[i];
    v[i] = b > 0.0 ? d.upper()[i] : (b < 0.0 ? d.lower()[i] : std::clamp(0.0, d.lower()[i], d.upper()[i]));
  }
  return v;
}

struct Polished {
  Vector v;
  bool kkt_exact = false;
};

// Fixes the coordinates outside `free` at their values in `cand`, solves the
// free block of the KKT system exactly and clamps it to the box.
std::optional<Polished> solve_free_block(const BoxQuadDual& d, const Matrix& q, Vector cand,
                                         const std::vector<Index>& free) {
  const Index size = cand.size();
  bool exact = true;
  if (!free.empty()) {
    const auto nf = static_cast<Index>(free.size());
    std::vector<bool> is_free(static_cast<std::size_t>(size), false);
    for (Index i : free) is_free[static_cast<std::size_t>(i)] = true;
    Matrix qff(nf, nf);
    Vector rhs(nf);
    for (Index a = 0; a < nf; ++a) {
      const Index i = free[a];
      double r = d.linear()[i];
      for (Index j = 0; j < size; ++j)
        if (!is_free[static_cast<std::size_t>(j)]) r -= q(i, j) * cand[j];
      rhs[a] = r;
      for (Index b = 0; b < nf; ++b) qff(a, b) = q(i, free[b]);
    }
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(qff);
    const Vector x = cod.solve(rhs);
    const double residual = (qff * x - rhs).norm();
    if (!std::isfinite(residual) || residual > 1e-9 * (rhs.norm() + 1.0)) return std::nullopt;
    for (Index a = 0; a < nf; ++a) {
      const Index i = free[a];
      const double lo = d.lower()[i], hi = d.upper()[i];
      const double tol = 1e-12 * std::max(1.0, hi - lo);
      if (x[a] < lo - tol || x[a] > hi + tol) exact = false;
      cand[i] = std::clamp(x[a], lo, hi);
    }
  }

  const Vector gc = d.linear() - q * cand;
  const double gtol = 1e-9 * (d.linear().lpNorm<Eigen::Infinity>() + 1.0);
  for (Index i = 0; i < size; ++i) {
    if (cand[i] == d.lower()[i] && cand[i] != d.upper()[i] && gc[i] > gtol) exact = false;
    if (cand[i] == d.upper()[i] && cand[i] != d.lower()[i] && gc[i] < -gtol) exact = false;
  }
  return Polished{std::move(cand), exact};
}

// Guess the active set from a projected step, then solve the free block.
std::optional<Polished> polish(const BoxQuadDual& d, const Matrix& q, const Vector& v, double L) {
  const Vector g = d.linear() - q * v;
  Vector cand = v;
  std::vector<Index> free;
  for (Index i = 0; i < v.size(); ++i) {
    const double lo = d.lower()[i], hi = d.upper()[i];
    const double tol = 1e-9 * std::max(1.0, hi - lo);
    const double step = v[i] + g[i] / L;
    if (step <= lo + tol) {
      cand[i] = lo;
    } else if (step >= hi - tol) {
      cand[i] = hi;
    } else {
      free.push_back(i);
    }
  }
  return solve_free_block(d, q, std::move(cand), free);
}

ProxResult solve_box_dual(const BoxQuadDual& d, double delta, const ProxOptions& opt,
                          bool accelerated) {
  if (!(delta > 0.0)) throw std::invalid_argument("dual solver: target accuracy must be > 0");
  const double n_batch = static_cast<double>(d.batch_size());
  const double mu = d.mu();
  const double scale = mu / n_batch;
  const double diam = d.diameter();
  Index passes = 0;

  auto result = [&](Vector v, const Vector& av, Index iterations, double cert) {
    ProxResult r;
    r.primal = d.anchor() - scale * av;
    r.dual = std::move(v);
    r.inner_iterations = iterations;
    r.certified_accuracy = cert;
    r.samples_touched = passes * d.batch_size();
    return r;
  };

  if (d.lambda_bound() == 0.0) {
    // Q = 0: the dual is linear and every atom vanishes, so z = w.
    Vector v = vertex_maximizer(d);
    const Vector av = d.apply_operator(v);
    passes += 1;
    return result(std::move(v), av, 1, std::sqrt(mu * gap_at(d, v, av)));
  }

  double L = d.lambda_max() > 0.0 ? std::min(1.05 * d.lambda_max(), d.lambda_bound())
                                  : d.lambda_bound();
  const Index cap = iteration_cap(accelerated ? fast_gradient_iteration_bound(d, delta)
                                              : prox_gradient_iteration_bound(d, delta),
                                  opt.iteration_ceiling);

  Vector v = (opt.warm_start && opt.warm_start->size() == d.size())
                 ? d.project(*opt.warm_start)
                 : d.project(Vector::Zero(d.size()));
  Vector av = d.apply_operator(v);
  passes += 1;

  Vector best_v = v;
  Vector best_av = av;
  double best_cert = std::sqrt(mu * gap_at(d, v, av));
  double current_gap = best_cert * best_cert / mu;
  passes += 1;
  if (best_cert <= delta) return result(best_v, best_av, 0, best_cert);

  Vector y = v;
  Vector ay = av;
  double t = 1.0;
  Index restart_at = 0;
  Index next_polish = 16;
  int stall = 0;
  std::optional<Matrix> q;

  auto consider = [&](const Vector& cv, const Vector& cav, double cert) {
    if (cert < best_cert) {
      stall = cert < best_cert * (1.0 - 1e-3) ? 0 : stall + 1;
      best_cert = cert;
      best_v = cv;
      best_av = cav;
    } else {
      ++stall;
    }
  };

  Index k = 1;
  for (; k <= cap; ++k) {
    const Vector g = d.linear() - scale * d.apply_adjoint(ay);
    passes += 1;
    Vector vn = d.project(y + g / L);
    Vector avn = d.apply_operator(vn);
    const Vector step = vn - y;
    const double dn = step.squaredNorm();
    const double curvature = scale * (avn - ay).squaredNorm();
    if (dn > 0.0 && curvature > L * dn * (1.0 + 1e-10) && L < d.lambda_bound()) {
      L = std::min(std::max(2.0 * L, curvature / dn), d.lambda_bound());
      continue;
    }

    double gm_cert = std::numeric_limits<double>::infinity();
    if (!accelerated) {
      // phi* - phi(v+) <= ||G|| ||v - v*|| for the step G = L (v+ - v).
      gm_cert = std::sqrt(2.0 * mu * L * std::sqrt(dn) * diam / n_batch);
    }

    if (accelerated) {
      if (step.dot(vn - v) < 0.0) {
        t = 1.0;
        y = vn;
        ay = avn;
        restart_at = k;
      } else {
        const double tn = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
        const double beta = (t - 1.0) / tn;
        y = vn + beta * (vn - v);
        ay = avn + beta * (avn - av);
        t = tn;
      }
    } else {
      y = vn;
      ay = avn;
    }
    v = std::move(vn);
    av = std::move(avn);

    double cert = gm_cert;
    const bool check = k <= 10 || k % 5 == 0 || k == cap;
    if (check) {
      current_gap = gap_at(d, v, av);
      passes += 1;
      cert = std::min(cert, std::sqrt(mu * current_gap));
      if (accelerated) {
        const double since = static_cast<double>(k - restart_at + 1);
        cert = std::min(cert, std::sqrt(4.0 * mu * L * diam * diam / (n_batch * since * since)));
      }
    }
    if (check || !accelerated) consider(v, av, cert);
    if (best_cert <= delta) return result(best_v, best_av, k, best_cert);
    if (stall > kStallChecks) break;

    if (opt.polish && d.size() <= kPolishMaxSize && k == next_polish) {
      next_polish *= 2;
      if (!q) {
        q = d.dense_q();
        passes += 1;
      }
      if (auto p = polish(d, *q, v, L)) {
        const Vector apv = d.apply_operator(p->v);
        const double pgap = gap_at(d, p->v, apv);
        passes += 1;
        if (pgap < current_gap) {
          v = p->v;
          av = apv;
          y = v;
          ay = av;
          t = 1.0;
          restart_at = k;
          current_gap = pgap;
          consider(v, av, std::sqrt(mu * pgap));
          if (best_cert <= delta) return result(best_v, best_av, k, best_cert);
          // An exact KKT point that still misses the target sits on the
          // floating point floor of the certificate.
          if (p->kkt_exact) break;
        }
      }
    }
  }
  throw InnerSolverFailure(result(best_v, best_av, std::min(k, cap), best_cert), delta);
}

// Exact prox of (1/N) sum_i max(lo_i (t - d_i), hi_i (t - d_i)) + (t - w)^2 / (2 mu)
// in one coordinate. `order` is scratch space.
double piecewise_linear_prox(double w, double mu, const double* lo, const double* hi,
                             const double* kink, Index count, std::vector<Index>& order) {
  order.resize(static_cast<std::size_t>(count));
  std::iota(order.begin(), order.end(), Index{0});
  std::sort(order.begin(), order.end(), [&](Index a, Index b) { return kink[a] < kink[b]; });
  const double inv = 1.0 / static_cast<double>(count);
  double slope = 0.0;
  for (Index i = 0; i < count; ++i) slope += lo[i];
  slope *= inv;
  std::size_t pos = 0;
  while (pos < order.size()) {
    const double at = kink[order[pos]];
    const double t = w - mu * slope;
    if (t < at) return t;
    double jump = 0.0;
    while (pos < order.size() && kink[order[pos]] == at) {
      jump += hi[order[pos]] - lo[order[pos]];
      ++pos;
    }
    const double next = slope + jump * inv;
    if (w - at <= mu * next) return at;
    slope = next;
  }
  return w - mu * slope;
}

// Per-sample slopes s_j in [lo_j, hi_j] with sum s_j = total that certify z:
// sides away from the kink are forced, samples sitting on it share the rest.
void kink_dual(double z, double total, const double* lo, const double* hi, const double* kink,
               Index count, double* s) {
  double remainder = total;
  for (Index j = 0; j < count; ++j) {
    s[j] = z > kink[j] ? hi[j] : lo[j];
    remainder -= s[j];
  }
  for (Index j = 0; j < count; ++j) {
    if (z != kink[j]) continue;
    const double add = std::clamp(remainder, 0.0, hi[j] - lo[j]);
    s[j] += add;
    remainder -= add;
  }
}

ProxResult separable_closed_form(const SeparableConjugate& s, const Vector& w,
                                 const Minibatch& batch, double mu) {
  const Index n = w.size();
  const Index nb = batch.size();
  ProxResult r;
  r.primal.resize(n);
  r.dual.resize(n * nb);
  std::vector<double> lo(static_cast<std::size_t>(nb)), hi(lo.size()), kink(lo.size()),
      slope(lo.size());
  std::vector<Index> order;
  for (Index k = 0; k < n; ++k) {
    for (Index j = 0; j < nb; ++j) {
      const Index xi = batch.indices[j];
      lo[j] = s.lower(k, xi);
      hi[j] = s.upper(k, xi);
      kink[j] = s.kink(k, xi);
    }
    const double z = piecewise_linear_prox(w[k], mu, lo.data(), hi.data(), kink.data(), nb, order);
    r.primal[k] = z;
    kink_dual(z, static_cast<double>(nb) * (w[k] - z) / mu, lo.data(), hi.data(), kink.data(), nb,
              slope.data());
    for (Index j = 0; j < nb; ++j) r.dual[j * n + k] = slope[j];
  }
  r.closed_form = true;
  r.samples_touched = nb;
  return r;
}

}  // namespace

ProxResult solve_dual_coordinate_descent(const BoxQuadDual& d, double delta,
                                         const ProxOptions& opt) {
  if (!(delta > 0.0)) throw std::invalid_argument("dual solver: target accuracy must be > 0");
  const Index size = d.size();
  const Index n = d.primal_dimension();
  const double mu = d.mu();
  const double scale = mu / static_cast<double>(d.batch_size());
  const auto* atoms = std::get_if<Matrix>(&d.op());

  // Column i of A: an atom, or a unit vector for the block-identity operator.
  auto column_dot = [&](Index i, const Vector& x) {
    return atoms ? atoms->col(i).dot(x) : x[i % n];
  };
  auto column_axpy = [&](Index i, double a, Vector& x) {
    if (atoms) {
      x += a * atoms->col(i);
    } else {
      x[i % n] += a;
    }
  };
  Vector diag(size);
  for (Index i = 0; i < size; ++i) diag[i] = scale * (atoms ? atoms->col(i).squaredNorm() : 1.0);

  Vector v = (opt.warm_start && opt.warm_start->size() == size) ? d.project(*opt.warm_start)
                                                                 : d.project(Vector::Zero(size));
  Vector av = d.apply_operator(v);
  Index passes = 1;
  auto result = [&](const Vector& bv, const Vector& bav, Index sweeps, double cert) {
    ProxResult r;
    r.primal = d.anchor() - scale * bav;
    r.dual = bv;
    r.inner_iterations = sweeps;
    r.certified_accuracy = cert;
    r.samples_touched = passes * d.batch_size();
    return r;
  };

  double best_cert = std::sqrt(mu * gap_at(d, v, av));
  Vector best_v = v, best_av = av;
  ++passes;
  if (best_cert <= delta) return result(best_v, best_av, 0, best_cert);

  const Index cap = std::min<Index>(opt.iteration_ceiling, 100000);
  // Progress is judged over windows of sweeps: the method is linearly
  // convergent but can crawl for long stretches on ill-conditioned duals.
  // Windows are compared with each other, not with the start: a warm start
  // can sit below the certificates of the sweeps that follow it.
  constexpr Index kWindow = 500;
  constexpr int kIdleWindows = 4;
  int idle_windows = 0;
  double previous_window = std::numeric_limits<double>::infinity();
  double window_best = std::numeric_limits<double>::infinity();
  Index sweep = 1;
  for (; sweep <= cap; ++sweep) {
    for (Index i = 0; i < size; ++i) {
      const double g = d.linear()[i] - scale * column_dot(i, av);
      double vi;
      if (diag[i] > 0.0) {
        vi = std::clamp(v[i] + g / diag[i], d.lower()[i], d.upper()[i]);
      } else {
        vi = g > 0.0 ? d.upper()[i] : (g < 0.0 ? d.lower()[i] : v[i]);
      }
      if (vi != v[i]) {
        column_axpy(i, vi - v[i], av);
        v[i] = vi;
      }
    }
    passes += 2;
    // Recompute A v now and then so rounding in the running sum cannot build up.
    if (sweep % 64 == 0) av = d.apply_operator(v);
    const double cert = std::sqrt(mu * gap_at(d, v, av));
    window_best = std::min(window_best, cert);
    if (cert < best_cert) {
      best_cert = cert;
      best_v = v;
      best_av = av;
    }
    if (best_cert <= delta) return result(best_v, best_av, sweep, best_cert);
    if (sweep % kWindow == 0) {
      idle_windows = window_best > 0.9 * previous_window ? idle_windows + 1 : 0;
      if (idle_windows >= kIdleWindows) break;
      previous_window = std::min(previous_window, window_best);
      window_best = std::numeric_limits<double>::infinity();
    }
  }
  throw InnerSolverFailure(result(best_v, best_av, std::min(sweep, cap), best_cert), delta);
}

InnerSolverFailure::InnerSolverFailure(ProxResult best, double target)
    : std::runtime_error("dual solver stopped with certificate " +
                         format_real(best.certified_accuracy) + " above target " +
                         format_real(target) + " after " +
                         std::to_string(best.inner_iterations) + " iterations"),
      best_(std::move(best)),
      target_(target) {}

double fast_gradient_iteration_bound(const BoxQuadDual& dual, double delta) {
  const double n_batch = static_cast<double>(dual.batch_size());
  return std::max(0.0, 2.0 * dual.diameter() * std::sqrt(dual.mu() * dual.lambda_max() / n_batch) /
                           delta -
                       1.0);
}

double prox_gradient_iteration_bound(const BoxQuadDual& dual, double delta) {
  const double n_batch = static_cast<double>(dual.batch_size());
  const double diam = dual.diameter();
  return dual.mu() * dual.lambda_max() * diam * diam / (n_batch * delta * delta);
}

ProxResult solve_dual_fast_gradient(const BoxQuadDual& dual, double delta,
                                    const ProxOptions& options) {
  return solve_box_dual(dual, delta, options, true);
}

ProxResult solve_dual_prox_gradient(const BoxQuadDual& dual, double delta,
                                    const ProxOptions& options) {
  return solve_box_dual(dual, delta, options, false);
}

std::optional<ProxResult> axis_aligned_prox(const Matrix& atoms, const std::vector<Index>& columns,
                                            const ScalarLoss& loss, const Vector& w, double mu) {
  const Index n = w.size();
  const Index nb = static_cast<Index>(columns.size());
  // Coordinate touched by each batch atom, or -1 for a zero atom.
  std::vector<Index> coord(columns.size(), -1);
  std::vector<std::vector<Index>> groups(static_cast<std::size_t>(n));
  for (Index j = 0; j < nb; ++j) {
    const auto a = atoms.col(columns[static_cast<std::size_t>(j)]);
    for (Index k = 0; k < n; ++k) {
      if (a[k] == 0.0) continue;
      if (coord[static_cast<std::size_t>(j)] >= 0) return std::nullopt;
      coord[static_cast<std::size_t>(j)] = k;
    }
    if (coord[static_cast<std::size_t>(j)] >= 0)
      groups[static_cast<std::size_t>(coord[static_cast<std::size_t>(j)])].push_back(j);
  }

  ProxResult r;
  r.primal = w;
  r.dual.resize(nb);
  const double zero_side = -loss.kink;
  const double zero_dual = zero_side > 0.0   ? loss.upper
                           : zero_side < 0.0 ? loss.lower
                                             : std::clamp(0.0, loss.lower, loss.upper);
  for (Index j = 0; j < nb; ++j)
    if (coord[static_cast<std::size_t>(j)] < 0) r.dual[j] = zero_dual;

  // l(a t) is piecewise linear in t with kink kink/a; a < 0 swaps the slopes.
  std::vector<double> lo, hi, kink, slope, scale;
  std::vector<Index> order;
  for (Index k = 0; k < n; ++k) {
    const auto& g = groups[static_cast<std::size_t>(k)];
    if (g.empty()) continue;
    const Index count = static_cast<Index>(g.size());
    lo.resize(g.size());
    hi.resize(g.size());
    kink.resize(g.size());
    slope.resize(g.size());
    scale.resize(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double a = atoms(k, columns[static_cast<std::size_t>(g[i])]);
      scale[i] = a;
      lo[i] = a > 0.0 ? a * loss.lower : a * loss.upper;
      hi[i] = a > 0.0 ? a * loss.upper : a * loss.lower;
      kink[i] = loss.kink / a;
    }
    // (1/N) sum over the group equals (count/N) times the group mean.
    const double mu_k = mu * static_cast<double>(count) / static_cast<double>(nb);
    const double z = piecewise_linear_prox(w[k], mu_k, lo.data(), hi.data(), kink.data(), count, order);
    r.primal[k] = z;
    kink_dual(z, static_cast<double>(nb) * (w[k] - z) / mu, lo.data(), hi.data(), kink.data(), count,
              slope.data());
    for (std::size_t i = 0; i < g.size(); ++i)
      r.dual[g[i]] = std::clamp(slope[i] / scale[i], loss.lower, loss.upper);
  }
  r.closed_form = true;
  r.samples_touched = nb;
  return r;
}

ProxResult prox(const NonsmoothComponent& h, const Vector& w, const Minibatch& batch, double mu,
                double delta, const ProxOptions& options) {
  if (!(mu > 0.0)) throw std::invalid_argument("prox: mu must be > 0");
  if (!(delta > 0.0)) throw std::invalid_argument("prox: delta must be > 0");
  if (w.size() != h.dimension()) throw std::invalid_argument("prox: dimension mismatch");
  if (batch.size() < 1) throw std::invalid_argument("prox: empty batch");
  for (Index i : batch.indices)
    if (i < 0 || i >= h.sample_count())
      throw std::invalid_argument("prox: batch index outside the sample space");

  const Index nb = batch.size();
  const bool single_sample = std::all_of(batch.indices.begin(), batch.indices.end(),
                                         [&](Index i) { return i == batch.indices.front(); });

  const auto via_dual = [&]() {
    const BoxQuadDual dual = build_dual(h, w, batch, mu);
    return options.solver == DualSolver::FastGradient
               ? solve_dual_fast_gradient(dual, delta, options)
               : solve_dual_prox_gradient(dual, delta, options);
  };

  return std::visit(
      overloaded{
          [&](const ZeroFunction&) {
            ProxResult r;
            r.primal = w;
            r.dual = Vector::Zero(0);
            r.closed_form = true;
            return r;
          },
          [&](const BoxIndicator& b) {
            // The batch average of indicators is the indicator of the intersection.
            Vector lo = b.lower.col(batch.indices.front());
            Vector hi = b.upper.col(batch.indices.front());
            for (Index i : batch.indices) {
              lo = lo.cwiseMax(b.lower.col(i));
              hi = hi.cwiseMin(b.upper.col(i));
            }
            if ((lo.array() > hi.array()).any())
              throw std::invalid_argument("prox: batch boxes have an empty intersection");
            ProxResult r;
            r.primal = w.cwiseMax(lo).cwiseMin(hi);
            r.dual = Vector::Zero(0);
            r.closed_form = true;
            r.samples_touched = nb;
            return r;
          },
          [&](const LinearComposition& c) {
            if (!options.closed_form) return via_dual();
            if (!single_sample) {
              auto r = axis_aligned_prox(c.atoms, batch.indices, c.loss, w, mu);
              return r ? std::move(*r) : via_dual();
            }
            const auto a = c.atoms.col(batch.indices.front());
            const double q = mu * a.squaredNorm();
            const double s = a.dot(w) - c.loss.kink;
            double v;
            if (q > 0.0) {
              v = std::clamp(s / q, c.loss.lower, c.loss.upper);
            } else {
              v = s > 0.0 ? c.loss.upper
                          : (s < 0.0 ? c.loss.lower : std::clamp(0.0, c.loss.lower, c.loss.upper));
            }
            ProxResult r;
            r.primal = w - (mu * v) * a;
            r.dual = Vector::Constant(nb, v);
            r.closed_form = true;
            r.samples_touched = nb;
            return r;
          },
          [&](const SeparableConjugate& s) {
            if (!options.closed_form) return via_dual();
            return separable_closed_form(s, w, batch, mu);
          },
      },
      h.structure());
}

}  // namespace spgm
