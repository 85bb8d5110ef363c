#include "oracles.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace oracle {

double soft_threshold(double t, double tau) {
  const double mag = std::abs(t) - tau;
  if (mag <= 0.0) return 0.0;
  return t > 0.0 ? mag : -mag;
}

double grid_argmin(const std::function<double(double)>& f, double lo, double hi, double step) {
  double best_x = lo;
  double best = f(lo);
  const long long count = static_cast<long long>(std::floor((hi - lo) / step));
  for (long long i = 1; i <= count; ++i) {
    const double x = lo + static_cast<double>(i) * step;
    const double v = f(x);
    if (v < best) {
      best = v;
      best_x = x;
    }
  }
  if (f(hi) < best) best_x = hi;
  return best_x;
}

Vec box_qp_enumerate(const Mat& Q, const Vec& b, const Vec& lo, const Vec& hi) {
  const int d = static_cast<int>(b.size());
  long long patterns = 1;
  for (int i = 0; i < d; ++i) patterns *= 3;
  double best_value = -std::numeric_limits<double>::infinity();
  Vec best = lo;
  const double tol = 1e-9;
  for (long long code = 0; code < patterns; ++code) {
    std::vector<int> state(d);
    long long c = code;
    for (int i = 0; i < d; ++i) {
      state[i] = static_cast<int>(c % 3);  // 0 lower, 1 free, 2 upper
      c /= 3;
    }
    Vec v = Vec::Zero(d);
    std::vector<int> free;
    for (int i = 0; i < d; ++i) {
      if (state[i] == 0) v[i] = lo[i];
      else if (state[i] == 2) v[i] = hi[i];
      else free.push_back(i);
    }
    if (!free.empty()) {
      const int f = static_cast<int>(free.size());
      Mat qff(f, f);
      Vec rhs(f);
      for (int a = 0; a < f; ++a) {
        rhs[a] = b[free[a]];
        for (int j = 0; j < d; ++j)
          if (state[j] != 1) rhs[a] -= Q(free[a], j) * v[j];
        for (int bb = 0; bb < f; ++bb) qff(a, bb) = Q(free[a], free[bb]);
      }
      const Vec x = qff.completeOrthogonalDecomposition().solve(rhs);
      if ((qff * x - rhs).norm() > 1e-8 * (1.0 + rhs.norm())) continue;
      bool feasible = true;
      for (int a = 0; a < f; ++a) {
        if (x[a] < lo[free[a]] - tol || x[a] > hi[free[a]] + tol) feasible = false;
        v[free[a]] = std::min(std::max(x[a], lo[free[a]]), hi[free[a]]);
      }
      if (!feasible) continue;
    }
    // Sign conditions on the multipliers of the bound coordinates.
    const Vec g = b - Q * v;
    bool kkt = true;
    for (int i = 0; i < d; ++i) {
      if (state[i] == 0 && g[i] > 1e-8 * (1.0 + b.cwiseAbs().maxCoeff())) kkt = false;
      if (state[i] == 2 && g[i] < -1e-8 * (1.0 + b.cwiseAbs().maxCoeff())) kkt = false;
    }
    if (!kkt) continue;
    const double value = -0.5 * v.dot(Q * v) + b.dot(v);
    if (value > best_value) {
      best_value = value;
      best = v;
    }
  }
  return best;
}

Vec prox_by_enumeration(const Mat& A, const Vec& w, double mu, const Vec& lo, const Vec& hi,
                        const Vec& kink) {
  const double n_batch = static_cast<double>(A.cols());
  const Mat Q = (mu / n_batch) * A.transpose() * A;
  const Vec b = A.transpose() * w - kink;
  const Vec v = box_qp_enumerate(Q, b, lo, hi);
  return w - (mu / n_batch) * A * v;
}

Vec finite_difference_gradient(const std::function<double(const Vec&)>& f, const Vec& x, double h) {
  Vec g(x.size());
  for (int i = 0; i < x.size(); ++i) {
    Vec up = x, down = x;
    up[i] += h;
    down[i] -= h;
    g[i] = (f(up) - f(down)) / (2.0 * h);
  }
  return g;
}

long long mixed_switch_direct(double L, double sigma, double mu0, double eps, double r0) {
  const long double ratio = 4.0L * static_cast<long double>(L) /
                            (static_cast<long double>(mu0) * static_cast<long double>(sigma));
  const long double lg = std::log(2.0L * static_cast<long double>(r0) * static_cast<long double>(r0) /
                                  static_cast<long double>(eps));
  const long double t = ratio * lg;
  return t <= 0.0L ? 0 : static_cast<long long>(std::ceil(t));
}

}  // namespace oracle
