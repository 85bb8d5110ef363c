#include "spgm/stepsize.hpp"

#include <algorithm>
#include <cmath>

namespace spgm {

namespace {

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x))
    throw std::invalid_argument(std::string(what) + " must be positive and finite");
}

}  // namespace

StepsizePolicy::StepsizePolicy(Kind kind, double mu0, Index run_length, Index switch_point,
                               double lipschitz_L)
    : kind_(kind), mu0_(mu0), run_length_(run_length), switch_point_(switch_point) {
  require_positive(mu0, "stepsize policy: mu0");
  require_positive(lipschitz_L, "stepsize policy: L_f");
  cap_ = 1.0 / (4.0 * lipschitz_L);
}

StepsizePolicy StepsizePolicy::constant(double mu0, Index run_length, double lipschitz_L) {
  if (run_length < 1) throw std::invalid_argument("constant stepsize: K must be >= 1");
  return StepsizePolicy(Kind::Constant, mu0, run_length, 0, lipschitz_L);
}

StepsizePolicy StepsizePolicy::variable(double mu0, double lipschitz_L) {
  return StepsizePolicy(Kind::Variable, mu0, 0, 0, lipschitz_L);
}

StepsizePolicy StepsizePolicy::mixed(double mu0, Index switch_point, double lipschitz_L) {
  if (switch_point < 0) throw std::invalid_argument("mixed stepsize: T1 must be >= 0");
  return StepsizePolicy(Kind::Mixed, mu0, 0, switch_point, lipschitz_L);
}

double StepsizePolicy::operator()(Index k) const {
  if (k < 1) throw std::invalid_argument("stepsize policy: iterations are counted from 1");
  const double kd = static_cast<double>(k);
  double mu = 0.0;
  switch (kind_) {
    case Kind::Constant:
      mu = 2.0 * mu0_ / static_cast<double>(run_length_);
      break;
    case Kind::Variable:
      mu = 2.0 * mu0_ / kd;
      break;
    case Kind::Mixed:
      mu = k <= switch_point_ ? mu0_ * cap_ : 2.0 * mu0_ / kd;
      break;
  }
  return std::min(mu, cap_);
}

ToleranceSchedule ToleranceSchedule::fixed(double delta) {
  require_positive(delta, "fixed tolerance");
  return ToleranceSchedule(Kind::Fixed, delta);
}

double ToleranceSchedule::operator()(double mu, Index batch_size) const {
  if (kind_ != Kind::Theorem) return value_;
  require_positive(mu, "tolerance schedule: mu");
  if (batch_size < 1) throw std::invalid_argument("tolerance schedule: batch size must be >= 1");
  return mu * std::sqrt(mu) / std::sqrt(static_cast<double>(batch_size));
}

Index mixed_switch_point(double lipschitz_L, double sigma, double mu0, double eps, double r0) {
  if (sigma == 0.0)
    throw PolicyInapplicable("mixed stepsize needs strong convexity (sigma_f = 0)");
  require_positive(lipschitz_L, "mixed_switch_point: L_f");
  require_positive(sigma, "mixed_switch_point: sigma_f");
  require_positive(mu0, "mixed_switch_point: mu0");
  require_positive(eps, "mixed_switch_point: eps");
  require_positive(r0, "mixed_switch_point: r0");
  const double t = (4.0 * lipschitz_L / (mu0 * sigma)) * std::log(2.0 * r0 * r0 / eps);
  return t <= 0.0 ? 0 : static_cast<Index>(std::ceil(t));
}

}  // namespace spgm
