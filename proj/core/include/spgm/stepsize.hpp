#pragma once

#include "spgm/types.hpp"

namespace spgm {

/// Outer stepsize mu_k for k = 1, 2, ... Every value is clamped to 1/(4 L_f).
class StepsizePolicy {
 public:
  enum class Kind { Constant, Variable, Mixed };

  /// mu = 2 mu0 / K for every k.
  static StepsizePolicy constant(double mu0, Index run_length, double lipschitz_L);
  /// mu_k = 2 mu0 / k.
  static StepsizePolicy variable(double mu0, double lipschitz_L);
  /// mu0 / (4 L_f) while k <= T1, then 2 mu0 / k.
  static StepsizePolicy mixed(double mu0, Index switch_point, double lipschitz_L);

  double operator()(Index k) const;

  Kind kind() const { return kind_; }
  double mu0() const { return mu0_; }
  Index run_length() const { return run_length_; }
  Index switch_point() const { return switch_point_; }
  double cap() const { return cap_; }

 private:
  StepsizePolicy(Kind kind, double mu0, Index run_length, Index switch_point, double lipschitz_L);

  Kind kind_;
  double mu0_;
  Index run_length_;
  Index switch_point_;
  double cap_;
};

/// Inner accuracy delta_k for the prox of step k.
class ToleranceSchedule {
 public:
  enum class Kind { Theorem, Exact, Fixed };

  /// mu^{3/2} / sqrt(N)
  static ToleranceSchedule theorem() { return ToleranceSchedule(Kind::Theorem, 0.0); }
  /// 1e-12; meant for terms whose prox has a closed form.
  static ToleranceSchedule exact() { return ToleranceSchedule(Kind::Exact, 1e-12); }
  static ToleranceSchedule fixed(double delta);

  double operator()(double mu, Index batch_size) const;
  Kind kind() const { return kind_; }

 private:
  ToleranceSchedule(Kind kind, double value) : kind_(kind), value_(value) {}

  Kind kind_;
  double value_;
};

/// ceil((4 L / (mu0 sigma)) log(2 r0^2 / eps)), floored at 0. `r0` is a
/// distance estimate ||w0 - w*|| and `eps` the target squared distance.
Index mixed_switch_point(double lipschitz_L, double sigma, double mu0, double eps, double r0);

}  // namespace spgm
