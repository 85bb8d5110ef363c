#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "spgm/box_dual.hpp"

namespace spgm {

enum class DualSolver { FastGradient, ProjectedGradient };

struct ProxOptions {
  DualSolver solver = DualSolver::FastGradient;
  /// Use exact formulas when the batch admits one (zero term, box indicator,
  /// single distinct sample, separable piecewise-linear terms).
  bool closed_form = true;
  /// Periodically try to finish the dual solve with an active-set KKT solve.
  bool polish = true;
  /// Previous dual point; used (after projection) only when its size matches.
  const Vector* warm_start = nullptr;
  Index iteration_ceiling = 1'000'000;
};

struct ProxResult {
  Vector primal;
  Vector dual;
  Index inner_iterations = 0;
  /// Upper bound on ||primal - prox_{h,mu}(w; I)||.
  double certified_accuracy = 0.0;
  Index samples_touched = 0;
  bool closed_form = false;
};

/// The dual solver hit its iteration cap (or floating point floor) before the
/// certificate reached the target. Carries the best iterate found.
class InnerSolverFailure : public std::runtime_error {
 public:
  InnerSolverFailure(ProxResult best, double target);

  const ProxResult& best() const { return best_; }
  double target() const { return target_; }

 private:
  ProxResult best_;
  double target_;
};

/// Iterations the accelerated method needs, by its worst-case rate, to
/// certify primal accuracy delta. Reported as a diagnostic.
double fast_gradient_iteration_bound(const BoxQuadDual& dual, double delta);
/// Same for plain projected gradient.
double prox_gradient_iteration_bound(const BoxQuadDual& dual, double delta);

/// Accelerated projected gradient (FISTA with adaptive restart) on the dual.
ProxResult solve_dual_fast_gradient(const BoxQuadDual& dual, double delta,
                                    const ProxOptions& options = {});

/// Projected gradient on the dual; stops on the gradient-mapping certificate.
ProxResult solve_dual_prox_gradient(const BoxQuadDual& dual, double delta,
                                    const ProxOptions& options = {});

/// Cyclic exact coordinate maximization on the dual. Not one of the SPG-M
/// inner solvers; used to push full-batch reference solves to high accuracy.
ProxResult solve_dual_coordinate_descent(const BoxQuadDual& dual, double delta,
                                         const ProxOptions& options = {});

/// Exact minibatch prox for a linear composition whose batch atoms (the given
/// columns of `atoms`) each have at most one nonzero entry. The problem then
/// splits into one-dimensional piecewise-linear proxes. Returns nothing when
/// some atom has two or more nonzeros.
std::optional<ProxResult> axis_aligned_prox(const Matrix& atoms, const std::vector<Index>& columns,
                                            const ScalarLoss& loss, const Vector& w, double mu);

/// prox_{h,mu}(w; batch) = argmin_z (1/N) sum_i h(z; i) + 1/(2 mu) ||z - w||^2
/// to accuracy delta. Batch indices address h's sample space.
ProxResult prox(const NonsmoothComponent& h, const Vector& w, const Minibatch& batch, double mu,
                double delta, const ProxOptions& options = {});

}  // namespace spgm
