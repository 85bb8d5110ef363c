#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "spgm/problem.hpp"
#include "spgm/prox.hpp"
#include "spgm/stepsize.hpp"

namespace spgm {

enum class Method { SPGM, SGDM };
enum class FailurePolicy { Abort, Continue };

struct SolverState {
  Vector w;
  Index k = 0;
  Index outer_samples = 0;
  Index inner_samples = 0;
  Rng rng;
  ProxResult last_prox;
  double last_mu = 0.0;
  double last_delta = 0.0;
  /// The last prox missed its target and its best iterate was accepted.
  bool inner_failure = false;
};

SolverState initial_state(Vector w0, std::uint64_t seed);

struct StepOptions {
  ProxOptions prox;
  FailurePolicy on_failure = FailurePolicy::Abort;
  /// Seed the dual solver with the previous step's dual point.
  bool warm_start = true;
};

/// Raised by spgm_step under FailurePolicy::Abort. `state()` is the step that
/// would have been taken with the best inner iterate.
class StepFailure : public std::runtime_error {
 public:
  StepFailure(const InnerSolverFailure& cause, SolverState state);
  const SolverState& state() const { return state_; }
  double target() const { return target_; }

 private:
  SolverState state_;
  double target_;
};

/// w+ = prox_{h,mu_k}(w - (mu_k/N) sum grad f(w; i); I) to accuracy delta_k.
SolverState spgm_step(const CompositeProblem& p, SolverState s, const StepsizePolicy& policy,
                      const ToleranceSchedule& tol, Index batch_size,
                      const StepOptions& options = {});

/// w+ = w - mu_k [(1/N) sum grad f(w; i) + (1/N) sum g_h(w; i)].
SolverState sgdm_step(const CompositeProblem& p, SolverState s, const StepsizePolicy& policy,
                      Index batch_size);

/// Stops as soon as any configured condition holds; at least one is required.
struct StopRule {
  std::optional<Index> max_iterations;
  std::optional<Vector> reference;
  /// Distance threshold ||w - reference|| <= eps.
  double eps = 0.0;
  /// Outer sample evaluations N * k.
  std::optional<Index> sample_budget;
};

struct IterateRecord {
  Index k = 0;
  Vector w;
  double mu = 0.0;
  double delta = 0.0;
  Index outer_samples = 0;
  Index inner_samples = 0;
  Index inner_iterations = 0;
  double certificate = 0.0;
  bool inner_failure = false;
  double seconds = 0.0;
};

struct RunOptions {
  /// Record every `stride`-th iterate; the initial and final ones are always kept.
  Index stride = 1;
  StepOptions step;
};

struct Trajectory {
  std::vector<IterateRecord> records;
  /// First k with ||w_k - reference|| <= eps, when a reference was given.
  std::optional<Index> reached_eps_at;
  SolverState final_state;
};

Trajectory run(const CompositeProblem& p, const Vector& w0, const StepsizePolicy& policy,
               const ToleranceSchedule& tol, Index batch_size, const StopRule& stop,
               Method method, std::uint64_t seed, const RunOptions& options = {});

}  // namespace spgm
