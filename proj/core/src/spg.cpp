#include "spgm/spg.hpp"

#include <chrono>

namespace spgm {

SolverState initial_state(Vector w0, std::uint64_t seed) {
  SolverState s;
  s.w = std::move(w0);
  s.rng.seed(seed);
  return s;
}

StepFailure::StepFailure(const InnerSolverFailure& cause, SolverState state)
    : std::runtime_error(std::string("step ") + std::to_string(state.k) + ": " + cause.what()),
      state_(std::move(state)),
      target_(cause.target()) {}

SolverState spgm_step(const CompositeProblem& p, SolverState s, const StepsizePolicy& policy,
                      const ToleranceSchedule& tol, Index batch_size,
                      const StepOptions& options) {
  if (s.w.size() != p.dimension()) throw std::invalid_argument("spgm_step: dimension mismatch");
  const Index k = s.k + 1;
  const double mu = policy(k);
  const double delta = tol(mu, batch_size);
  const Minibatch batch = sample_minibatch(s.rng, p.sample_count(), batch_size);

  const Vector anchor = s.w - mu * minibatch_gradient(p, s.w, batch);

  ProxOptions prox_options = options.prox;
  if (options.warm_start && s.last_prox.dual.size() > 0) prox_options.warm_start = &s.last_prox.dual;

  ProxResult result;
  bool failed = false;
  std::optional<InnerSolverFailure> failure;
  try {
    result = prox(p.nonsmooth(), anchor, p.nonsmooth_batch(batch), mu, delta, prox_options);
  } catch (const InnerSolverFailure& e) {
    result = e.best();
    failed = true;
    failure.emplace(e);
  }

  s.w = result.primal;
  s.k = k;
  s.outer_samples += batch_size;
  s.inner_samples += result.samples_touched;
  s.last_mu = mu;
  s.last_delta = delta;
  s.inner_failure = failed;
  s.last_prox = std::move(result);
  if (failed && options.on_failure == FailurePolicy::Abort) throw StepFailure(*failure, std::move(s));
  return s;
}

SolverState sgdm_step(const CompositeProblem& p, SolverState s, const StepsizePolicy& policy,
                      Index batch_size) {
  if (s.w.size() != p.dimension()) throw std::invalid_argument("sgdm_step: dimension mismatch");
  const Index k = s.k + 1;
  const double mu = policy(k);
  const Minibatch batch = sample_minibatch(s.rng, p.sample_count(), batch_size);
  const Vector direction = minibatch_gradient(p, s.w, batch) + minibatch_subgradient(p, s.w, batch);
  s.w -= mu * direction;
  s.k = k;
  s.outer_samples += batch_size;
  s.last_mu = mu;
  s.last_delta = 0.0;
  s.inner_failure = false;
  return s;
}

Trajectory run(const CompositeProblem& p, const Vector& w0, const StepsizePolicy& policy,
               const ToleranceSchedule& tol, Index batch_size, const StopRule& stop,
               Method method, std::uint64_t seed, const RunOptions& options) {
  if (!stop.max_iterations && !stop.reference && !stop.sample_budget)
    throw std::invalid_argument("run: stop rule needs max iterations, a reference or a budget");
  if (stop.max_iterations && *stop.max_iterations < 0)
    throw std::invalid_argument("run: max iterations must be >= 0");
  if (stop.sample_budget && *stop.sample_budget < 0)
    throw std::invalid_argument("run: sample budget must be >= 0");
  if (stop.reference) {
    if (stop.reference->size() != p.dimension())
      throw std::invalid_argument("run: reference dimension mismatch");
    if (!(stop.eps > 0.0)) throw std::invalid_argument("run: eps must be > 0");
  }
  if (options.stride < 1) throw std::invalid_argument("run: stride must be >= 1");
  if (batch_size < 1) throw std::invalid_argument("run: batch size must be >= 1");
  if (w0.size() != p.dimension()) throw std::invalid_argument("run: dimension mismatch");

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  Trajectory t;
  SolverState s = initial_state(w0, seed);

  auto record = [&](const SolverState& st) {
    IterateRecord r;
    r.k = st.k;
    r.w = st.w;
    r.mu = st.last_mu;
    r.delta = st.last_delta;
    r.outer_samples = st.outer_samples;
    r.inner_samples = st.inner_samples;
    r.inner_iterations = st.last_prox.inner_iterations;
    r.certificate = st.last_prox.certified_accuracy;
    r.inner_failure = st.inner_failure;
    r.seconds = std::chrono::duration<double>(Clock::now() - start).count();
    t.records.push_back(std::move(r));
  };
  auto done = [&](const SolverState& st) {
    if (stop.reference && (st.w - *stop.reference).norm() <= stop.eps) {
      if (!t.reached_eps_at) t.reached_eps_at = st.k;
      return true;
    }
    if (stop.max_iterations && st.k >= *stop.max_iterations) return true;
    if (stop.sample_budget && st.outer_samples >= *stop.sample_budget)
      return true;
    return false;
  };

  record(s);
  while (!done(s)) {
    s = method == Method::SPGM ? spgm_step(p, std::move(s), policy, tol, batch_size, options.step)
                               : sgdm_step(p, std::move(s), policy, batch_size);
    if (s.k % options.stride == 0) record(s);
  }
  if (t.records.back().k != s.k) record(s);
  t.final_state = std::move(s);
  return t;
}

}  // namespace spgm
