#pragma once

#include <cstdint>
#include <string>

#include "spgm/problem.hpp"
#include "spgm/prox.hpp"

namespace spgm {

struct SparseGenerationParams {
  std::uint64_t seed = 0;
  Index m = 400;
  Index n = 200;
  Index p = 200;
  double lambda = 5e-4;
  double alpha = 0.2;
  Index sparsity = 10;
  double noise = 1e-3;
};

/// min_x (1/m) sum_i [1/2 (T_i x - y_i)^2 + (alpha/2)||x||^2] + (1/p) sum_j lambda |Delta_j x|
struct SparseRepInstance {
  Matrix T;       // m x n
  Vector y;       // m
  Matrix Delta;   // p x n
  double lambda = 0.0;
  double alpha = 0.0;
  Vector x0;      // generating sparse vector
  SparseGenerationParams params;
};

/// Unit-norm Gaussian dictionary columns, s-sparse Gaussian x0, y = T x0 + noise.
/// Delta is the identity when p == n and Gaussian rows otherwise.
SparseRepInstance generate_instance(const SparseGenerationParams& params);

/// Smooth term over the m rows of T, nonsmooth term lambda |Delta_j x| over the
/// p rows of Delta. L_f is the per-sample bound max ||T_i||^2 + alpha.
CompositeProblem make_sparse_problem(const SparseRepInstance& inst);

struct SparseStep {
  Vector x;
  /// Dual point in [-1,1]^N.
  Vector z;
  Minibatch batch;
  ProxResult inner;
};

/// Gradient point y = x - (mu/N)(T_I^T (T_I x - y_I) + N alpha x), then
/// x+ = y - (mu lambda / N) Delta_I^T z with z the box dual of the l1 prox at y.
/// Draws the batch from the same space as make_sparse_problem.
SparseStep spgm_sr_step(const SparseRepInstance& inst, const Vector& x, double mu,
                        Index batch_size, Rng& rng, double delta, const ProxOptions& options = {});

/// x+ = x - (mu/N)(T_I^T (T_I x - y_I) + N alpha x) - (mu lambda/N) sum sgn(Delta_i x) Delta_i^T
/// with sgn(0) = 0.
Vector sgdm_sr_step(const SparseRepInstance& inst, const Vector& x, double mu, Index batch_size,
                    Rng& rng);

/// Plain-text container. Header lines carry the generation parameters; each
/// matrix is "name rows cols" followed by row-major C99 hexfloat values, which
/// round-trip exactly and do not depend on byte order.
void save_instance(const SparseRepInstance& inst, const std::string& path);
SparseRepInstance load_instance(const std::string& path);

}  // namespace spgm
