#pragma once

#include <cstdint>
#include <filesystem>
#include <future>
#include <map>
#include <mutex>
#include <optional>

#include "spgm/problem.hpp"

namespace spgm {

struct ReferenceOptions {
  /// Target norm of the gradient mapping L (x - prox_{h,1/L}(x - grad f(x)/L)).
  double tolerance = 1e-9;
  Index max_iterations = 200000;
};

struct ReferenceResult {
  Vector w;
  /// Gradient-mapping norm at the returned point (0 for a certified exact prox).
  double certificate = 0.0;
  Index iterations = 0;
  bool converged = false;
};

/// Full-batch accelerated proximal gradient with backtracking on L and
/// strong-convexity momentum. When f is a scaled squared norm the minimizer
/// is prox_{h,1/lambda}(0) and is computed with one dual solve.
ReferenceResult compute_reference(const CompositeProblem& p, const ReferenceOptions& options = {});

/// Disk cache keyed by the problem's content hash and the tolerance. Files use
/// hexfloat so a hit reproduces the solution bitwise. Concurrent requests for
/// the same key share one computation.
class ReferenceCache {
 public:
  /// Uses SPGM_CACHE_DIR when `directory` is empty; without either, caches in memory only.
  explicit ReferenceCache(std::optional<std::filesystem::path> directory = std::nullopt);

  ReferenceResult get(const CompositeProblem& p, const ReferenceOptions& options = {});
  const std::optional<std::filesystem::path>& directory() const { return directory_; }
  /// Number of full computations performed by this cache object.
  Index computations() const;

 private:
  std::optional<std::filesystem::path> directory_;
  mutable std::mutex mutex_;
  std::map<std::uint64_t, std::shared_future<ReferenceResult>> entries_;
  Index computations_ = 0;
};

void save_reference(const ReferenceResult& r, std::uint64_t key, const std::filesystem::path& file);
std::optional<ReferenceResult> load_reference(std::uint64_t key, const std::filesystem::path& file);

}  // namespace spgm
