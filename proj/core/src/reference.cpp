#include "spgm/reference.hpp"

#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "spgm/prox.hpp"
#include "spgm/terms.hpp"

namespace spgm {

namespace {

constexpr double kInnerAccuracy = 1e-12;

// Prox of the full-sample mean of h. The dual certificate bottoms out near
// 1e-8 sqrt(mu) in floating point; past that the best iterate found is the
// most accurate answer available.
Vector full_prox(const NonsmoothComponent& h, const Vector& w, double mu, const Vector* warm,
                 Vector* dual_out) {
  ProxOptions options;
  options.warm_start = warm;
  ProxResult r;
  try {
    r = prox(h, w, Minibatch::full(h.sample_count()), mu, kInnerAccuracy, options);
  } catch (const InnerSolverFailure& e) {
    r = e.best();
    // Ill-conditioned full-batch duals stall first-order methods; finish with
    // exact coordinate maximization from the best dual point.
    ProxOptions refine;
    refine.warm_start = &e.best().dual;
    try {
      r = solve_dual_coordinate_descent(build_dual(h, w, Minibatch::full(h.sample_count()), mu),
                                        kInnerAccuracy, refine);
    } catch (const InnerSolverFailure& cd) {
      if (cd.best().certified_accuracy < r.certified_accuracy) r = cd.best();
    }
  }
  if (dual_out) *dual_out = std::move(r.dual);
  return std::move(r.primal);
}

double mean_smooth_value(const SmoothTerm& f, const Vector& w) {
  double total = 0.0;
  for (Index i = 0; i < f.sample_count(); ++i) total += f.value(w, i);
  return total / static_cast<double>(f.sample_count());
}

Vector mean_smooth_gradient(const SmoothTerm& f, const Vector& w) {
  Vector g = Vector::Zero(w.size());
  const double scale = 1.0 / static_cast<double>(f.sample_count());
  for (Index i = 0; i < f.sample_count(); ++i) f.accumulate_gradient(w, i, scale, g);
  return g;
}

std::string hex(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%a", x);
  return buf;
}

}  // namespace

ReferenceResult compute_reference(const CompositeProblem& p, const ReferenceOptions& options) {
  if (!(options.tolerance > 0.0)) throw std::invalid_argument("compute_reference: tolerance must be > 0");
  const Index n = p.dimension();
  const SmoothTerm& f = p.smooth();
  const NonsmoothComponent& h = p.nonsmooth();

  if (const auto* sq = dynamic_cast<const ScaledSquaredNorm*>(&f)) {
    ReferenceResult r;
    Vector dual;
    r.w = full_prox(h, Vector::Zero(n), 1.0 / sq->lambda(), nullptr, &dual);
    r.iterations = 1;
    // Gradient mapping with step 1/(2 lambda), so the check is a fresh solve.
    const double L = 2.0 * sq->lambda();
    const Vector step = full_prox(h, r.w - sq->lambda() * r.w / L, 1.0 / L, &dual, nullptr);
    r.certificate = L * (r.w - step).norm();
    r.converged = r.certificate <= options.tolerance;
    return r;
  }

  const double sigma = p.strong_convexity_sigma();
  double L = std::max(p.lipschitz_L() / 64.0, 1e-12);
  Vector x = Vector::Zero(n);
  Vector y = x;
  Vector dual;
  ReferenceResult r;
  for (Index k = 1; k <= options.max_iterations; ++k) {
    const double fy = mean_smooth_value(f, y);
    const Vector gy = mean_smooth_gradient(f, y);
    Vector z;
    for (;;) {
      Vector next_dual;
      z = full_prox(h, y - gy / L, 1.0 / L, dual.size() ? &dual : nullptr, &next_dual);
      const Vector d = z - y;
      const double model = fy + gy.dot(d) + 0.5 * L * d.squaredNorm();
      if (mean_smooth_value(f, z) <= model + 1e-12 * std::abs(model)) {
        dual = std::move(next_dual);
        break;
      }
      L *= 2.0;
    }
    const double gm = L * (y - z).norm();
    r.iterations = k;
    if (gm <= options.tolerance) {
      r.w = z;
      r.certificate = gm;
      r.converged = true;
      return r;
    }
    const double q = sigma > 0.0 ? std::sqrt(std::min(1.0, sigma / L)) : 0.0;
    const double beta = sigma > 0.0 ? (1.0 - q) / (1.0 + q) : (static_cast<double>(k) - 1.0) / (static_cast<double>(k) + 2.0);
    // Restart on an increase of the gradient-step direction, as a safeguard.
    const bool restart = (y - z).dot(z - x) > 0.0;
    y = restart ? z : Vector(z + beta * (z - x));
    x = std::move(z);
    r.certificate = gm;
  }
  r.w = x;
  r.converged = false;
  return r;
}

void save_reference(const ReferenceResult& r, std::uint64_t key, const std::filesystem::path& file) {
  const auto tmp = file.string() + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write reference cache file " + tmp);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, key);
    out << "spgm-reference 1\nkey " << buf << "\niterations " << r.iterations << "\ncertificate "
        << hex(r.certificate) << "\nconverged " << (r.converged ? 1 : 0) << "\nn " << r.w.size()
        << '\n';
    for (Index i = 0; i < r.w.size(); ++i) out << hex(r.w[i]) << '\n';
  }
  std::filesystem::rename(tmp, file);
}

std::optional<ReferenceResult> load_reference(std::uint64_t key, const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) return std::nullopt;
  std::string magic, version, field, key_text, cert_text;
  ReferenceResult r;
  int converged = 0;
  Index n = 0;
  if (!(in >> magic >> version) || magic != "spgm-reference" || version != "1") return std::nullopt;
  if (!(in >> field >> key_text) || field != "key") return std::nullopt;
  if (std::strtoull(key_text.c_str(), nullptr, 16) != key) return std::nullopt;
  if (!(in >> field >> r.iterations) || field != "iterations") return std::nullopt;
  if (!(in >> field >> cert_text) || field != "certificate") return std::nullopt;
  r.certificate = std::strtod(cert_text.c_str(), nullptr);
  if (!(in >> field >> converged) || field != "converged") return std::nullopt;
  if (!(in >> field >> n) || field != "n" || n < 0) return std::nullopt;
  r.converged = converged != 0;
  r.w.resize(n);
  std::string token;
  for (Index i = 0; i < n; ++i) {
    if (!(in >> token)) return std::nullopt;
    r.w[i] = std::strtod(token.c_str(), nullptr);
  }
  return r;
}

ReferenceCache::ReferenceCache(std::optional<std::filesystem::path> directory)
    : directory_(std::move(directory)) {
  if (!directory_) {
    if (const char* env = std::getenv("SPGM_CACHE_DIR"); env && *env) directory_ = env;
  }
}

Index ReferenceCache::computations() const {
  std::lock_guard lock(mutex_);
  return computations_;
}

ReferenceResult ReferenceCache::get(const CompositeProblem& p, const ReferenceOptions& options) {
  ContentHash hash;
  hash.integer(static_cast<std::int64_t>(p.content_hash()));
  hash.scalar(options.tolerance);
  hash.integer(options.max_iterations);
  const std::uint64_t key = hash.value();

  std::promise<ReferenceResult> promise;
  {
    std::unique_lock lock(mutex_);
    if (auto it = entries_.find(key); it != entries_.end()) {
      auto future = it->second;
      lock.unlock();
      return future.get();
    }
    entries_.emplace(key, promise.get_future().share());
  }

  try {
    std::optional<std::filesystem::path> file;
    if (directory_) {
      std::filesystem::create_directories(*directory_);
      char name[40];
      std::snprintf(name, sizeof name, "ref_%016" PRIx64 ".txt", key);
      file = *directory_ / name;
      if (auto hit = load_reference(key, *file)) {
        promise.set_value(*hit);
        return *hit;
      }
    }
    ReferenceResult r = compute_reference(p, options);
    {
      std::lock_guard lock(mutex_);
      ++computations_;
    }
    if (file) save_reference(r, key, *file);
    // Serve the same bits a later cache hit would.
    if (file) {
      if (auto reread = load_reference(key, *file)) r = *reread;
    }
    promise.set_value(r);
    return r;
  } catch (...) {
    promise.set_exception(std::current_exception());
    std::lock_guard lock(mutex_);
    entries_.erase(key);
    throw;
  }
}

}  // namespace spgm
