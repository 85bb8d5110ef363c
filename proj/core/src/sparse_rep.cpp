#include "spgm/sparse_rep.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <numeric>
#include <sstream>

#include "spgm/terms.hpp"

namespace spgm {

namespace {

struct SampleMap {
  Index space;
  Index m;
  Index p;
};

SampleMap sample_map(const SparseRepInstance& inst) {
  const Index m = inst.T.rows();
  const Index p = inst.Delta.rows();
  return {std::lcm(m, p), m, p};
}

Vector gradient_point(const SparseRepInstance& inst, const Vector& x, double mu,
                      const Minibatch& batch, Index m) {
  const double nb = static_cast<double>(batch.size());
  Vector g = nb * inst.alpha * x;
  for (Index i : batch.indices) {
    const Index r = i % m;
    g += (inst.T.row(r).dot(x) - inst.y[r]) * inst.T.row(r).transpose();
  }
  return x - (mu / nb) * g;
}

std::vector<Index> iota_columns(Index count) {
  std::vector<Index> c(static_cast<std::size_t>(count));
  std::iota(c.begin(), c.end(), Index{0});
  return c;
}

void write_matrix(std::ostream& out, const char* name, const Matrix& a) {
  out << name << ' ' << a.rows() << ' ' << a.cols() << '\n';
  char buf[64];
  for (Index r = 0; r < a.rows(); ++r) {
    for (Index c = 0; c < a.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%a", a(r, c));
      out << (c ? " " : "") << buf;
    }
    out << '\n';
  }
}

double parse_double(const std::string& token) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw DatasetError("bad number '" + token + "'");
  return v;
}

Matrix read_matrix(std::istream& in, const std::string& expected) {
  std::string name;
  Index rows = 0, cols = 0;
  if (!(in >> name >> rows >> cols) || name != expected || rows < 0 || cols < 0)
    throw DatasetError("instance file: expected matrix '" + expected + "'");
  Matrix a(rows, cols);
  std::string token;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      if (!(in >> token)) throw DatasetError("instance file: truncated matrix '" + expected + "'");
      a(r, c) = parse_double(token);
    }
  return a;
}

}  // namespace

SparseRepInstance generate_instance(const SparseGenerationParams& params) {
  const auto& [seed, m, n, p, lambda, alpha, s, noise] = params;
  if (m < 1 || n < 1 || p < 1) throw std::invalid_argument("generate_instance: sizes must be >= 1");
  if (s < 1 || s > n) throw std::invalid_argument("generate_instance: sparsity must be in [1, n]");
  if (lambda < 0.0 || alpha < 0.0 || noise < 0.0)
    throw std::invalid_argument("generate_instance: lambda, alpha and noise must be >= 0");

  Rng rng(seed);
  std::normal_distribution<double> normal;
  SparseRepInstance inst;
  inst.params = params;
  inst.lambda = lambda;
  inst.alpha = alpha;

  inst.T.resize(m, n);
  for (Index c = 0; c < n; ++c) {
    for (Index r = 0; r < m; ++r) inst.T(r, c) = normal(rng);
    const double norm = inst.T.col(c).norm();
    if (norm > 0.0) inst.T.col(c) /= norm;
  }

  std::vector<Index> support(static_cast<std::size_t>(n));
  std::iota(support.begin(), support.end(), Index{0});
  std::shuffle(support.begin(), support.end(), rng);
  inst.x0 = Vector::Zero(n);
  for (Index j = 0; j < s; ++j) inst.x0[support[static_cast<std::size_t>(j)]] = normal(rng);

  inst.y = inst.T * inst.x0;
  if (noise > 0.0)
    for (Index r = 0; r < m; ++r) inst.y[r] += noise * normal(rng);

  if (p == n) {
    inst.Delta = Matrix::Identity(n, n);
  } else {
    inst.Delta.resize(p, n);
    for (Index r = 0; r < p; ++r)
      for (Index c = 0; c < n; ++c) inst.Delta(r, c) = normal(rng);
  }
  return inst;
}

CompositeProblem make_sparse_problem(const SparseRepInstance& inst) {
  auto smooth = std::make_shared<RidgeLeastSquares>(inst.T, inst.y, inst.alpha);
  auto nonsmooth = std::make_shared<NonsmoothComponent>(
      inst.T.cols(),
      LinearComposition{Matrix(inst.lambda * inst.Delta.transpose()), ScalarLoss::absolute()});
  const double L = smooth->per_sample_lipschitz();
  const double sigma = smooth->mean_strong_convexity();
  return CompositeProblem(std::move(smooth), std::move(nonsmooth), L, sigma);
}

SparseStep spgm_sr_step(const SparseRepInstance& inst, const Vector& x, double mu,
                        Index batch_size, Rng& rng, double delta, const ProxOptions& options) {
  if (!(mu > 0.0)) throw std::invalid_argument("spgm_sr_step: mu must be > 0");
  if (x.size() != inst.T.cols()) throw std::invalid_argument("spgm_sr_step: dimension mismatch");
  const SampleMap map = sample_map(inst);
  SparseStep step;
  step.batch = sample_minibatch(rng, map.space, batch_size);
  const Vector yk = gradient_point(inst, x, mu, step.batch, map.m);

  // Columns lambda Delta_i^T of the dual operator.
  Matrix atoms(inst.T.cols(), batch_size);
  for (Index j = 0; j < batch_size; ++j)
    atoms.col(j) = inst.lambda * inst.Delta.row(step.batch.indices[j] % map.p).transpose();

  const bool single = std::all_of(step.batch.indices.begin(), step.batch.indices.end(), [&](Index i) {
    return i % map.p == step.batch.indices.front() % map.p;
  });
  if (options.closed_form && single) {
    const double q = mu * atoms.col(0).squaredNorm();
    const double b = atoms.col(0).dot(yk);
    const double z = q > 0.0 ? std::clamp(b / q, -1.0, 1.0) : (b > 0.0 ? 1.0 : (b < 0.0 ? -1.0 : 0.0));
    step.z = Vector::Constant(batch_size, z);
    step.inner.closed_form = true;
    step.inner.samples_touched = batch_size;
  } else if (auto exact = options.closed_form
                              ? axis_aligned_prox(atoms, iota_columns(batch_size), ScalarLoss::absolute(),
                                                  yk, mu)
                              : std::nullopt) {
    step.inner = std::move(*exact);
    step.z = step.inner.dual;
  } else {
    const BoxQuadDual dual(mu, batch_size, yk, atoms, Vector::Constant(batch_size, -1.0),
                           Vector::Ones(batch_size), Vector::Zero(batch_size));
    step.inner = options.solver == DualSolver::FastGradient
                     ? solve_dual_fast_gradient(dual, delta, options)
                     : solve_dual_prox_gradient(dual, delta, options);
    step.z = step.inner.dual;
  }
  step.x = yk - (mu / static_cast<double>(batch_size)) * (atoms * step.z);
  step.inner.primal = step.x;
  step.inner.dual = step.z;
  return step;
}

Vector sgdm_sr_step(const SparseRepInstance& inst, const Vector& x, double mu, Index batch_size,
                    Rng& rng) {
  if (x.size() != inst.T.cols()) throw std::invalid_argument("sgdm_sr_step: dimension mismatch");
  const SampleMap map = sample_map(inst);
  const Minibatch batch = sample_minibatch(rng, map.space, batch_size);
  Vector next = gradient_point(inst, x, mu, batch, map.m);
  const double scale = mu * inst.lambda / static_cast<double>(batch_size);
  for (Index i : batch.indices) {
    const auto row = inst.Delta.row(i % map.p);
    const double t = row.dot(x);
    const double sgn = t > 0.0 ? 1.0 : (t < 0.0 ? -1.0 : 0.0);
    next -= (scale * sgn) * row.transpose();
  }
  return next;
}

void save_instance(const SparseRepInstance& inst, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DatasetError("cannot write instance '" + path + "'");
  const auto& g = inst.params;
  char buf[256];
  out << "spgm-sparse-instance 1\n";
  std::snprintf(buf, sizeof buf,
                "seed %" PRIu64 " m %lld n %lld p %lld sparsity %lld noise %a\n", g.seed,
                static_cast<long long>(g.m), static_cast<long long>(g.n),
                static_cast<long long>(g.p), static_cast<long long>(g.sparsity), g.noise);
  out << buf;
  std::snprintf(buf, sizeof buf, "lambda %a alpha %a\n", inst.lambda, inst.alpha);
  out << buf;
  write_matrix(out, "T", inst.T);
  write_matrix(out, "y", inst.y);
  write_matrix(out, "Delta", inst.Delta);
  write_matrix(out, "x0", inst.x0);
  if (!out) throw DatasetError("failed writing instance '" + path + "'");
}

SparseRepInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open instance '" + path + "'");
  std::string magic, version;
  if (!(in >> magic >> version) || magic != "spgm-sparse-instance" || version != "1")
    throw DatasetError("'" + path + "' is not a sparse instance file");
  SparseRepInstance inst;
  auto& g = inst.params;
  std::string key, value;
  auto expect = [&](const char* name) {
    if (!(in >> key >> value) || key != name)
      throw DatasetError("instance file: expected field '" + std::string(name) + "'");
    return value;
  };
  g.seed = std::stoull(expect("seed"));
  g.m = std::stoll(expect("m"));
  g.n = std::stoll(expect("n"));
  g.p = std::stoll(expect("p"));
  g.sparsity = std::stoll(expect("sparsity"));
  g.noise = parse_double(expect("noise"));
  inst.lambda = g.lambda = parse_double(expect("lambda"));
  inst.alpha = g.alpha = parse_double(expect("alpha"));
  inst.T = read_matrix(in, "T");
  inst.y = read_matrix(in, "y");
  inst.Delta = read_matrix(in, "Delta");
  inst.x0 = read_matrix(in, "x0");
  if (inst.y.size() != inst.T.rows() || inst.Delta.cols() != inst.T.cols() ||
      inst.x0.size() != inst.T.cols())
    throw DatasetError("instance file: inconsistent shapes");
  return inst;
}

}  // namespace spgm
