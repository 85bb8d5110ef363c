#include "spgm/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <mutex>
#include <thread>

namespace spgm {

namespace {

std::string real_text(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

PreparedExperiment prepare_experiment(const ExperimentConfig& cfg, ReferenceCache& cache) {
  validate_config(cfg);
  PreparedExperiment prep;
  const double lambda = effective_lambda(cfg);
  if (cfg.application == Application::Svm) {
    SvmDataset data;
    if (cfg.dataset == "synthetic") {
      data = build_bow_features(synthetic_text_corpus(cfg.data_seed, cfg.documents), cfg.vocab_size);
    } else if (cfg.dataset_format == "text") {
      data = build_bow_features(read_text_corpus(cfg.dataset), cfg.vocab_size);
    } else {
      data = read_sparse_dataset(cfg.dataset);
    }
    prep.svm = train_test_split(data, cfg.train_fraction, cfg.data_seed);
    prep.problem = std::make_shared<const CompositeProblem>(make_svm_problem(prep.svm->train, lambda));
  } else {
    if (!cfg.instance.empty()) {
      prep.sparse = load_instance(cfg.instance);
    } else {
      SparseGenerationParams g;
      g.seed = cfg.data_seed;
      g.m = cfg.m;
      g.n = cfg.n;
      g.p = cfg.p;
      g.lambda = lambda;
      g.alpha = cfg.alpha;
      g.sparsity = cfg.sparsity;
      g.noise = cfg.noise;
      prep.sparse = generate_instance(g);
    }
    prep.problem = std::make_shared<const CompositeProblem>(make_sparse_problem(*prep.sparse));
  }
  ReferenceOptions ro;
  ro.tolerance = cfg.reference_tolerance;
  prep.reference = cache.get(*prep.problem, ro);
  prep.diagnostics = estimate_diagnostics(*prep.problem, prep.reference.w);
  prep.r0 = prep.reference.w.norm();
  return prep;
}

Vector starting_point(const ExperimentConfig& cfg, Index dimension, std::uint64_t seed) {
  Vector w0 = Vector::Zero(dimension);
  if (cfg.start == "gaussian") {
    Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> normal;
    for (auto& x : w0) x = cfg.start_scale * normal(rng);
  }
  return w0;
}

StepsizePolicy make_policy(const ExperimentConfig& cfg, const PreparedExperiment& prep, Method method,
                           double r0) {
  const bool sgd = method == Method::SGDM;
  const std::string kind = sgd && cfg.sgd_policy ? *cfg.sgd_policy : cfg.policy;
  const double mu0 = sgd && cfg.sgd_mu0 ? *cfg.sgd_mu0 : cfg.mu0;
  const double L = prep.problem->lipschitz_L();
  if (kind == "constant") return StepsizePolicy::constant(mu0, cfg.K, L);
  if (kind == "variable") return StepsizePolicy::variable(mu0, L);
  if (kind != "mixed") throw ConfigError("unknown policy '" + kind + "'");
  Index t1 = 0;
  if (cfg.T1) {
    t1 = *cfg.T1;
  } else {
    // eps bounds a distance; the switch point is stated for the squared distance.
    t1 = mixed_switch_point(L, prep.problem->strong_convexity_sigma(), mu0, *cfg.eps * *cfg.eps,
                            std::max(r0, 1e-300));
  }
  return StepsizePolicy::mixed(mu0, t1, L);
}

ToleranceSchedule make_tolerance(const ExperimentConfig& cfg) {
  if (cfg.tolerance == "theorem") return ToleranceSchedule::theorem();
  if (cfg.tolerance == "exact") return ToleranceSchedule::exact();
  return ToleranceSchedule::fixed(std::stod(cfg.tolerance));
}

CellResult run_cell(const ExperimentConfig& cfg, const PreparedExperiment& prep, Method method,
                    Index batch_size, std::uint64_t seed) {
  const CompositeProblem& p = *prep.problem;
  const Vector& w_star = prep.reference.w;
  StopRule stop;
  stop.max_iterations = cfg.max_iter;
  stop.sample_budget = cfg.sample_budget;
  if (cfg.eps) {
    stop.reference = w_star;
    stop.eps = *cfg.eps;
  }
  RunOptions options;
  options.stride = cfg.stride;
  options.step.on_failure = cfg.failure;
  options.step.prox.solver = cfg.inner_solver;

  const Vector w0 = starting_point(cfg, p.dimension(), seed);
  const double r0 = (w0 - w_star).norm();
  const StepsizePolicy policy = make_policy(cfg, prep, method, r0);
  const Trajectory t =
      run(p, w0, policy, make_tolerance(cfg), batch_size, stop, method, seed, options);

  CellResult cell;
  cell.method = method;
  cell.N = batch_size;
  cell.seed = seed;
  cell.reached_eps_at = t.reached_eps_at;
  cell.r0 = r0;
  cell.switch_point = policy.switch_point();
  cell.iterations = t.final_state.k;
  cell.outer_samples = t.final_state.outer_samples;
  cell.inner_samples = t.final_state.inner_samples;
  const std::string run_id = lowercase(method_name(method)) + "_N" + std::to_string(batch_size) +
                             "_s" + std::to_string(seed);
  for (const auto& it : t.records) {
    RunRecord r;
    r.run_id = run_id;
    r.method = method_name(method);
    r.N = batch_size;
    r.seed = seed;
    r.k = it.k;
    r.time_s = it.seconds;
    if (it.k > 0) r.mu_k = it.mu;
    if (it.k > 0 && method == Method::SPGM) {
      r.delta_k = it.delta;
      r.inner_iters = static_cast<double>(it.inner_iterations);
      r.certificate = it.certificate;
    }
    r.outer_samples = static_cast<double>(it.outer_samples);
    r.inner_samples = static_cast<double>(it.inner_samples);
    r.dist_sq = (it.w - w_star).squaredNorm();
    r.objective = empirical_objective(p, it.w);
    if (prep.svm) {
      r.accuracy = svm_accuracy(prep.svm->test, it.w);
      r.loss = svm_mean_hinge(prep.svm->train, it.w);
    }
    if (it.inner_failure) {
      r.flag = "inner_failure";
      cell.inner_failure = true;
    }
    cell.records.push_back(std::move(r));
  }
  return cell;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, ReferenceCache& cache) {
  const PreparedExperiment prep = prepare_experiment(cfg, cache);

  struct Task {
    Method method;
    Index N;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (Method m : cfg.methods)
    for (Index n : cfg.batch_sizes)
      for (std::uint64_t s : cfg.seeds) tasks.push_back({m, n, s});

  std::vector<CellResult> cells(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        cells[i] = run_cell(cfg, prep, tasks[i].method, tasks[i].N, tasks[i].seed);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto hw = static_cast<Index>(std::max(1u, std::thread::hardware_concurrency()));
  const Index threads = std::min<Index>(cfg.threads > 0 ? cfg.threads : hw, static_cast<Index>(tasks.size()));
  std::vector<std::thread> pool;
  for (Index i = 1; i < threads; ++i) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  ExperimentResult result;
  std::filesystem::create_directories(cfg.out);
  for (Method m : cfg.methods) {
    for (Index n : cfg.batch_sizes) {
      std::vector<RunRecord> rows;
      for (const auto& c : cells)
        if (c.method == m && c.N == n) rows.insert(rows.end(), c.records.begin(), c.records.end());
      const std::string stem = lowercase(method_name(m)) + "_N" + std::to_string(n);
      const auto per_seed = (std::filesystem::path(cfg.out) / (stem + ".csv")).string();
      const auto mean = (std::filesystem::path(cfg.out) / (stem + "_mean.csv")).string();
      write_csv_file(per_seed, rows);
      write_csv_file(mean, average_over_seeds(rows, stem + "_mean"));
      result.files.push_back(per_seed);
      result.files.push_back(mean);
    }
  }

  Manifest manifest = config_entries(cfg);
  char hash[24];
  std::snprintf(hash, sizeof hash, "%016" PRIx64, prep.problem->content_hash());
  manifest.emplace_back("instance_hash", hash);
  manifest.emplace_back("dimension", std::to_string(prep.problem->dimension()));
  manifest.emplace_back("sample_count", std::to_string(prep.problem->sample_count()));
  manifest.emplace_back("lipschitz_L", real_text(prep.problem->lipschitz_L()));
  manifest.emplace_back("strong_convexity_sigma", real_text(prep.problem->strong_convexity_sigma()));
  manifest.emplace_back("reference_certificate", real_text(prep.reference.certificate));
  manifest.emplace_back("reference_iterations", std::to_string(prep.reference.iterations));
  manifest.emplace_back("reference_converged", prep.reference.converged ? "1" : "0");
  if (prep.svm) {
    manifest.emplace_back("reference_accuracy", real_text(svm_accuracy(prep.svm->test, prep.reference.w)));
    manifest.emplace_back("reference_loss", real_text(svm_mean_hinge(prep.svm->train, prep.reference.w)));
  }
  manifest.emplace_back("r0", real_text(prep.r0));
  manifest.emplace_back("r0_sq", real_text(prep.r0 * prep.r0));
  manifest.emplace_back("sigma_sq_hat", real_text(prep.diagnostics.sigma_sq));
  manifest.emplace_back("S_hat", real_text(prep.diagnostics.subgradient_bound));
  manifest.emplace_back("L_hat", real_text(prep.diagnostics.lipschitz_estimate));
  manifest.emplace_back("sigma_hat", real_text(prep.diagnostics.strong_convexity_estimate));
  if (cfg.eps && prep.problem->strong_convexity_sigma() > 0.0) {
    for (Method m : cfg.methods) {
      const auto policy = make_policy(cfg, prep, m, prep.r0);
      if (policy.kind() != StepsizePolicy::Kind::Constant) continue;
      // Run length the constant-policy analysis predicts from the zero start; reported only.
      const double T = static_cast<double>(cfg.K) /
                       (prep.problem->strong_convexity_sigma() * policy.mu0()) *
                       std::log(2.0 * prep.r0 * prep.r0 / (*cfg.eps * *cfg.eps));
      manifest.emplace_back(lowercase(method_name(m)) + "_T_constant", real_text(T));
    }
  }
  for (const auto& c : cells) {
    const std::string tag = lowercase(method_name(c.method)) + "_N" + std::to_string(c.N) + "_s" +
                            std::to_string(c.seed);
    manifest.emplace_back(tag + "_r0", real_text(c.r0));
    if (c.switch_point > 0) manifest.emplace_back(tag + "_T1", std::to_string(c.switch_point));
    manifest.emplace_back(tag + "_iterations", std::to_string(c.iterations));
    manifest.emplace_back(tag + "_reached_eps_at",
                          c.reached_eps_at ? std::to_string(*c.reached_eps_at) : std::string());
    manifest.emplace_back(tag + "_outer_samples", std::to_string(c.outer_samples));
    manifest.emplace_back(tag + "_inner_samples", std::to_string(c.inner_samples));
  }
  const auto manifest_path = (std::filesystem::path(cfg.out) / "manifest.txt").string();
  write_manifest(manifest_path, manifest);
  result.files.push_back(manifest_path);
  result.manifest = std::move(manifest);
  result.cells = std::move(cells);
  return result;
}

}  // namespace spgm
