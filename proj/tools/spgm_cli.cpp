// spgm: reference solutions, method comparisons and diagnostics from a config.

#include <cinttypes>
#include <cstdio>
#include <iostream>

#include <CLI11.hpp>

#include "spgm/experiment.hpp"

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitDataset = 2;
constexpr int kExitInnerFailure = 3;

struct Overrides {
  std::string config;
  std::string out;
  std::string seeds;
  std::string batch_sizes;
  std::string method;
  std::string policy;
  std::string mu0;
  std::string eps;
  std::string max_iter;
};

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--config", o.config, "key=value experiment file");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--seeds", o.seeds, "comma-separated seeds");
  cmd->add_option("--batch-sizes", o.batch_sizes, "comma-separated batch sizes N");
  cmd->add_option("--method", o.method, "spgm, sgdm or both (comma-separated)");
  cmd->add_option("--policy", o.policy, "constant, variable or mixed");
  cmd->add_option("--mu0", o.mu0, "stepsize scale mu0");
  cmd->add_option("--eps", o.eps, "stop when ||w - w*|| <= eps");
  cmd->add_option("--max-iter", o.max_iter, "iteration limit");
}

spgm::ExperimentConfig build_config(const Overrides& o) {
  spgm::ExperimentConfig cfg;
  if (!o.config.empty()) cfg = spgm::load_config(o.config);
  const std::pair<const char*, const std::string*> flags[] = {
      {"out", &o.out},       {"seeds", &o.seeds}, {"batch_sizes", &o.batch_sizes},
      {"methods", &o.method}, {"policy", &o.policy}, {"mu0", &o.mu0},
      {"eps", &o.eps},       {"max_iter", &o.max_iter}};
  for (const auto& [key, value] : flags)
    if (!value->empty()) spgm::set_config_value(cfg, key, *value);
  spgm::validate_config(cfg);
  return cfg;
}

void print_manifest(const spgm::Manifest& m) {
  for (const auto& [k, v] : m) std::cout << k << '=' << v << '\n';
}

std::string real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Minibatch stochastic proximal gradient experiments"};
  app.require_subcommand(1);
  Overrides ref_o, run_o, diag_o;
  auto* reference = app.add_subcommand("reference", "compute and cache the reference solution");
  add_common(reference, ref_o);
  auto* run = app.add_subcommand("run", "run the configured methods and write CSV files");
  add_common(run, run_o);
  auto* diagnose = app.add_subcommand("diagnose", "estimate Sigma^2, S, L_f and sigma_f at w*");
  add_common(diagnose, diag_o);
  CLI11_PARSE(app, argc, argv);

  try {
    spgm::ReferenceCache cache;
    if (run->parsed()) {
      const auto cfg = build_config(run_o);
      const auto result = spgm::run_experiment(cfg, cache);
      for (const auto& f : result.files) std::cout << "wrote " << f << '\n';
      return 0;
    }
    const auto cfg = build_config(reference->parsed() ? ref_o : diag_o);
    const auto prep = spgm::prepare_experiment(cfg, cache);
    if (reference->parsed()) {
      char hash[24];
      std::snprintf(hash, sizeof hash, "%016" PRIx64, prep.problem->content_hash());
      std::cout << "instance_hash=" << hash << '\n'
                << "certificate=" << real(prep.reference.certificate) << '\n'
                << "iterations=" << prep.reference.iterations << '\n'
                << "converged=" << (prep.reference.converged ? 1 : 0) << '\n'
                << "objective=" << real(spgm::empirical_objective(*prep.problem, prep.reference.w))
                << '\n'
                << "r0=" << real(prep.r0) << '\n';
      if (cache.directory()) std::cout << "cache_dir=" << cache.directory()->string() << '\n';
      return 0;
    }
    const auto& d = prep.diagnostics;
    print_manifest({{"sigma_sq_hat", real(d.sigma_sq)},
                    {"S_hat", real(d.subgradient_bound)},
                    {"L_hat", real(d.lipschitz_estimate)},
                    {"sigma_hat", real(d.strong_convexity_estimate)},
                    {"lipschitz_L", real(d.lipschitz_declared)},
                    {"strong_convexity_sigma", real(d.strong_convexity_declared)}});
    return 0;
  } catch (const spgm::DatasetError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitDataset;
  } catch (const spgm::StepFailure& e) {
    std::cerr << "error: inner solver failure: " << e.what() << '\n';
    return kExitInnerFailure;
  } catch (const spgm::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}
