#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "spgm/prox.hpp"
#include "spgm/records.hpp"
#include "spgm/spg.hpp"

namespace spgm {

enum class Application { Svm, Sparse };

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Everything a harness run needs. Keys in the key=value file match the field
/// names below (see README for the full list).
struct ExperimentConfig {
  Application application = Application::Sparse;
  std::vector<Method> methods{Method::SPGM};
  std::vector<Index> batch_sizes{1};
  std::vector<std::uint64_t> seeds{1};

  // Stepsize: "constant", "variable" or "mixed".
  std::string policy = "variable";
  double mu0 = 1.0;
  Index K = 1000;
  /// Mixed switch point; derived from the reference distance when absent.
  std::optional<Index> T1;
  /// Stepsize used by the SGD baseline; defaults to the SPG-M policy.
  std::optional<std::string> sgd_policy;
  std::optional<double> sgd_mu0;

  /// Starting point: "zero" or "gaussian" (start_scale * N(0, I), drawn per seed).
  std::string start = "zero";
  double start_scale = 1.0;

  // Stop rule.
  std::optional<double> eps;
  std::optional<Index> max_iter;
  std::optional<Index> sample_budget;
  Index stride = 1;

  // Inner solver.
  DualSolver inner_solver = DualSolver::FastGradient;
  /// "theorem", "exact" or a positive number.
  std::string tolerance = "theorem";
  FailurePolicy failure = FailurePolicy::Abort;

  // SVM data: "synthetic" or a file path.
  std::string dataset = "synthetic";
  /// "text" (label<TAB>text) or "sparse" (label idx:val ...).
  std::string dataset_format = "text";
  Index vocab_size = 50;
  Index documents = 2000;
  double train_fraction = 0.8;
  std::uint64_t data_seed = 1;

  // Shared penalty; application default when absent (sparse 5e-4, svm 1e-2).
  std::optional<double> lambda;

  // Sparse data, generated unless `instance` names a saved file.
  Index m = 400;
  Index n = 200;
  Index p = 200;
  Index sparsity = 10;
  double alpha = 0.2;
  double noise = 1e-3;
  std::string instance;

  double reference_tolerance = 1e-9;
  std::string out = "results";
  /// Worker threads; 0 uses the hardware concurrency.
  Index threads = 0;
};

/// Set one key from its textual value. Unknown keys and bad values throw ConfigError.
void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// key=value lines; '#' starts a comment; blank lines are ignored.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig base = {});
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// Checks cross-field constraints (at least one method, N and seed; eps > 0; ...).
void validate_config(const ExperimentConfig& cfg);

/// The config as manifest entries, in a stable order.
Manifest config_entries(const ExperimentConfig& cfg);

double effective_lambda(const ExperimentConfig& cfg);
std::string method_name(Method m);

}  // namespace spgm
