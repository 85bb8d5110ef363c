#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "spgm/config.hpp"
#include "spgm/diagnostics.hpp"
#include "spgm/reference.hpp"
#include "spgm/sparse_rep.hpp"
#include "spgm/svm.hpp"

namespace spgm {

/// The problem a config describes, with its data and reference solution.
struct PreparedExperiment {
  std::shared_ptr<const CompositeProblem> problem;
  std::optional<SvmSplit> svm;
  std::optional<SparseRepInstance> sparse;
  ReferenceResult reference;
  Diagnostics diagnostics;
  /// ||w*||, the distance from the zero start.
  double r0 = 0.0;
};

/// Loads or generates the data and computes (or fetches) the reference.
/// Unreadable datasets raise DatasetError.
PreparedExperiment prepare_experiment(const ExperimentConfig& cfg, ReferenceCache& cache);

/// w0 for a seed: zero, or start_scale * N(0, I) from a stream derived from the seed.
Vector starting_point(const ExperimentConfig& cfg, Index dimension, std::uint64_t seed);

/// Stepsize policy for `method`. A mixed policy without an explicit T1 derives
/// it from eps and the run's initial distance r0.
StepsizePolicy make_policy(const ExperimentConfig& cfg, const PreparedExperiment& prep, Method method,
                           double r0);
ToleranceSchedule make_tolerance(const ExperimentConfig& cfg);

struct CellResult {
  Method method = Method::SPGM;
  Index N = 0;
  std::uint64_t seed = 0;
  std::vector<RunRecord> records;
  std::optional<Index> reached_eps_at;
  double r0 = 0.0;
  Index switch_point = 0;
  Index iterations = 0;
  Index outer_samples = 0;
  Index inner_samples = 0;
  bool inner_failure = false;
};

/// One run: trajectory converted to CSV records with distance, objective and
/// (for the SVM) test accuracy and training hinge loss.
CellResult run_cell(const ExperimentConfig& cfg, const PreparedExperiment& prep, Method method,
                    Index batch_size, std::uint64_t seed);

struct ExperimentResult {
  std::vector<CellResult> cells;
  Manifest manifest;
  std::vector<std::string> files;
};

/// Runs every (method, N, seed) cell on a thread pool and writes
/// <method>_N<N>.csv, <method>_N<N>_mean.csv and manifest.txt into cfg.out.
/// An inner failure under the abort policy raises StepFailure.
ExperimentResult run_experiment(const ExperimentConfig& cfg, ReferenceCache& cache);

}  // namespace spgm
