#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "spgm/types.hpp"

namespace spgm {

/// One logged iterate. Optional fields are written as empty CSV cells.
struct RunRecord {
  std::string run_id;
  std::string method;
  Index N = 0;
  std::optional<std::uint64_t> seed;
  Index k = 0;
  double time_s = 0.0;
  std::optional<double> mu_k;
  std::optional<double> delta_k;
  double outer_samples = 0.0;
  double inner_samples = 0.0;
  std::optional<double> dist_sq;
  std::optional<double> objective;
  std::optional<double> accuracy;
  std::optional<double> loss;
  std::optional<double> inner_iters;
  std::optional<double> certificate;
  std::string flag;

  bool operator==(const RunRecord&) const = default;
};

/// Column order of every CSV the harness writes.
const std::vector<std::string>& csv_columns();

class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Header plus one row per record; reals use %.17g so parsing is exact.
void write_csv(std::ostream& out, const std::vector<RunRecord>& records);
void write_csv_file(const std::string& path, const std::vector<RunRecord>& records);
std::vector<RunRecord> read_csv(std::istream& in);
std::vector<RunRecord> read_csv_file(const std::string& path);

/// Per-k arithmetic mean over the records of several seeds. Each field is
/// averaged over the seeds that report it at that k; `flag` holds "seeds=<count>".
std::vector<RunRecord> average_over_seeds(const std::vector<RunRecord>& records,
                                          const std::string& run_id);

/// Ordered key=value provenance file.
using Manifest = std::vector<std::pair<std::string, std::string>>;
void write_manifest(const std::string& path, const Manifest& manifest);
Manifest read_manifest(const std::string& path);

}  // namespace spgm
