#include "spgm/records.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace spgm {

namespace {

std::string real(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string real(const std::optional<double>& x) { return x ? real(*x) : std::string(); }

void check_text(const std::string& s, const char* column) {
  if (s.find_first_of(",\n\r\"") != std::string::npos)
    throw SchemaError(std::string("column ") + column + ": value contains a separator: " + s);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_real(const std::string& s, const std::string& column) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw SchemaError("column " + column + ": bad number '" + s + "'");
  return v;
}

std::optional<double> parse_optional(const std::string& s, const std::string& column) {
  if (s.empty()) return std::nullopt;
  return parse_real(s, column);
}

long long parse_integer(const std::string& s, const std::string& column) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') throw SchemaError("column " + column + ": bad integer '" + s + "'");
  return v;
}

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns = {
      "run_id",        "method",        "N",       "seed",      "k",        "time_s",
      "mu_k",          "delta_k",       "outer_samples", "inner_samples", "dist_sq",
      "objective",     "accuracy",      "loss",    "inner_iters", "certificate", "flag"};
  return columns;
}

void write_csv(std::ostream& out, const std::vector<RunRecord>& records) {
  const auto& cols = csv_columns();
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
  for (const auto& r : records) {
    check_text(r.run_id, "run_id");
    check_text(r.method, "method");
    check_text(r.flag, "flag");
    out << r.run_id << ',' << r.method << ',' << r.N << ','
        << (r.seed ? std::to_string(*r.seed) : std::string()) << ',' << r.k << ','
        << real(r.time_s) << ',' << real(r.mu_k) << ',' << real(r.delta_k) << ','
        << real(r.outer_samples) << ',' << real(r.inner_samples) << ',' << real(r.dist_sq) << ','
        << real(r.objective) << ',' << real(r.accuracy) << ',' << real(r.loss) << ','
        << real(r.inner_iters) << ',' << real(r.certificate) << ',' << r.flag << '\n';
  }
}

void write_csv_file(const std::string& path, const std::vector<RunRecord>& records) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_csv(out, records);
  if (!out) throw std::runtime_error("failed writing " + path);
}

std::vector<RunRecord> read_csv(std::istream& in) {
  const auto& cols = csv_columns();
  std::string line;
  if (!std::getline(in, line)) throw SchemaError("missing header row");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split(line);
  for (std::size_t i = 0; i < cols.size(); ++i)
    if (i >= header.size() || header[i] != cols[i]) throw SchemaError("missing column " + cols[i]);
  if (header.size() != cols.size()) throw SchemaError("unexpected column " + header[cols.size()]);

  std::vector<RunRecord> records;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != cols.size())
      throw SchemaError("row has " + std::to_string(c.size()) + " cells, expected " +
                        std::to_string(cols.size()));
    RunRecord r;
    r.run_id = c[0];
    r.method = c[1];
    r.N = parse_integer(c[2], cols[2]);
    if (!c[3].empty()) {
      char* end = nullptr;
      r.seed = std::strtoull(c[3].c_str(), &end, 10);
      if (*end != '\0') throw SchemaError("column seed: bad integer '" + c[3] + "'");
    }
    r.k = parse_integer(c[4], cols[4]);
    r.time_s = parse_real(c[5], cols[5]);
    r.mu_k = parse_optional(c[6], cols[6]);
    r.delta_k = parse_optional(c[7], cols[7]);
    r.outer_samples = parse_real(c[8], cols[8]);
    r.inner_samples = parse_real(c[9], cols[9]);
    r.dist_sq = parse_optional(c[10], cols[10]);
    r.objective = parse_optional(c[11], cols[11]);
    r.accuracy = parse_optional(c[12], cols[12]);
    r.loss = parse_optional(c[13], cols[13]);
    r.inner_iters = parse_optional(c[14], cols[14]);
    r.certificate = parse_optional(c[15], cols[15]);
    r.flag = c[16];
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<RunRecord> read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_csv(in);
}

std::vector<RunRecord> average_over_seeds(const std::vector<RunRecord>& records,
                                          const std::string& run_id) {
  struct Sum {
    double value = 0.0;
    int count = 0;
    void add(const std::optional<double>& x) {
      if (x) {
        value += *x;
        ++count;
      }
    }
    void add(double x) { add(std::optional<double>(x)); }
    std::optional<double> mean() const {
      if (count == 0) return std::nullopt;
      return value / count;
    }
  };
  struct Row {
    std::string method;
    Index N = 0;
    int seeds = 0;
    Sum time, mu, delta, outer, inner, dist, obj, acc, loss, iters, cert;
  };
  std::map<Index, Row> rows;
  for (const auto& r : records) {
    Row& row = rows[r.k];
    row.method = r.method;
    row.N = r.N;
    ++row.seeds;
    row.time.add(r.time_s);
    row.mu.add(r.mu_k);
    row.delta.add(r.delta_k);
    row.outer.add(r.outer_samples);
    row.inner.add(r.inner_samples);
    row.dist.add(r.dist_sq);
    row.obj.add(r.objective);
    row.acc.add(r.accuracy);
    row.loss.add(r.loss);
    row.iters.add(r.inner_iters);
    row.cert.add(r.certificate);
  }
  std::vector<RunRecord> out;
  for (const auto& [k, row] : rows) {
    RunRecord r;
    r.run_id = run_id;
    r.method = row.method;
    r.N = row.N;
    r.k = k;
    r.time_s = *row.time.mean();
    r.mu_k = row.mu.mean();
    r.delta_k = row.delta.mean();
    r.outer_samples = *row.outer.mean();
    r.inner_samples = *row.inner.mean();
    r.dist_sq = row.dist.mean();
    r.objective = row.obj.mean();
    r.accuracy = row.acc.mean();
    r.loss = row.loss.mean();
    r.inner_iters = row.iters.mean();
    r.certificate = row.cert.mean();
    r.flag = "seeds=" + std::to_string(row.seeds);
    out.push_back(std::move(r));
  }
  return out;
}

void write_manifest(const std::string& path, const Manifest& manifest) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  for (const auto& [key, value] : manifest) {
    if (key.find_first_of("=\n") != std::string::npos || value.find('\n') != std::string::npos)
      throw std::invalid_argument("manifest entry '" + key + "' is not a single key=value line");
    out << key << '=' << value << '\n';
  }
}

Manifest read_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Manifest m;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw SchemaError("manifest line without '=': " + line);
    m.emplace_back(line.substr(0, eq), line.substr(eq + 1));
  }
  return m;
}

}  // namespace spgm
