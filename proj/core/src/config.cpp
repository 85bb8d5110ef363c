#include "spgm/config.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace spgm {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

double to_real(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || *end != '\0') throw ConfigError(key + ": expected a number, got '" + v + "'");
  return x;
}

long long to_integer(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long long x = std::strtoll(v.c_str(), &end, 10);
  if (v.empty() || *end != '\0') throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return x;
}

std::vector<std::string> list(const std::string& v) {
  std::vector<std::string> items;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string real_text(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& items, const std::function<std::string(const T&)>& show) {
  std::string out;
  for (const auto& x : items) out += (out.empty() ? "" : ",") + show(x);
  return out;
}

bool valid_policy(const std::string& p) { return p == "constant" || p == "variable" || p == "mixed"; }

}  // namespace

std::string method_name(Method m) { return m == Method::SPGM ? "SPGM" : "SGDM"; }

double effective_lambda(const ExperimentConfig& cfg) {
  if (cfg.lambda) return *cfg.lambda;
  return cfg.application == Application::Sparse ? 5e-4 : 1e-2;
}

void set_config_value(ExperimentConfig& cfg, const std::string& raw_key, const std::string& raw_value) {
  const std::string key = lower(trim(raw_key));
  const std::string value = trim(raw_value);
  using Setter = std::function<void()>;
  const std::map<std::string, Setter> setters = {
      {"application",
       [&] {
         const auto v = lower(value);
         if (v == "svm") cfg.application = Application::Svm;
         else if (v == "sparse") cfg.application = Application::Sparse;
         else throw ConfigError("application: expected svm or sparse, got '" + value + "'");
       }},
      {"methods",
       [&] {
         cfg.methods.clear();
         for (const auto& item : list(value)) {
           const auto v = lower(item);
           if (v == "spgm") cfg.methods.push_back(Method::SPGM);
           else if (v == "sgdm" || v == "sgd") cfg.methods.push_back(Method::SGDM);
           else throw ConfigError("methods: unknown method '" + item + "'");
         }
       }},
      {"batch_sizes",
       [&] {
         cfg.batch_sizes.clear();
         for (const auto& item : list(value)) cfg.batch_sizes.push_back(to_integer(key, item));
       }},
      {"seeds",
       [&] {
         cfg.seeds.clear();
         for (const auto& item : list(value)) {
           const long long s = to_integer(key, item);
           if (s < 0) throw ConfigError("seeds: must be >= 0");
           cfg.seeds.push_back(static_cast<std::uint64_t>(s));
         }
       }},
      {"policy", [&] { cfg.policy = lower(value); }},
      {"mu0", [&] { cfg.mu0 = to_real(key, value); }},
      {"k", [&] { cfg.K = to_integer(key, value); }},
      {"t1",
       [&] {
         if (lower(value) == "auto") cfg.T1.reset();
         else cfg.T1 = to_integer(key, value);
       }},
      {"sgd_policy", [&] { cfg.sgd_policy = lower(value); }},
      {"sgd_mu0", [&] { cfg.sgd_mu0 = to_real(key, value); }},
      {"start", [&] { cfg.start = lower(value); }},
      {"start_scale", [&] { cfg.start_scale = to_real(key, value); }},
      {"eps", [&] { cfg.eps = to_real(key, value); }},
      {"max_iter", [&] { cfg.max_iter = to_integer(key, value); }},
      {"sample_budget", [&] { cfg.sample_budget = to_integer(key, value); }},
      {"stride", [&] { cfg.stride = to_integer(key, value); }},
      {"inner_solver",
       [&] {
         const auto v = lower(value);
         if (v == "fast" || v == "fast_gradient") cfg.inner_solver = DualSolver::FastGradient;
         else if (v == "prox" || v == "projected_gradient") cfg.inner_solver = DualSolver::ProjectedGradient;
         else throw ConfigError("inner_solver: expected fast or prox, got '" + value + "'");
       }},
      {"tolerance",
       [&] {
         const auto v = lower(value);
         if (v != "theorem" && v != "exact") to_real(key, v);
         cfg.tolerance = v;
       }},
      {"failure",
       [&] {
         const auto v = lower(value);
         if (v == "abort") cfg.failure = FailurePolicy::Abort;
         else if (v == "continue") cfg.failure = FailurePolicy::Continue;
         else throw ConfigError("failure: expected abort or continue, got '" + value + "'");
       }},
      {"dataset", [&] { cfg.dataset = value; }},
      {"dataset_format", [&] { cfg.dataset_format = lower(value); }},
      {"vocab_size", [&] { cfg.vocab_size = to_integer(key, value); }},
      {"documents", [&] { cfg.documents = to_integer(key, value); }},
      {"train_fraction", [&] { cfg.train_fraction = to_real(key, value); }},
      {"data_seed", [&] { cfg.data_seed = static_cast<std::uint64_t>(to_integer(key, value)); }},
      {"lambda", [&] { cfg.lambda = to_real(key, value); }},
      {"m", [&] { cfg.m = to_integer(key, value); }},
      {"n", [&] { cfg.n = to_integer(key, value); }},
      {"p", [&] { cfg.p = to_integer(key, value); }},
      {"sparsity", [&] { cfg.sparsity = to_integer(key, value); }},
      {"alpha", [&] { cfg.alpha = to_real(key, value); }},
      {"noise", [&] { cfg.noise = to_real(key, value); }},
      {"instance", [&] { cfg.instance = value; }},
      {"reference_tolerance", [&] { cfg.reference_tolerance = to_real(key, value); }},
      {"out", [&] { cfg.out = value; }},
      {"threads", [&] { cfg.threads = to_integer(key, value); }},
  };
  const auto it = setters.find(key);
  if (it == setters.end()) throw ConfigError("unknown config key '" + raw_key + "'");
  it->second();
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig cfg) {
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (trim(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(number) + ": expected key=value");
    set_config_value(cfg, line.substr(0, eq), line.substr(eq + 1));
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  return parse_config(in, std::move(base));
}

void validate_config(const ExperimentConfig& c) {
  if (c.methods.empty()) throw ConfigError("methods: at least one method is required");
  if (c.batch_sizes.empty()) throw ConfigError("batch_sizes: at least one batch size is required");
  if (c.seeds.empty()) throw ConfigError("seeds: at least one seed is required");
  for (Index n : c.batch_sizes)
    if (n < 1) throw ConfigError("batch_sizes: every N must be >= 1");
  if (!valid_policy(c.policy)) throw ConfigError("policy: expected constant, variable or mixed");
  if (c.sgd_policy && !valid_policy(*c.sgd_policy))
    throw ConfigError("sgd_policy: expected constant, variable or mixed");
  if (!(c.mu0 > 0.0)) throw ConfigError("mu0: must be > 0");
  if (c.sgd_mu0 && !(*c.sgd_mu0 > 0.0)) throw ConfigError("sgd_mu0: must be > 0");
  if (c.K < 1) throw ConfigError("K: must be >= 1");
  if (c.T1 && *c.T1 < 0) throw ConfigError("T1: must be >= 0");
  if (c.start != "zero" && c.start != "gaussian") throw ConfigError("start: expected zero or gaussian");
  if (!(c.start_scale >= 0.0)) throw ConfigError("start_scale: must be >= 0");
  if (c.eps && !(*c.eps > 0.0)) throw ConfigError("eps: must be > 0");
  if (c.max_iter && *c.max_iter < 0) throw ConfigError("max_iter: must be >= 0");
  if (c.sample_budget && *c.sample_budget < 0) throw ConfigError("sample_budget: must be >= 0");
  if (!c.eps && !c.max_iter && !c.sample_budget)
    throw ConfigError("stop rule: set eps, max_iter or sample_budget");
  if (c.stride < 1) throw ConfigError("stride: must be >= 1");
  if ((c.policy == "mixed" || c.sgd_policy == "mixed") && !c.T1 && !c.eps)
    throw ConfigError("mixed policy: set T1 or eps so the switch point can be derived");
  if (c.dataset_format != "text" && c.dataset_format != "sparse")
    throw ConfigError("dataset_format: expected text or sparse");
  if (c.vocab_size < 1) throw ConfigError("vocab_size: must be >= 1");
  if (c.documents < 1) throw ConfigError("documents: must be >= 1");
  if (!(c.train_fraction > 0.0 && c.train_fraction < 1.0))
    throw ConfigError("train_fraction: must be in (0, 1)");
  if (c.lambda && !(*c.lambda >= 0.0)) throw ConfigError("lambda: must be >= 0");
  if (c.application == Application::Svm && !(effective_lambda(c) > 0.0))
    throw ConfigError("lambda: the SVM needs lambda > 0");
  if (c.m < 1 || c.n < 1 || c.p < 1) throw ConfigError("m, n, p: must be >= 1");
  if (c.sparsity < 1 || c.sparsity > c.n) throw ConfigError("sparsity: must be in [1, n]");
  if (c.alpha < 0.0 || c.noise < 0.0) throw ConfigError("alpha, noise: must be >= 0");
  if (!(c.reference_tolerance > 0.0)) throw ConfigError("reference_tolerance: must be > 0");
  if (c.threads < 0) throw ConfigError("threads: must be >= 0");
}

Manifest config_entries(const ExperimentConfig& c) {
  Manifest m;
  auto opt_real = [](const std::optional<double>& x) { return x ? real_text(*x) : std::string(); };
  auto opt_int = [](const std::optional<Index>& x) { return x ? std::to_string(*x) : std::string(); };
  m.emplace_back("application", c.application == Application::Svm ? "svm" : "sparse");
  m.emplace_back("methods", join<Method>(c.methods, method_name));
  m.emplace_back("batch_sizes", join<Index>(c.batch_sizes, [](const Index& x) { return std::to_string(x); }));
  m.emplace_back("seeds", join<std::uint64_t>(c.seeds, [](const std::uint64_t& x) { return std::to_string(x); }));
  m.emplace_back("policy", c.policy);
  m.emplace_back("mu0", real_text(c.mu0));
  m.emplace_back("K", std::to_string(c.K));
  m.emplace_back("T1", c.T1 ? std::to_string(*c.T1) : "auto");
  m.emplace_back("sgd_policy", c.sgd_policy.value_or(c.policy));
  m.emplace_back("sgd_mu0", real_text(c.sgd_mu0.value_or(c.mu0)));
  m.emplace_back("start", c.start);
  m.emplace_back("start_scale", real_text(c.start_scale));
  m.emplace_back("eps", opt_real(c.eps));
  m.emplace_back("max_iter", opt_int(c.max_iter));
  m.emplace_back("sample_budget", opt_int(c.sample_budget));
  m.emplace_back("stride", std::to_string(c.stride));
  m.emplace_back("inner_solver", c.inner_solver == DualSolver::FastGradient ? "fast" : "prox");
  m.emplace_back("tolerance", c.tolerance);
  m.emplace_back("failure", c.failure == FailurePolicy::Abort ? "abort" : "continue");
  m.emplace_back("lambda", real_text(effective_lambda(c)));
  if (c.application == Application::Svm) {
    m.emplace_back("dataset", c.dataset);
    m.emplace_back("dataset_format", c.dataset_format);
    m.emplace_back("vocab_size", std::to_string(c.vocab_size));
    m.emplace_back("documents", std::to_string(c.documents));
    m.emplace_back("train_fraction", real_text(c.train_fraction));
  } else {
    m.emplace_back("instance", c.instance);
    m.emplace_back("m", std::to_string(c.m));
    m.emplace_back("n", std::to_string(c.n));
    m.emplace_back("p", std::to_string(c.p));
    m.emplace_back("sparsity", std::to_string(c.sparsity));
    m.emplace_back("alpha", real_text(c.alpha));
    m.emplace_back("noise", real_text(c.noise));
  }
  m.emplace_back("data_seed", std::to_string(c.data_seed));
  m.emplace_back("reference_tolerance", real_text(c.reference_tolerance));
  return m;
}

}  // namespace spgm
