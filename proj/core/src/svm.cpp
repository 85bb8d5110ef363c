#include "spgm/svm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "spgm/terms.hpp"

namespace spgm {

namespace {

bool word_char(unsigned char c) { return std::isalnum(c) != 0 || c >= 0x80; }

int parse_label(const std::string& token, const std::string& where) {
  if (token == "+1" || token == "1") return 1;
  if (token == "-1") return -1;
  throw DatasetError(where + ": label must be +1 or -1, got '" + token + "'");
}

}  // namespace

SvmDataset SvmDataset::from_features(Matrix X, Vector y, std::vector<std::string> vocabulary) {
  if (X.rows() != y.size()) throw std::invalid_argument("SvmDataset: row and label counts differ");
  for (Index i = 0; i < y.size(); ++i)
    if (y[i] != 1.0 && y[i] != -1.0) throw std::invalid_argument("SvmDataset: labels must be +-1");
  SvmDataset d;
  d.scaled = X.transpose();
  for (Index i = 0; i < y.size(); ++i) d.scaled.col(i) *= y[i];
  d.X = std::move(X);
  d.y = std::move(y);
  d.vocabulary = std::move(vocabulary);
  return d;
}

SvmSplit train_test_split(const SvmDataset& d, double train_fraction, std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction <= 1.0))
    throw std::invalid_argument("train_test_split: fraction must be in (0, 1]");
  const Index m = d.sample_count();
  std::vector<Index> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), Index{0});
  Rng rng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  const auto n_train = static_cast<Index>(std::llround(train_fraction * static_cast<double>(m)));

  auto take = [&](Index from, Index to) {
    Matrix X(to - from, d.feature_count());
    Vector y(to - from);
    for (Index r = from; r < to; ++r) {
      X.row(r - from) = d.X.row(order[static_cast<std::size_t>(r)]);
      y[r - from] = d.y[order[static_cast<std::size_t>(r)]];
    }
    return SvmDataset::from_features(std::move(X), std::move(y), d.vocabulary);
  };
  return {take(0, n_train), take(n_train, m)};
}

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> tokens;
  std::string current;
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (word_char(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    } else if (!current.empty()) {
      tokens.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

SvmDataset build_bow_features(const std::vector<LabeledText>& corpus, Index vocab_size) {
  if (corpus.empty()) throw std::invalid_argument("build_bow_features: empty corpus");
  if (vocab_size < 1) throw std::invalid_argument("build_bow_features: vocabulary size must be >= 1");

  std::vector<std::vector<std::string>> docs;
  docs.reserve(corpus.size());
  std::map<std::string, Index> frequency;
  for (const auto& doc : corpus) {
    docs.push_back(tokenize(doc.text));
    for (const auto& t : docs.back()) ++frequency[t];
  }
  if (static_cast<Index>(frequency.size()) < vocab_size)
    throw VocabularyTooSmall("build_bow_features: corpus has " + std::to_string(frequency.size()) +
                             " distinct words, " + std::to_string(vocab_size) + " requested");

  std::vector<std::pair<std::string, Index>> ranked(frequency.begin(), frequency.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  ranked.resize(static_cast<std::size_t>(vocab_size));

  std::map<std::string, Index> column;
  std::vector<std::string> vocabulary;
  for (const auto& [word, count] : ranked) {
    column.emplace(word, static_cast<Index>(vocabulary.size()));
    vocabulary.push_back(word);
  }

  const auto m = static_cast<Index>(corpus.size());
  Matrix X = Matrix::Zero(m, vocab_size);
  Vector y(m);
  for (Index i = 0; i < m; ++i) {
    for (const auto& t : docs[static_cast<std::size_t>(i)]) {
      auto it = column.find(t);
      if (it != column.end()) X(i, it->second) += 1.0;
    }
    const int label = corpus[static_cast<std::size_t>(i)].label;
    if (label != 1 && label != -1) throw std::invalid_argument("build_bow_features: labels must be +-1");
    y[i] = label;
  }
  return SvmDataset::from_features(std::move(X), std::move(y), std::move(vocabulary));
}

std::vector<LabeledText> read_text_corpus(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open corpus '" + path + "'");
  std::vector<LabeledText> corpus;
  std::string line;
  Index number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    const std::string where = path + ":" + std::to_string(number);
    if (tab == std::string::npos) throw DatasetError(where + ": expected label<TAB>text");
    corpus.push_back({line.substr(tab + 1), parse_label(line.substr(0, tab), where)});
  }
  if (corpus.empty()) throw DatasetError("corpus '" + path + "' has no documents");
  return corpus;
}

SvmDataset read_sparse_dataset(const std::string& path, Index features) {
  std::ifstream in(path);
  if (!in) throw DatasetError("cannot open dataset '" + path + "'");
  std::vector<std::vector<std::pair<Index, double>>> rows;
  std::vector<double> labels;
  Index widest = 0;
  std::string line;
  Index number = 0;
  while (std::getline(in, line)) {
    ++number;
    std::istringstream tokens(line);
    std::string token;
    if (!(tokens >> token)) continue;
    const std::string where = path + ":" + std::to_string(number);
    labels.push_back(parse_label(token, where));
    auto& row = rows.emplace_back();
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) throw DatasetError(where + ": expected index:value");
      try {
        std::size_t used = 0;
        const long long idx = std::stoll(token.substr(0, colon), &used);
        if (used != colon || idx < 0) throw std::invalid_argument("index");
        const std::string value_text = token.substr(colon + 1);
        const double value = std::stod(value_text, &used);
        if (used != value_text.size()) throw std::invalid_argument("value");
        row.emplace_back(static_cast<Index>(idx), value);
        widest = std::max(widest, static_cast<Index>(idx) + 1);
      } catch (const std::logic_error&) {
        throw DatasetError(where + ": malformed pair '" + token + "'");
      }
    }
  }
  if (rows.empty()) throw DatasetError("dataset '" + path + "' has no samples");
  if (features == 0) features = widest;
  if (widest > features) throw DatasetError(path + ": feature index beyond the declared width");
  const auto m = static_cast<Index>(rows.size());
  Matrix X = Matrix::Zero(m, features);
  for (Index i = 0; i < m; ++i)
    for (const auto& [j, v] : rows[static_cast<std::size_t>(i)]) X(i, j) += v;
  Vector y = Eigen::Map<const Vector>(labels.data(), m);
  return SvmDataset::from_features(std::move(X), std::move(y));
}

std::vector<LabeledText> synthetic_text_corpus(std::uint64_t seed, Index documents, Index words) {
  if (documents < 1 || words < 1) throw std::invalid_argument("synthetic_text_corpus: sizes must be >= 1");
  Rng rng(seed);
  std::vector<std::string> lexicon;
  static const char* syllables[] = {"ka", "lo", "mi", "nu", "pe", "ra", "si", "to", "ve", "zu"};
  for (Index j = 0; j < words; ++j) {
    std::string w;
    Index code = j;
    do {
      w += syllables[code % 10];
      code /= 10;
    } while (code > 0);
    lexicon.push_back(w + "x");
  }

  std::normal_distribution<double> normal;
  Vector theta(words);
  for (auto& t : theta) t = normal(rng);
  // Zipf-like word frequencies.
  std::vector<double> weights(static_cast<std::size_t>(words));
  for (Index j = 0; j < words; ++j) weights[static_cast<std::size_t>(j)] = 1.0 / std::sqrt(1.0 + j);
  std::discrete_distribution<Index> pick_word(weights.begin(), weights.end());
  // Center theta under the word distribution so both labels are common.
  const double total_weight = std::accumulate(weights.begin(), weights.end(), 0.0);
  double center = 0.0;
  for (Index j = 0; j < words; ++j) center += theta[j] * weights[static_cast<std::size_t>(j)];
  theta.array() -= center / total_weight;
  std::uniform_int_distribution<Index> length(20, 60);

  std::vector<LabeledText> corpus;
  Vector counts(words);
  while (static_cast<Index>(corpus.size()) < documents) {
    counts.setZero();
    std::string text;
    const Index len = length(rng);
    for (Index t = 0; t < len; ++t) {
      const Index j = pick_word(rng);
      counts[j] += 1.0;
      if (!text.empty()) text += ' ';
      text += lexicon[static_cast<std::size_t>(j)];
    }
    const double score = theta.dot(counts) / counts.norm();
    if (std::abs(score) < 0.25) continue;
    corpus.push_back({std::move(text), score >= 0.0 ? 1 : -1});
  }
  return corpus;
}

CompositeProblem make_svm_problem(const SvmDataset& train, double lambda) {
  if (!(lambda > 0.0)) throw std::invalid_argument("make_svm_problem: lambda must be > 0");
  const Index n = train.feature_count();
  auto smooth = std::make_shared<ScaledSquaredNorm>(n, lambda);
  auto nonsmooth = std::make_shared<NonsmoothComponent>(
      n, LinearComposition{-train.scaled, ScalarLoss::hinge()});
  return CompositeProblem(std::move(smooth), std::move(nonsmooth), lambda, lambda);
}

SvmStep svm_spgm_step(const SvmDataset& d, double lambda, const Vector& w, double mu,
                      Index batch_size, Rng& rng, double delta, const ProxOptions& options) {
  if (!(mu > 0.0)) throw std::invalid_argument("svm_spgm_step: mu must be > 0");
  if (w.size() != d.feature_count()) throw std::invalid_argument("svm_spgm_step: dimension mismatch");
  SvmStep step;
  step.batch = sample_minibatch(rng, d.sample_count(), batch_size);
  const Vector v = (1.0 - lambda * mu) * w;

  Matrix xs(d.feature_count(), batch_size);
  for (Index j = 0; j < batch_size; ++j) xs.col(j) = d.scaled.col(step.batch.indices[j]);

  const bool single = std::all_of(step.batch.indices.begin(), step.batch.indices.end(),
                                  [&](Index i) { return i == step.batch.indices.front(); });
  if (options.closed_form && single) {
    const double q = mu * xs.col(0).squaredNorm();
    const double b = 1.0 - xs.col(0).dot(v);
    const double u = q > 0.0 ? std::clamp(b / q, 0.0, 1.0) : (b > 0.0 ? 1.0 : 0.0);
    step.u = Vector::Constant(batch_size, u);
    step.inner.closed_form = true;
    step.inner.samples_touched = batch_size;
  } else {
    // The hinge dual in the atoms a_i = -y_i x_i, kink -1, box [0,1].
    const BoxQuadDual dual(mu, batch_size, v, Matrix(-xs), Vector::Zero(batch_size),
                           Vector::Ones(batch_size), Vector::Constant(batch_size, -1.0));
    step.inner = options.solver == DualSolver::FastGradient
                     ? solve_dual_fast_gradient(dual, delta, options)
                     : solve_dual_prox_gradient(dual, delta, options);
    step.u = step.inner.dual;
  }
  step.w = v + (mu / static_cast<double>(batch_size)) * (xs * step.u);
  step.inner.primal = step.w;
  step.inner.dual = step.u;
  return step;
}

double svm_accuracy(const SvmDataset& d, const Vector& w) {
  if (d.sample_count() == 0) return 0.0;
  const Vector scores = d.X * w;
  Index correct = 0;
  for (Index i = 0; i < scores.size(); ++i) correct += ((scores[i] >= 0.0 ? 1.0 : -1.0) == d.y[i]);
  return static_cast<double>(correct) / static_cast<double>(d.sample_count());
}

double svm_mean_hinge(const SvmDataset& d, const Vector& w) {
  if (d.sample_count() == 0) return 0.0;
  const Vector margins = d.scaled.transpose() * w;
  return (1.0 - margins.array()).max(0.0).mean();
}

SvmMetrics svm_metrics(const SvmSplit& data, const Vector& w, const Vector* w_ref) {
  SvmMetrics m;
  m.accuracy = svm_accuracy(data.test, w);
  m.hinge_loss = svm_mean_hinge(data.train, w);
  if (w_ref) m.error = (w - *w_ref).squaredNorm();
  return m;
}

}  // namespace spgm
