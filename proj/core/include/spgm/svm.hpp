#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spgm/problem.hpp"
#include "spgm/prox.hpp"

namespace spgm {

struct LabeledText {
  std::string text;
  int label = 1;
};

/// Rows of X are samples. Column i of `scaled` is y_i x_i.
struct SvmDataset {
  Matrix X;
  Vector y;
  Matrix scaled;
  std::vector<std::string> vocabulary;

  static SvmDataset from_features(Matrix X, Vector y, std::vector<std::string> vocabulary = {});
  Index sample_count() const { return X.rows(); }
  Index feature_count() const { return X.cols(); }
};

struct SvmSplit {
  SvmDataset train;
  SvmDataset test;
};

/// Shuffles with a seeded stream and keeps round(fraction * m) rows for training.
SvmSplit train_test_split(const SvmDataset& d, double train_fraction, std::uint64_t seed);

/// Lowercase and split on runs of characters that are not ASCII letters or
/// digits. Bytes >= 0x80 count as word characters so UTF-8 words stay whole.
std::vector<std::string> tokenize(const std::string& text);

/// Top-n words by corpus frequency (ties broken lexicographically), raw counts.
SvmDataset build_bow_features(const std::vector<LabeledText>& corpus, Index vocab_size);

/// One document per line: label (+1 / -1), a tab, then the text.
std::vector<LabeledText> read_text_corpus(const std::string& path);
/// One sample per line: label then 0-based index:value pairs. `features` = 0
/// sizes the matrix from the largest index seen.
SvmDataset read_sparse_dataset(const std::string& path, Index features = 0);

/// Linearly separable documents over exactly `words` distinct words. Labels
/// come from a hidden weight vector; documents inside a margin are redrawn.
std::vector<LabeledText> synthetic_text_corpus(std::uint64_t seed, Index documents,
                                               Index words = 50);

/// f = (lambda/2)||w||^2, h(w; i) = max(0, 1 - y_i x_i^T w), L_f = sigma_f = lambda.
CompositeProblem make_svm_problem(const SvmDataset& train, double lambda);

struct SvmStep {
  Vector w;
  /// Dual point in [0,1]^N.
  Vector u;
  Minibatch batch;
  ProxResult inner;
};

/// v = (1 - lambda mu) w; u maximizes -(mu/(2N))||Xs_I u||^2 + u^T (e - Xs_I^T v)
/// over [0,1]^N; w+ = v + (mu/N) Xs_I u, with Xs the label-scaled data.
SvmStep svm_spgm_step(const SvmDataset& d, double lambda, const Vector& w, double mu,
                      Index batch_size, Rng& rng, double delta, const ProxOptions& options = {});

struct SvmMetrics {
  /// Test rows with sign(x^T w) = y; sign(0) counts as +1.
  double accuracy = 0.0;
  /// Mean hinge loss over the training rows.
  double hinge_loss = 0.0;
  std::optional<double> error;
};

SvmMetrics svm_metrics(const SvmSplit& data, const Vector& w, const Vector* w_ref = nullptr);
double svm_accuracy(const SvmDataset& d, const Vector& w);
double svm_mean_hinge(const SvmDataset& d, const Vector& w);

}  // namespace spgm
