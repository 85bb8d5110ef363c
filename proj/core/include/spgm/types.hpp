#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace spgm {

using Index = Eigen::Index;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Random stream used for minibatch draws. Always passed explicitly.
using Rng = std::mt19937_64;

/// A nonsmooth term offers no dual form (build_dual on zero/indicator terms).
class UnsupportedStructure : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A stepsize rule needs a constant the problem does not provide (sigma_f = 0).
class PolicyInapplicable : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class VocabularyTooSmall : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input files that cannot be opened or parsed.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// FNV-1a over raw bytes. Stable across runs and platforms with the same
/// floating point layout; used to key the reference-solution cache.
class ContentHash {
 public:
  void bytes(const void* data, std::size_t size) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
      state_ ^= p[i];
      state_ *= 0x100000001b3ULL;
    }
  }
  void tag(const std::string& s) { bytes(s.data(), s.size()); }
  void scalar(double x) { bytes(&x, sizeof x); }
  void integer(std::int64_t x) { bytes(&x, sizeof x); }
  void matrix(const Matrix& m) {
    integer(m.rows());
    integer(m.cols());
    bytes(m.data(), sizeof(double) * static_cast<std::size_t>(m.size()));
  }
  void vector(const Vector& v) {
    integer(v.size());
    bytes(v.data(), sizeof(double) * static_cast<std::size_t>(v.size()));
  }
  std::uint64_t value() const { return state_; }

 private:
  std::uint64_t state_ = 0xcbf29ce484222325ULL;
};

}  // namespace spgm
