#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace relmine {

/// Dense row-major matrix of doubles. Value type, zero-initialized.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), entries_(rows * cols, 0.0) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return entries_.size(); }

  double& operator()(std::size_t i, std::size_t j) {
    return entries_[i * cols_ + j];
  }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_[i * cols_ + j];
  }

  double* data() { return entries_.data(); }
  const double* data() const { return entries_.data(); }
  double* row(std::size_t i) { return entries_.data() + i * cols_; }
  const double* row(std::size_t i) const { return entries_.data() + i * cols_; }

  void fill(double value);
  bool all_finite() const;

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

/// w * x, shapes (m x k) * (k x n). Throws Error on shape mismatch.
Matrix matmul(const Matrix& w, const Matrix& x);

/// w * x + b with the (m x 1) bias broadcast over the columns of the product.
Matrix affine(const Matrix& w, const Matrix& x, const Matrix& b);

enum class Activation { sigmoid, tanh };

/// Numerically stable logistic function; never produces non-finite values.
double sigmoid(double x);

Matrix activate(Activation kind, const Matrix& x);

/// Central-difference gradient estimate (f(p+eps*e_i) - f(p-eps*e_i)) / (2 eps).
/// Throws NumericError if f evaluates to a non-finite value.
std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> params, double epsilon);

/// Deterministic random generator. The engine is the 64-bit Mersenne Twister
/// (mt19937_64) as specified by the C++ standard; all derived draws use the
/// fixed mappings documented on each method so that any implementation of
/// mt19937_64 reproduces identical sequences from the same seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Raw 64-bit draw from the engine.
  std::uint64_t next_u64() { return engine_(); }

  /// Integer in [0, bound): next_u64() % bound. bound must be > 0.
  std::uint64_t next_below(std::uint64_t bound);

  /// Real in [0, 1): (next_u64() >> 11) * 2^-53.
  double next_double();

  /// Real in [lo, hi): lo + (hi - lo) * next_double().
  double uniform(double lo, double hi);

  /// In-place Fisher-Yates: for i = n-1 down to 1, swap v[i] with
  /// v[next_below(i + 1)].
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

/// Stream derivation for independent sub-generators: splitmix64 finalizer
/// applied to seed XOR (salt * golden gamma). Documented so partial reruns
/// (per fold, per epoch) see identical streams.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt);

/// Weight initializer: entries uniform in (-s, s) with
/// s = sqrt(6 / (fan_in + fan_out)), fan_in = cols, fan_out = rows.
/// Consumes rows*cols draws in row-major order.
Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace relmine
