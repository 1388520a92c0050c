#include "relmine/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "relmine/error.hpp"

namespace relmine {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw Error("matrix entry count does not match rows*cols");
  }
}

void Matrix::fill(double value) {
  std::fill(entries_.begin(), entries_.end(), value);
}

bool Matrix::all_finite() const {
  return std::all_of(entries_.begin(), entries_.end(),
                     [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& w, const Matrix& x) {
  if (w.cols() != x.rows()) {
    throw Error("matmul shape mismatch: (" + std::to_string(w.rows()) + "x" +
                std::to_string(w.cols()) + ") * (" + std::to_string(x.rows()) +
                "x" + std::to_string(x.cols()) + ")");
  }
  Matrix out(w.rows(), x.cols());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    double* out_row = out.row(i);
    const double* w_row = w.row(i);
    for (std::size_t k = 0; k < w.cols(); ++k) {
      const double a = w_row[k];
      if (a == 0.0) continue;
      const double* x_row = x.row(k);
      for (std::size_t j = 0; j < x.cols(); ++j) out_row[j] += a * x_row[j];
    }
  }
  return out;
}

Matrix affine(const Matrix& w, const Matrix& x, const Matrix& b) {
  if (b.rows() != w.rows() || b.cols() != 1) {
    throw Error("affine bias must be (" + std::to_string(w.rows()) + "x1)");
  }
  Matrix out = matmul(w, x);
  for (std::size_t i = 0; i < out.rows(); ++i) {
    double* out_row = out.row(i);
    for (std::size_t j = 0; j < out.cols(); ++j) out_row[j] += b(i, 0);
  }
  return out;
}

double sigmoid(double x) {
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Matrix activate(Activation kind, const Matrix& x) {
  Matrix out(x.rows(), x.cols());
  const double* in = x.data();
  double* o = out.data();
  if (kind == Activation::sigmoid) {
    for (std::size_t i = 0; i < x.size(); ++i) o[i] = sigmoid(in[i]);
  } else {
    for (std::size_t i = 0; i < x.size(); ++i) o[i] = std::tanh(in[i]);
  }
  return out;
}

std::vector<double> finite_difference_gradient(
    const std::function<double(std::span<const double>)>& f,
    std::span<const double> params, double epsilon) {
  if (epsilon <= 0.0) throw Error("finite differences need epsilon > 0");
  std::vector<double> p(params.begin(), params.end());
  std::vector<double> grad(p.size(), 0.0);
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double saved = p[i];
    p[i] = saved + epsilon;
    const double up = f(p);
    p[i] = saved - epsilon;
    const double down = f(p);
    p[i] = saved;
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw NumericError("non-finite loss at coordinate " + std::to_string(i));
    }
    grad[i] = (up - down) / (2.0 * epsilon);
  }
  return grad;
}

std::uint64_t Rng::next_below(std::uint64_t bound) {
  if (bound == 0) throw Error("next_below needs bound > 0");
  return next_u64() % bound;
}

double Rng::next_double() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) {
  return lo + (hi - lo) * next_double();
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t salt) {
  std::uint64_t z = seed ^ (salt * 0x9E3779B97F4A7C15ULL);
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix out(rows, cols);
  const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  double* o = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) o[i] = rng.uniform(-s, s);
  return out;
}

}  // namespace relmine
