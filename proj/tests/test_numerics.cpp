#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <span>
#include <vector>

#include "doctest.h"
#include "relmine/error.hpp"
#include "relmine/numerics.hpp"

using namespace relmine;

TEST_SUITE("numerics") {

TEST_CASE("matrix construction, fill, and finiteness") {
  Matrix m(2, 3);
  CHECK(m.rows() == 2);
  CHECK(m.cols() == 3);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 3; ++j) CHECK(m(i, j) == 0.0);

  Matrix v(2, 2, {1, 2, 3, 4});
  CHECK(v(0, 1) == 2);
  CHECK(v(1, 0) == 3);
  CHECK_THROWS_AS(Matrix(2, 2, {1.0}), Error);

  m.fill(7.5);
  CHECK(m(1, 2) == 7.5);
  CHECK(m.all_finite());
  m(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK(!m.all_finite());
  m(0, 0) = std::numeric_limits<double>::infinity();
  CHECK(!m.all_finite());

  CHECK(Matrix(2, 2, {1, 2, 3, 4}) == v);
  CHECK(!(Matrix(2, 2) == v));
}

TEST_CASE("matmul matches the textbook definition") {
  Matrix a(2, 2, {1, 2, 3, 4});
  Matrix b(2, 2, {5, 6, 7, 8});
  Matrix c = matmul(a, b);
  CHECK(c(0, 0) == 19);
  CHECK(c(0, 1) == 22);
  CHECK(c(1, 0) == 43);
  CHECK(c(1, 1) == 50);
  CHECK_THROWS_AS(matmul(Matrix(2, 3), Matrix(2, 3)), Error);

  // Random rectangular product with zeros sprinkled in, against a plain
  // triple loop accumulating in the same k order.
  Rng rng(11);
  Matrix w(3, 5), x(5, 4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t k = 0; k < 5; ++k) w(i, k) = rng.uniform(-2, 2);
  for (std::size_t k = 0; k < 5; ++k)
    for (std::size_t j = 0; j < 4; ++j) x(k, j) = rng.uniform(-2, 2);
  w(0, 1) = 0.0;
  w(2, 3) = 0.0;
  x(4, 0) = 0.0;
  Matrix got = matmul(w, x);
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      double ref = 0.0;
      for (std::size_t k = 0; k < 5; ++k) ref += w(i, k) * x(k, j);
      CHECK(got(i, j) == ref);
    }
  }
}

TEST_CASE("affine broadcasts the bias over columns") {
  Matrix w(2, 3, {1, 0, 2, 0, 1, 1});
  Matrix x(3, 2, {1, 2, 3, 4, 5, 6});
  Matrix b(2, 1, {10, 20});
  Matrix y = affine(w, x, b);
  // row 0: 1*1 + 2*5 + 10 = 21; 1*2 + 2*6 + 10 = 24
  CHECK(y(0, 0) == 21);
  CHECK(y(0, 1) == 24);
  // row 1: 3 + 5 + 20 = 28; 4 + 6 + 20 = 30
  CHECK(y(1, 0) == 28);
  CHECK(y(1, 1) == 30);
  CHECK_THROWS_AS(affine(w, x, Matrix(3, 1)), Error);
}

TEST_CASE("sigmoid is stable across the double range") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(745.0) == 1.0);
  CHECK(sigmoid(-708.0) > 0.0);
  CHECK(std::isfinite(sigmoid(-1e308)));
  CHECK(std::isfinite(sigmoid(1e308)));
  CHECK(sigmoid(-1e308) >= 0.0);
  CHECK(sigmoid(1e308) <= 1.0);
  for (double x : {0.5, 3.0, 30.0}) {
    CHECK(sigmoid(-x) == doctest::Approx(1.0 - sigmoid(x)).epsilon(1e-15));
  }
  CHECK(sigmoid(1.0) < sigmoid(2.0));
  CHECK(sigmoid(2.0) == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))));
}

TEST_CASE("activate applies the scalar function elementwise") {
  Matrix x(2, 2, {-1.5, 0.0, 0.25, 3.0});
  Matrix t = activate(Activation::tanh, x);
  Matrix s = activate(Activation::sigmoid, x);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(t(i, j) == std::tanh(x(i, j)));
      CHECK(s(i, j) == sigmoid(x(i, j)));
    }
  }
}

TEST_CASE("central differences recover a polynomial gradient") {
  auto f = [](std::span<const double> p) { return p[0] * p[0] + 3.0 * p[1]; };
  std::vector<double> at{2.0, 5.0};
  auto g = finite_difference_gradient(f, at, 1e-6);
  REQUIRE(g.size() == 2);
  CHECK(g[0] == doctest::Approx(4.0).epsilon(1e-6));
  CHECK(g[1] == doctest::Approx(3.0).epsilon(1e-9));

  auto bad = [](std::span<const double>) {
    return std::numeric_limits<double>::infinity();
  };
  CHECK_THROWS_AS(finite_difference_gradient(bad, at, 1e-6), NumericError);
}

TEST_CASE("rng reproduces the standard mt19937_64 stream") {
  // The 10000th draw of a default-seeded mt19937_64 is pinned by the
  // C++ standard; seed 5489 is that default.
  Rng r(5489u);
  std::uint64_t last = 0;
  for (int i = 0; i < 10000; ++i) last = r.next_u64();
  CHECK(last == 9981545732273789042ULL);
}

TEST_CASE("bounded draws and unit doubles stay in range") {
  Rng r(3);
  CHECK_THROWS_AS(r.next_below(0), Error);
  for (int i = 0; i < 3; ++i) CHECK(r.next_below(1) == 0);
  for (int i = 0; i < 300; ++i) CHECK(r.next_below(7) < 7);
  for (int i = 0; i < 300; ++i) {
    double d = r.next_double();
    CHECK(d >= 0.0);
    CHECK(d < 1.0);
  }
  for (int i = 0; i < 100; ++i) {
    double u = r.uniform(-2.0, 5.0);
    CHECK(u >= -2.0);
    CHECK(u < 5.0);
  }
}

TEST_CASE("shuffle is a deterministic permutation") {
  std::vector<int> v(20), w;
  for (int i = 0; i < 20; ++i) v[i] = i;
  w = v;
  Rng a(9), b(9);
  a.shuffle(v);
  b.shuffle(w);
  CHECK(v == w);

  std::vector<int> sorted = v;
  std::sort(sorted.begin(), sorted.end());
  for (int i = 0; i < 20; ++i) CHECK(sorted[i] == i);

  std::vector<int> u = sorted;
  Rng c(10);
  c.shuffle(u);
  CHECK(u != v);  // different seed, different order
}

TEST_CASE("derived seeds separate substreams") {
  CHECK(derive_seed(1, 0) == derive_seed(1, 0));
  std::set<std::uint64_t> seen;
  for (std::uint64_t salt = 0; salt < 100; ++salt) {
    seen.insert(derive_seed(42, salt));
  }
  CHECK(seen.size() == 100);
  CHECK(derive_seed(1, 2) != derive_seed(2, 1));
}

TEST_CASE("weight initializer respects its fan bound and draw budget") {
  Rng r(5);
  Matrix m = glorot_uniform(3, 4, r);
  const double s = std::sqrt(6.0 / 7.0);
  bool any_nonzero = false;
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(std::abs(m(i, j)) < s);
      if (m(i, j) != 0.0) any_nonzero = true;
    }
  }
  CHECK(any_nonzero);

  // Consumes exactly rows*cols engine draws.
  Rng a(5), b(5);
  glorot_uniform(3, 4, a);
  for (int i = 0; i < 12; ++i) b.next_u64();
  CHECK(a.next_u64() == b.next_u64());

  Rng c(5), d(5);
  CHECK(glorot_uniform(3, 4, c) == glorot_uniform(3, 4, d));
}

}  // TEST_SUITE
