#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "bwnn/quant.hpp"

using namespace bwnn;

TEST_CASE("quantize_mean_var closed form") {
  auto [m0, v0] = quantize_mean_var(0.0);
  CHECK(m0 == 0.0);
  CHECK(v0 == 1.0);
  auto [m1, v1] = quantize_mean_var(1.0);
  CHECK(m1 == 1.0);
  CHECK(v1 == 0.0);
  auto [mh, vh] = quantize_mean_var(0.5);
  CHECK(mh == doctest::Approx(0.5));
  CHECK(vh == doctest::Approx(0.75));
  CHECK_THROWS(quantize_mean_var(1.5));
}

TEST_CASE("boundary theta quantizes deterministically") {
  Rng rng(1);
  QuantBuffer b{Matrix(4, 4, 1.0)};
  Matrix w = quantize(b, rng);
  for (double v : w.data) CHECK(v == 1.0);
  QuantBuffer bm{Matrix(4, 4, -1.0)};
  w = quantize(bm, rng);
  for (double v : w.data) CHECK(v == -1.0);
}

TEST_CASE("theta=0.5 hits +1 with probability 0.75") {
  Rng rng(2);
  QuantBuffer b{Matrix(100, 100, 0.5)};
  int plus = 0, total = 0;
  for (int rep = 0; rep < 20; ++rep) {
    Matrix w = quantize(b, rng);
    for (double v : w.data) {
      if (v == 1.0) ++plus;
      ++total;
    }
  }
  double p = static_cast<double>(plus) / total;
  // 4-sigma binomial CI around 0.75
  CHECK(std::abs(p - 0.75) < 4.0 * std::sqrt(0.75 * 0.25 / total));
}

TEST_CASE("sample mean and variance track (theta, 1-theta^2) on the theta grid") {
  const int n = 100000;
  for (double theta : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    Rng rng(3);
    double mean = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double w = quantize_entry(theta, rng);
      mean += w;
      m2 += w * w;
    }
    mean /= n;
    m2 /= n;
    double var = m2 - mean * mean;
    double true_var = 1.0 - theta * theta;
    double mean_sigma = std::sqrt(std::max(true_var, 1e-12) / n);
    CHECK(std::abs(mean - theta) <= 4.0 * mean_sigma + 1e-12);
    // Var of w^2-based estimator: bernoulli-derived bound
    CHECK(std::abs(var - true_var) <= 4.0 * std::sqrt(2.0 / n) + 1e-12);
  }
}

TEST_CASE("distinct entries are uncorrelated") {
  Rng rng(4);
  QuantBuffer b{Matrix(1, 2, 0.3)};
  const int n = 100000;
  double sa = 0, sb = 0, sab = 0;
  for (int i = 0; i < n; ++i) {
    Matrix w = quantize(b, rng);
    sa += w.data[0];
    sb += w.data[1];
    sab += w.data[0] * w.data[1];
  }
  double corr = (sab / n - (sa / n) * (sb / n)) / (1.0 - 0.09);
  CHECK(std::abs(corr) < 0.01);
}

TEST_CASE("out-of-range theta rejected, in-tolerance drift clamped") {
  Rng rng(5);
  QuantBuffer bad{Matrix(1, 1, 1.1)};
  CHECK_THROWS(quantize(bad, rng));
  QuantBuffer drift{Matrix(1, 1, 1.0 + 5e-13)};
  Matrix w = quantize(drift, rng);
  CHECK(w.data[0] == 1.0);
}

TEST_CASE("deterministic mode is sign(theta)") {
  Rng rng(6);
  Matrix th(1, 3);
  th.data = {-0.2, 0.0, 0.7};
  Matrix w = quantize(QuantBuffer{th}, rng, true);
  CHECK(w.data[0] == -1.0);
  CHECK(w.data[1] == 1.0);
  CHECK(w.data[2] == 1.0);
}

TEST_CASE("parallel path matches serial reference") {
  Matrix th(37, 23);
  Rng init(9);
  for (auto& v : th.data) v = init.uniform(-1.0, 1.0);
  Rng r1(10), r2(10);
  Matrix a = quantize(QuantBuffer{th}, r1);
  Matrix b = quantize_serial(QuantBuffer{th}, r2);
  CHECK(a.data == b.data);
}
