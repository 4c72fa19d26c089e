#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "bwnn/ntk.hpp"

using namespace bwnn;

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<std::vector<double>> unit_probes(int m, int d, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<std::vector<double>> out;
  for (int i = 0; i < m; ++i) {
    std::vector<double> x = sample_gaussian(rng, d);
    double n = norm2(x);
    for (auto& v : x) v /= n;
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace

TEST_CASE("relu arc-cosine pieces at the corners") {
  CHECK(relu_sigma0(1.0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(relu_sigma0(0.0) == doctest::Approx(0.25).epsilon(1e-13));
  CHECK(relu_sigma0(-1.0) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(relu_sigma1(1.0) == doctest::Approx(0.5).epsilon(1e-13));
  CHECK(relu_sigma1(0.0) == doctest::Approx(1.0 / (2.0 * kPi)).epsilon(1e-13));
  CHECK(relu_sigma1(-1.0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(analytic_ntk_relu(0.0, 1.0, 4, 1.0) ==
        doctest::Approx(0.25 + 1.0 / (2.0 * kPi)).epsilon(1e-13));
  CHECK_THROWS(analytic_ntk_relu(1.5, 1.0, 4, 1.0));
}

TEST_CASE("analytic kernel closed form at zero weight variance") {
  // var_theta = 0 collapses the bivariate expectation to a point mass at 0:
  // K(t) = (c t / d + beta^2)/4 + (c/d)/(2 pi)
  const double c = 1.3;
  const int d = 8;
  const double beta = 0.6;
  for (double t : {-1.0, -0.4, 0.0, 0.5, 1.0}) {
    double want = (c * t / d + beta * beta) * 0.25 + (c / d) / (2.0 * kPi);
    CHECK(analytic_ntk_bwnn(t, c, d, 0.0, beta) == doctest::Approx(want).epsilon(1e-10));
  }
}

TEST_CASE("quadrature order 64 already converged") {
  for (double t : {-0.99, -0.5, 0.0, 0.7, 0.999, 1.0}) {
    double a = analytic_ntk_bwnn(t, 1.0, 6, 1.0 / 3.0, 1.0, 64);
    double b = analytic_ntk_bwnn(t, 1.0, 6, 1.0 / 3.0, 1.0, 128);
    CHECK(std::abs(a - b) < 1e-8);
  }
}

TEST_CASE("analytic kernel matches its monte carlo estimate") {
  Rng rng(5);
  for (double t : {-0.8, 0.0, 0.6}) {
    double quad = analytic_ntk_bwnn(t, 1.0, 6, 1.0 / 3.0, 1.0);
    double mc = analytic_ntk_bwnn_mc(t, 1.0, 6, 1.0 / 3.0, 1.0, 400000, rng);
    CHECK(std::abs(quad - mc) < 0.01);
  }
}

TEST_CASE("analytic kernel increases with input correlation") {
  double prev = -1e9;
  for (double t = -1.0; t <= 1.0; t += 0.05) {
    double k = analytic_ntk_bwnn(t, 1.0, 8, 0.25, 1.0);
    CHECK(k > prev);
    prev = k;
  }
}

TEST_CASE("factorized empirical kernel equals the naive gradient inner products") {
  Rng rng(7);
  ModelParams p = init_params({6, 24, 20}, 1.2, 0.8, ThetaInit::Uniform, 1.0, rng);
  for (auto& b : p.b1) b = rng.uniform(-0.3, 0.3);
  auto probes = unit_probes(6, 6, 8);
  KernelMatrix fast = empirical_ntk(p, probes);
  KernelMatrix slow = empirical_ntk_naive(p, probes);
  REQUIRE(fast.gram.rows == 6);
  for (std::size_t i = 0; i < fast.gram.data.size(); ++i)
    CHECK(fast.gram.data[i] ==
          doctest::Approx(slow.gram.data[i]).epsilon(1e-10));
}

TEST_CASE("empirical kernel on a hand-pinned network") {
  // theta = 0, b1 = 0, w2 = 1: every neuron contributes identically.
  ModelParams p;
  p.dims = {4, 50, 10};
  p.c = 1.0;
  p.beta = 0.5;
  Rng rng(9);
  p.w0 = Matrix(4, 50);
  for (auto& v : p.w0.data) v = rng.next_gaussian();
  p.b0.assign(50, 0.0);
  p.theta1.theta = Matrix(50, 10, 0.0);
  p.b1.assign(10, 0.0);
  p.w2.assign(10, 1.0);

  auto probes = unit_probes(3, 4, 10);
  KernelMatrix k = empirical_ntk(p, probes);
  const double vs2 = 0.25;  // (c/d)(1 - 0)
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      std::vector<double> x1a = project_input(p, probes[a]);
      std::vector<double> x1b = project_input(p, probes[b]);
      double want = (p.c / 50.0) * dot(x1a, x1b) * 0.25 + p.beta * p.beta * 0.25 +
                    vs2 / (2.0 * kPi);
      CHECK(k.gram(a, b) == doctest::Approx(want).epsilon(1e-12));
    }
}

TEST_CASE("gram validation accepts kernels and rejects asymmetry") {
  auto probes = unit_probes(8, 5, 11);
  KernelMatrix k = analytic_gram(probes, 1.0, 5, 1.0 / 3.0, 1.0);
  CHECK(k.validate());
  CHECK(k.provenance == "analytic-bwnn");

  Rng rng(12);
  ModelParams p = init_params({5, 64, 48}, 1.0, 1.0, ThetaInit::Uniform, 1.0, rng);
  KernelMatrix e = empirical_ntk(p, probes);
  CHECK(e.validate());
  for (int a = 0; a < 8; ++a) CHECK(e.gram(a, a) > 0.0);

  e.gram(0, 1) += 1e-6;
  CHECK_FALSE(e.validate());
}

TEST_CASE("finite-width kernel approaches the analytic limit") {
  auto probes = unit_probes(4, 6, 13);
  auto rel_err = [&](int width) {
    Rng rng(14);
    ModelParams p = init_params({6, width, width}, 1.0, 1.0, ThetaInit::Uniform, 1.0, rng);
    KernelMatrix emp = empirical_ntk(p, probes);
    KernelMatrix ana = analytic_gram(probes, 1.0, 6, empirical_var_theta(p), 1.0);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < emp.gram.data.size(); ++i) {
      double e = emp.gram.data[i] - ana.gram.data[i];
      num += e * e;
      den += ana.gram.data[i] * ana.gram.data[i];
    }
    return std::sqrt(num / den);
  };
  double narrow = rel_err(64);
  double wide = rel_err(1024);
  CHECK(wide < narrow);
  CHECK(wide < 0.15);
}

TEST_CASE("kernel ridge identities") {
  KernelMatrix id;
  id.gram = Matrix(3, 3);
  for (int i = 0; i < 3; ++i) id.gram(i, i) = 1.0;
  std::vector<double> y = {1.0, -2.0, 0.5};
  auto coeffs = kernel_ridge_fit(id, y, 0.5);
  for (int i = 0; i < 3; ++i) CHECK(coeffs[i] == doctest::Approx(y[i] / 1.5).epsilon(1e-12));
  auto pred = kernel_ridge_predict(id.gram, coeffs);
  for (int i = 0; i < 3; ++i) CHECK(pred[i] == doctest::Approx(y[i] / 1.5).epsilon(1e-12));
  CHECK_THROWS(kernel_ridge_fit(id, y, 0.0));
  CHECK_THROWS(kernel_ridge_predict(Matrix(2, 2), y));
}

TEST_CASE("small-ridge kernel regression interpolates the targets") {
  auto probes = unit_probes(6, 5, 15);
  KernelMatrix k = analytic_gram(probes, 1.0, 5, 1.0 / 3.0, 1.0);
  std::vector<double> y = {0.3, -1.0, 0.7, 0.1, -0.4, 0.9};
  auto coeffs = kernel_ridge_fit(k, y, 1e-10);
  auto pred = kernel_ridge_predict(k.gram, coeffs);
  for (int i = 0; i < 6; ++i) CHECK(pred[i] == doctest::Approx(y[i]).epsilon(1e-5));
}

TEST_CASE("kernel csv carries provenance and the full matrix") {
  auto probes = unit_probes(3, 4, 16);
  KernelMatrix k = analytic_gram(probes, 1.0, 4, 0.25, 1.0);
  const char* path = "test_ntk_kernel.csv";
  write_kernel_csv(k, path);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "# provenance=analytic-bwnn m=3");
  int lines = 0;
  std::string line;
  while (std::getline(is, line)) ++lines;
  CHECK(lines == 3);
  std::remove(path);
}

TEST_CASE("out-of-range correlation rejected") {
  CHECK_THROWS(analytic_ntk_bwnn(1.2, 1.0, 4, 0.25, 1.0));
  Rng rng(17);
  CHECK_THROWS(analytic_ntk_bwnn_mc(-1.2, 1.0, 4, 0.25, 1.0, 1000, rng));
}
