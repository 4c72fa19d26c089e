#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>

#include "bwnn/dataset_io.hpp"
#include "bwnn/harness.hpp"

using namespace bwnn;

TEST_CASE("incomplete beta special cases") {
  CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(incomplete_beta(1.0, 2.0, 0.4) == doctest::Approx(2 * 0.4 - 0.16).epsilon(1e-12));
  CHECK(incomplete_beta(2.5, 1.5, 0.0) == 0.0);
  CHECK(incomplete_beta(2.5, 1.5, 1.0) == 1.0);
  // symmetry I_x(a,b) = 1 - I_{1-x}(b,a)
  CHECK(incomplete_beta(2.0, 3.5, 0.7) ==
        doctest::Approx(1.0 - incomplete_beta(3.5, 2.0, 0.3)).epsilon(1e-12));
}

TEST_CASE("student t tail probabilities") {
  CHECK(student_t_two_sided_p(0.0, 10) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(student_t_two_sided_p(50.0, 5) < 1e-6);
  // converges to the normal for large dof
  CHECK(student_t_two_sided_p(1.959964, 100000) == doctest::Approx(0.05).epsilon(1e-3));
  double prev = 1.0;
  for (double t = 0.5; t < 6.0; t += 0.5) {
    double p = student_t_two_sided_p(t, 7);
    CHECK(p < prev);
    prev = p;
  }
}

TEST_CASE("paired t test hand cases") {
  std::vector<double> b = {0, 0, 0, 0, 0};
  std::vector<double> a = {1, 2, 3, 4, 5};
  auto r = paired_ttest(a, b);
  CHECK(r.t == doctest::Approx(3.0 / std::sqrt(0.5)).epsilon(1e-12));
  CHECK_FALSE(r.degenerate);
  CHECK(r.p > 0.005);
  CHECK(r.p < 0.02);

  auto same = paired_ttest(b, b);
  CHECK(same.t == 0.0);
  CHECK(same.p == 1.0);
  CHECK(same.degenerate);

  std::vector<double> shifted = {1, 1, 1, 1, 1};
  auto deg = paired_ttest(shifted, b);
  CHECK(deg.degenerate);
  CHECK(deg.t == 1e9);
  CHECK(deg.p == 1e-9);
  auto negd = paired_ttest(b, shifted);
  CHECK(negd.t == -1e9);

  CHECK_THROWS(paired_ttest({1.0}, {2.0}));
  CHECK_THROWS(paired_ttest({1.0, 2.0}, {1.0}));
}

TEST_CASE("two-gaussian synthetic data geometry") {
  Dataset ds = make_synthetic(SyntheticKind::TwoGaussiansOnSphere, 200, 10, 0.2, 5);
  REQUIRE(ds.inputs.rows == 200);
  CHECK(ds.is_classification());
  CHECK(ds.train_idx.size() == 100);
  CHECK(ds.test_idx.size() == 100);
  std::vector<double> mp(10, 0.0), mm(10, 0.0);
  int np = 0, nm = 0;
  for (int i = 0; i < 200; ++i) {
    auto x = ds.row(i);
    CHECK(norm2(x) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(ds.targets[i]) == 1.0);
    if (ds.targets[i] > 0) {
      for (int k = 0; k < 10; ++k) mp[k] += x[k];
      ++np;
    } else {
      for (int k = 0; k < 10; ++k) mm[k] += x[k];
      ++nm;
    }
  }
  CHECK(np == 100);
  CHECK(nm == 100);
  // class means point in opposite directions at this noise level
  CHECK(dot(mp, mm) / (norm2(mp) * norm2(mm)) < -0.9);
}

TEST_CASE("random fourier synthetic data is bounded and reproducible") {
  Dataset a = make_synthetic(SyntheticKind::RandomFourierTarget, 60, 6, 0.0, 9, 0.5, 2.0);
  Dataset b = make_synthetic(SyntheticKind::RandomFourierTarget, 60, 6, 0.0, 9, 0.5, 2.0);
  CHECK_FALSE(a.is_classification());
  CHECK(a.inputs.data == b.inputs.data);
  CHECK(a.targets == b.targets);
  CHECK(a.train_idx == b.train_idx);
  for (double t : a.targets) CHECK(std::abs(t) <= 1.0);
  CHECK_THROWS(make_synthetic(SyntheticKind::RandomFourierTarget, 5, 6, 0.0, 9));
}

TEST_CASE("median pairwise distance on a hand triangle") {
  Dataset ds;
  ds.inputs = Matrix(3, 2);
  ds.inputs(0, 0) = 1.0;
  ds.inputs(1, 1) = 1.0;
  ds.inputs(2, 0) = -1.0;
  ds.train_idx = {0, 1, 2};
  // distances: sqrt(2), 2, sqrt(2); median = sqrt(2)
  CHECK(median_pairwise_distance(ds) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("quasi verification passes at moderate width") {
  // the KS noise floor is ~1/sqrt(n), so the 0.05 threshold needs both a wide
  // projection layer and enough samples
  VerifyQuasiConfig cfg;
  cfg.d = 8;
  cfg.d1 = 1600;
  cfg.d2 = 4;
  cfg.n_samples = 1000;
  cfg.n_probes = 8;
  cfg.seed = 11;
  auto rep = verify_quasi(cfg);
  CHECK(rep.n_neurons_tested == 32);
  CHECK(rep.ks_pass_rate > 0.9);
  CHECK(rep.ks_median < 0.05);
  CHECK(rep.pearson_r > 0.99);

  VerifyQuasiConfig bad;
  bad.d1 = 10;
  CHECK_THROWS(verify_quasi(bad));
}

TEST_CASE("generalization suite produces paired comparisons") {
  std::vector<Dataset> data;
  data.push_back(make_synthetic(SyntheticKind::TwoGaussiansOnSphere, 60, 6, 0.6, 21));
  data.push_back(make_synthetic(SyntheticKind::TwoGaussiansOnSphere, 60, 6, 0.8, 22));
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  SuiteConfig cfg;
  cfg.d1 = 16;
  cfg.d2 = 32;
  cfg.epochs = 20;
  std::vector<ModelKind> models = {ModelKind::RealNN, ModelKind::BWNN, ModelKind::KernelLaplace,
                                   ModelKind::KernelGaussian};
  auto rep = generalization_suite(models, data, seeds, cfg);
  CHECK(rep.cells.size() == 40);
  REQUIRE(rep.pairs.size() == 2);
  CHECK(rep.pairs[0].first == "real-nn");
  CHECK(rep.pairs[0].second == "bwnn");
  CHECK(rep.pairs[1].first == "kernel-laplace");
  for (const auto& c : rep.cells) {
    if (c.diverged) continue;
    CHECK(c.train_metric >= 0.0);
    CHECK(c.train_metric <= 1.0);
    CHECK(c.test_metric >= 0.0);
    CHECK(c.test_metric <= 1.0);
    CHECK(c.gap == doctest::Approx(c.train_metric - c.test_metric).epsilon(1e-12));
    // ridge-fit kernels should at least fit their own training split well
    if (c.model == ModelKind::KernelLaplace || c.model == ModelKind::KernelGaussian)
      CHECK(c.train_metric > 0.8);
  }

  const char* path = "test_harness_cmp.csv";
  write_comparison_csv(rep, path);
  std::ifstream is(path);
  std::string header;
  std::getline(is, header);
  CHECK(header == "model,dataset,seed,train_metric,test_metric,gap,diverged");
  std::remove(path);

  CHECK_THROWS(generalization_suite(models, data, {1, 2}, cfg));
}
