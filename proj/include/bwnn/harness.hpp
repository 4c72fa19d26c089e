#pragma once

#include "bwnn/dataset.hpp"
#include "bwnn/trainer.hpp"

namespace bwnn {

// --- Monte-Carlo verification of the quasi approximation ---

struct VerifyQuasiConfig {
  int d = 16;
  int d1 = 1600;
  int d2 = 32;
  int n_samples = 1000;
  int n_probes = 64;
  double c = 1.0;
  double beta = 1.0;
  std::uint64_t seed = 0;
  double ks_threshold = 0.05;
  double r_threshold = 0.99;
};

struct VerifyQuasiReport {
  double ks_pass_rate = 0.0;   // fraction of (probe, neuron) KS stats under threshold
  double ks_median = 0.0;
  double pearson_r = 0.0;      // quasi ybar vs MC mean across probes
  int n_neurons_tested = 0;
  bool pass = false;
};

VerifyQuasiReport verify_quasi(const VerifyQuasiConfig& cfg);

// --- Synthetic data ---

enum class SyntheticKind { TwoGaussiansOnSphere, RandomFourierTarget };

// Unit-norm inputs; +/-1 targets for the classification kind, bounded real
// targets for the regression kind. Split is 50/50 train/test by default.
Dataset make_synthetic(SyntheticKind kind, int m, int d, double noise, std::uint64_t seed,
                       double train_fraction = 0.5, double frequency = 1.0);

// --- Paired comparison ---

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-sided
  bool degenerate = false;
};

// Standard paired t statistic with two-sided p from the t distribution.
// Zero-variance nonzero difference reports a capped t with the degenerate flag.
TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b);

// Regularized incomplete beta (used for the t CDF); exposed for testing.
double incomplete_beta(double a, double b, double x);
double student_t_two_sided_p(double t, int dof);

// --- Generalization suite ---

enum class ModelKind { RealNN, BWNN, KernelLaplace, KernelGaussian, KernelBwnnNtk };

std::string model_kind_name(ModelKind k);

struct CellResult {
  ModelKind model;
  std::string dataset;
  std::uint64_t seed = 0;
  double train_metric = 0.0;  // accuracy for classification, -MSE for regression
  double test_metric = 0.0;
  double gap = 0.0;           // train - test
  bool diverged = false;
};

struct PairedComparison {
  std::string first, second;
  TTestResult gap_test;        // paired t on generalization gaps
  double first_higher_pct = 0.0, second_higher_pct = 0.0, tie_pct = 0.0;
  double mean_gap_first = 0.0, mean_gap_second = 0.0;
};

struct ComparisonReport {
  std::vector<CellResult> cells;
  std::vector<PairedComparison> pairs;  // (RealNN, BWNN) and (Laplace, Gaussian)
};

struct SuiteConfig {
  int d1 = 64;
  int d2 = 512;
  std::vector<double> lr_grid = {1e-3, 1e-2, 1e-1};
  int epochs = 100;
  double weight_decay = 0.001;
  double ridge = 1e-4;
};

ComparisonReport generalization_suite(const std::vector<ModelKind>& models,
                                      const std::vector<Dataset>& datasets,
                                      const std::vector<std::uint64_t>& seeds,
                                      const SuiteConfig& cfg = {});

// Median pairwise distance over the training split (kernel bandwidth heuristic).
double median_pairwise_distance(const Dataset& data);

void write_comparison_csv(const ComparisonReport& rep, const std::string& path);

}  // namespace bwnn
