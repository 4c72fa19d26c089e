#pragma once

#include <string>

#include "bwnn/quasi.hpp"

namespace bwnn {

struct KernelMatrix {
  Matrix gram;             // symmetric m x m
  std::string provenance;  // empirical(d2=..), analytic-bwnn, analytic-relu, rgauss(xi=..)
  std::vector<int> probe_ids;

  // Symmetry within 1e-10, min eigenvalue >= -1e-8 * max eigenvalue.
  bool validate() const;
};

// NTK of the quasi network at finite width over a probe set. The gradient
// inner products factorize over layers, so cost is O(m^2 d2 + m d1 d2).
KernelMatrix empirical_ntk(const ModelParams& p, const std::vector<std::vector<double>>& probes);

// Test oracle: assembles full gradient vectors via quasi_backward and takes
// raw inner products. O(m^2 d1 d2); small sizes only.
KernelMatrix empirical_ntk_naive(const ModelParams& p,
                                 const std::vector<std::vector<double>>& probes);

// Infinite-width kernel K(t) = (c t / d + beta^2) Sigma0 + Sigma1 where
// Sigma0/Sigma1 are Gaussian expectations of the quasi activation pair over a
// bivariate normal with variance (c/d) Var[theta] and correlation t.
double analytic_ntk_bwnn(double t, double c, int d, double var_theta, double beta,
                         int quad_order = 64);

// Monte Carlo fallback for the same expectations (validation only).
double analytic_ntk_bwnn_mc(double t, double c, int d, double var_theta, double beta,
                            int n_samples, Rng& rng);

// Two-layer ReLU NTK baseline with the same scale conventions (arc-cosine forms).
double analytic_ntk_relu(double t, double c, int d, double beta);
double relu_sigma0(double t);
double relu_sigma1(double t);

KernelMatrix analytic_gram(const std::vector<std::vector<double>>& probes, double c, int d,
                           double var_theta, double beta, int quad_order = 64);

// Dual coefficients of (K + lambda I)^{-1} targets.
std::vector<double> kernel_ridge_fit(const KernelMatrix& k, const std::vector<double>& targets,
                                     double lambda);
// predictions = K_cross (n_test x n_train) * coeffs
std::vector<double> kernel_ridge_predict(const Matrix& cross, const std::vector<double>& coeffs);

// CSV export: header carries provenance/parameters, then row-major values.
void write_kernel_csv(const KernelMatrix& k, const std::string& path);

}  // namespace bwnn
