#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bwnn/quadrature.hpp"
#include "bwnn/rng.hpp"

namespace bwnn {

// Per-degree zonal coefficients u_k with f(t) = sum_k u_k N(d,k) P_k(t).
struct DecayFit {
  double exp_slope = 0.0, exp_intercept = 0.0, exp_r2 = 0.0;      // log u = a k + b
  double pow_exponent = 0.0, pow_intercept = 0.0, pow_r2 = 0.0;   // log u = -p log k + b
  int k_min = 0, k_max = 0;
  int parity = 2;  // 0 even, 1 odd, 2 both
};

struct SpectrumTable {
  int dim = 0;
  std::vector<double> coeffs;        // index = degree k
  std::vector<std::uint64_t> n_dk;   // N(d, k)
  bool quad_converged = true;
  DecayFit fit;
};

// Legendre polynomial of degree k in ambient dimension d, normalized P_k(1)=1.
// Three-term recurrence; k capped at 256.
double legendre_eval(int d, int k, double t);

// All degrees 0..kmax at one point.
std::vector<double> legendre_all(int d, int kmax, double t);

// N(d,k) = (2k+d-2)(k+d-3)! / (k! (d-2)!), exact; throws past 64-bit range.
std::uint64_t n_dk(int d, int k);

// Orthogonality residual |<P_j, P_k>_w - delta_jk Z/N(d,k)| / (Z/N(d,k)).
double gegenbauer_orthogonality_residual(int d, int j, int k, int quad_order = 256);

// Zonal projection with self-normalized constant Z = integral of the weight:
// u_k = (1/Z) int f(t) P_k(t) (1-t^2)^((d-3)/2) dt. Convergence flagged by
// comparing against a doubled-order rule.
SpectrumTable project_zonal(const std::function<double(double)>& f, int d, int kmax,
                            int quad_order = 256);

// Coefficient tables of the quasi activation and its derivative at unit
// variance scale: t -> quasi_act(c_hat t, 1) and t -> Phi(c_hat t).
struct ActivationSpectra {
  SpectrumTable lambda;        // psi~, supported on even k (plus the linear k=1 term)
  SpectrumTable lambda_prime;  // psi~', supported on odd k (plus the constant k=0 term)
};
ActivationSpectra activation_coeffs(double c_hat, int d, int kmax, int quad_order = 256);

// Eigen-decomposition of the analytic infinite-width kernel. Reports the
// effective scale t_c = sqrt(Var/(1-Var)).
struct KernelSpectrum {
  SpectrumTable table;
  double t_c_effective = 0.0;
};
KernelSpectrum kernel_eigen_bwnn(double c, int d, double var_theta, double beta, int kmax,
                                 int quad_order = 256);

// Coefficients of t*f(t) from those of f(t), via the Legendre shift recurrence.
std::vector<double> shift_coeffs_by_t(const std::vector<double>& coeffs, int d);

// Randomized-scale Gaussian kernel, closed form via the chi-square MGF:
// K(t) = (1 + 2(2-2t)/xi^2)^(-d/2).
double rgauss_kernel(double t, int d, double xi);
// Monte Carlo validation path (draws kappa ~ chi_d).
double rgauss_kernel_mc(double t, int d, double xi, int n_samples, Rng& rng);
SpectrumTable kernel_eigen_rgauss(int d, double xi, int kmax, int quad_order = 256);

// Distance kernels on the sphere (||x-x'|| = sqrt(2-2t)).
double laplace_kernel(double t, double bandwidth);
double gaussian_kernel(double t, double bandwidth);

// Fits log u_k = a k + b and log u_k = -p log k + b on the stated parity class
// over [k_min, k_max]; needs >= 6 strictly positive coefficients in range.
DecayFit fit_decay(const SpectrumTable& table, int k_min, int k_max, int parity);

void write_spectrum_csv(const SpectrumTable& table, const std::string& path);

}  // namespace bwnn
