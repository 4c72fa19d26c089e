#pragma once

#include "bwnn/network.hpp"
#include "bwnn/special.hpp"

namespace bwnn {

// Conditional moments propagated through the quantized layer and the ReLU.
struct MomentState {
  std::vector<double> x1;            // projected input, shared with the sampled net
  std::vector<double> nu1;           // conditional mean of pre-activations
  std::vector<double> varsigma1_sq;  // conditional variance (scalar in limit mode)
  std::vector<double> mu2;           // post-ReLU mean
  std::vector<double> sigma2_sq;     // post-ReLU variance
  double ybar = 0.0;                 // E[y | Theta]
};

enum class VarianceMode { Exact, Limit };

struct QuasiGrad {
  Matrix d_theta1;             // d1 x d2
  std::vector<double> d_b1;    // d2
  std::vector<double> d_w2;    // d2
};

// Limit variance (c/d)(1 - Var[theta]).
inline double tilde_varsigma_sq(double c, int d, double var_theta) {
  if (var_theta < 0.0 || var_theta > 1.0)
    throw std::invalid_argument("tilde_varsigma_sq: var_theta outside [0, 1]");
  if (d < 1 || c <= 0.0) throw std::invalid_argument("tilde_varsigma_sq: bad c or d");
  return (c / d) * (1.0 - var_theta);
}

// Smoothed ReLU: E[max(N(nu, vs^2), 0)] = vs*phi(nu/vs) + nu*Phi(nu/vs).
inline double quasi_act(double nu, double varsigma) {
  if (varsigma <= 0.0) throw std::invalid_argument("quasi_act: varsigma must be > 0");
  double r = nu / varsigma;
  return varsigma * gauss_pdf(r) + nu * gauss_cdf(r);
}

inline double quasi_act_grad(double nu, double varsigma) {
  if (varsigma <= 0.0) throw std::invalid_argument("quasi_act_grad: varsigma must be > 0");
  return gauss_cdf(nu / varsigma);
}

// Mean/variance of max(N(nu, vs^2), 0). Second moment (vs^2+nu^2)Phi + nu*vs*phi.
inline std::pair<double, double> relu_moments(double nu, double varsigma) {
  if (varsigma <= 0.0) throw std::invalid_argument("relu_moments: varsigma must be > 0");
  double r = nu / varsigma;
  double g = gauss_pdf(r), s = gauss_cdf(r);
  double mean = varsigma * g + nu * s;
  double second = (varsigma * varsigma + nu * nu) * s + nu * varsigma * g;
  return {mean, std::max(0.0, second - mean * mean)};
}

// Empirical Var[theta] over the buffer, used by limit mode.
double empirical_var_theta(const ModelParams& p);

MomentState propagate_moments(const ModelParams& p, const std::vector<double>& x,
                              VarianceMode mode = VarianceMode::Limit);

// Gradients of loss_grad * ybar w.r.t. {theta1, b1, w2}; state must come from
// propagate_moments on the same (params, x).
QuasiGrad quasi_backward(const ModelParams& p, const MomentState& state, double loss_grad);

struct McForwardStats {
  double mean = 0.0;
  double var = 0.0;
  Matrix y1_samples;  // n x d2, raw pre-activations for normality testing
};

// Monte Carlo over binary weight draws at fixed (params, x).
McForwardStats mc_forward_stats(const ModelParams& p, const std::vector<double>& x, int n_samples,
                                Rng& rng);
McForwardStats mc_forward_stats_serial(const ModelParams& p, const std::vector<double>& x,
                                       int n_samples, Rng& rng);

// One-sample Kolmogorov-Smirnov statistic against N(mu, sigma^2).
double ks_statistic_gaussian(std::vector<double> samples, double mu, double sigma);

}  // namespace bwnn
