#include "bwnn/quasi.hpp"

#include <algorithm>
#include <cmath>

namespace bwnn {

double empirical_var_theta(const ModelParams& p) {
  double s = 0.0;
  for (double v : p.theta1.theta.data) s += v * v;
  return s / static_cast<double>(p.theta1.theta.data.size());
}

MomentState propagate_moments(const ModelParams& p, const std::vector<double>& x,
                              VarianceMode mode) {
  require_unit_norm(x);
  const int d1 = p.dims.d1, d2 = p.dims.d2;
  MomentState st;
  st.x1 = project_input(p, x);

  st.nu1.assign(d2, 0.0);
  const double scale1 = std::sqrt(p.c / d1);
  const Matrix& th = p.theta1.theta;
  for (int i = 0; i < d1; ++i) {
    const double xi = st.x1[i] * scale1;
    const double* row = &th.data[static_cast<std::size_t>(i) * d2];
    for (int j = 0; j < d2; ++j) st.nu1[j] += row[j] * xi;
  }
  for (int j = 0; j < d2; ++j) st.nu1[j] += p.beta * p.b1[j];

  if (mode == VarianceMode::Limit) {
    st.varsigma1_sq.assign(1, tilde_varsigma_sq(p.c, p.dims.d, empirical_var_theta(p)));
  } else {
    st.varsigma1_sq.assign(d2, 0.0);
    const double s2 = p.c / d1;
    for (int i = 0; i < d1; ++i) {
      const double xi2 = st.x1[i] * st.x1[i] * s2;
      const double* row = &th.data[static_cast<std::size_t>(i) * d2];
      for (int j = 0; j < d2; ++j) st.varsigma1_sq[j] += (1.0 - row[j] * row[j]) * xi2;
    }
  }

  st.mu2.resize(d2);
  st.sigma2_sq.resize(d2);
  for (int j = 0; j < d2; ++j) {
    double vs2 = st.varsigma1_sq[mode == VarianceMode::Limit ? 0 : j];
    if (vs2 <= 0.0) {
      // Degenerate: deterministic weights, exact ReLU.
      st.mu2[j] = std::max(st.nu1[j], 0.0);
      st.sigma2_sq[j] = 0.0;
    } else {
      auto [m, v] = relu_moments(st.nu1[j], std::sqrt(vs2));
      st.mu2[j] = m;
      st.sigma2_sq[j] = v;
    }
  }

  double acc = 0.0;
  for (int j = 0; j < d2; ++j) acc += p.w2[j] * st.mu2[j];
  st.ybar = acc / std::sqrt(static_cast<double>(d2)) + p.beta * p.b2;
  return st;
}

QuasiGrad quasi_backward(const ModelParams& p, const MomentState& state, double loss_grad) {
  const int d1 = p.dims.d1, d2 = p.dims.d2;
  if (static_cast<int>(state.nu1.size()) != d2 || static_cast<int>(state.x1.size()) != d1)
    throw std::invalid_argument("quasi_backward: state shape mismatch");

  QuasiGrad g;
  g.d_theta1 = Matrix(d1, d2);
  g.d_b1.assign(d2, 0.0);
  g.d_w2.assign(d2, 0.0);
  if (loss_grad == 0.0) return g;

  const double inv_sqrt_d2 = 1.0 / std::sqrt(static_cast<double>(d2));
  std::vector<double> act_grad(d2);
  for (int j = 0; j < d2; ++j) {
    double vs2 = state.varsigma1_sq[state.varsigma1_sq.size() == 1 ? 0 : j];
    act_grad[j] = vs2 > 0.0 ? quasi_act_grad(state.nu1[j], std::sqrt(vs2))
                            : (state.nu1[j] > 0.0 ? 1.0 : 0.0);
  }
  for (int j = 0; j < d2; ++j) {
    g.d_w2[j] = inv_sqrt_d2 * state.mu2[j] * loss_grad;
    g.d_b1[j] = inv_sqrt_d2 * p.beta * p.w2[j] * act_grad[j] * loss_grad;
  }
  const double scale_theta = std::sqrt(p.c / (static_cast<double>(d1) * d2)) * loss_grad;
  for (int i = 0; i < d1; ++i) {
    double* row = &g.d_theta1.data[static_cast<std::size_t>(i) * d2];
    const double xi = state.x1[i] * scale_theta;
    for (int j = 0; j < d2; ++j) row[j] = xi * p.w2[j] * act_grad[j];
  }
  return g;
}

namespace {

McForwardStats mc_forward_impl(const ModelParams& p, const std::vector<double>& x, int n_samples,
                               Rng& rng, bool parallel) {
  if (n_samples < 100) throw std::invalid_argument("mc_forward_stats: need n >= 100");
  require_unit_norm(x);
  const int d1 = p.dims.d1, d2 = p.dims.d2;

  McForwardStats out;
  out.y1_samples = Matrix(n_samples, d2);
  std::vector<double> ys(n_samples);

  const std::vector<double> x1 = project_input(p, x);
  const double scale1 = std::sqrt(p.c / d1);
  const double inv_sqrt_d2 = 1.0 / std::sqrt(static_cast<double>(d2));
  const Matrix& th = p.theta1.theta;

  Rng base(rng.next_u64());
#pragma omp parallel for if (parallel) schedule(static)
  for (int s = 0; s < n_samples; ++s) {
    Rng srng = base.substream(static_cast<std::uint64_t>(s));
    double* y1 = &out.y1_samples.data[static_cast<std::size_t>(s) * d2];
    for (int j = 0; j < d2; ++j) y1[j] = p.beta * p.b1[j];
    // Quantize on the fly; never materializes the d1 x d2 sample.
    for (int i = 0; i < d1; ++i) {
      const double xi = x1[i] * scale1;
      const double* row = &th.data[static_cast<std::size_t>(i) * d2];
      for (int j = 0; j < d2; ++j) {
        double w = srng.next_double() < 0.5 * (row[j] + 1.0) ? 1.0 : -1.0;
        y1[j] += w * xi;
      }
    }
    double acc = 0.0;
    for (int j = 0; j < d2; ++j) acc += p.w2[j] * std::max(y1[j], 0.0);
    ys[s] = acc * inv_sqrt_d2 + p.b2;
  }

  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= n_samples;
  double var = 0.0;
  for (double y : ys) var += (y - mean) * (y - mean);
  out.mean = mean;
  out.var = n_samples > 1 ? var / (n_samples - 1) : 0.0;
  return out;
}

}  // namespace

McForwardStats mc_forward_stats(const ModelParams& p, const std::vector<double>& x, int n_samples,
                                Rng& rng) {
  return mc_forward_impl(p, x, n_samples, rng, true);
}

McForwardStats mc_forward_stats_serial(const ModelParams& p, const std::vector<double>& x,
                                       int n_samples, Rng& rng) {
  return mc_forward_impl(p, x, n_samples, rng, false);
}

double ks_statistic_gaussian(std::vector<double> samples, double mu, double sigma) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double ks = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    double cdf = sigma > 0.0 ? gauss_cdf((samples[i] - mu) / sigma) : (samples[i] >= mu ? 1.0 : 0.0);
    ks = std::max(ks, std::abs((i + 1) / n - cdf));
    ks = std::max(ks, std::abs(cdf - i / n));
  }
  return ks;
}

}  // namespace bwnn
