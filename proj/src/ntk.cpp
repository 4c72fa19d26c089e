#include "bwnn/ntk.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "bwnn/quadrature.hpp"

namespace bwnn {

bool KernelMatrix::validate() const {
  const std::size_t m = gram.rows;
  if (gram.cols != m) return false;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = i + 1; j < m; ++j)
      if (std::abs(gram(i, j) - gram(j, i)) > 1e-10) return false;
  auto ev = symmetric_eigenvalues(gram);
  double max_ev = std::abs(ev.back());
  return ev.front() >= -1e-8 * std::max(max_ev, 1.0);
}

KernelMatrix empirical_ntk(const ModelParams& p, const std::vector<std::vector<double>>& probes) {
  const int m = static_cast<int>(probes.size());
  const int d1 = p.dims.d1, d2 = p.dims.d2;

  // Per-probe pieces of the quasi gradients.
  std::vector<MomentState> states(m);
  std::vector<std::vector<double>> act_grads(m);
#pragma omp parallel for schedule(static)
  for (int a = 0; a < m; ++a) {
    states[a] = propagate_moments(p, probes[a], VarianceMode::Limit);
    act_grads[a].resize(d2);
    double vs = std::sqrt(states[a].varsigma1_sq[0]);
    for (int j = 0; j < d2; ++j) act_grads[a][j] = quasi_act_grad(states[a].nu1[j], vs);
  }

  KernelMatrix k;
  k.gram = Matrix(m, m);
  k.provenance = "empirical(d2=" + std::to_string(d2) + ")";
  k.probe_ids.resize(m);
  for (int i = 0; i < m; ++i) k.probe_ids[i] = i;

  const double c_over_d1d2 = p.c / (static_cast<double>(d1) * d2);
  const double beta2_over_d2 = p.beta * p.beta / d2;
  for (int a = 0; a < m; ++a) {
    for (int b = a; b < m; ++b) {
      double x1_dot = dot(states[a].x1, states[b].x1);
      double s0 = 0.0;  // sum_j w2j^2 psi'_a psi'_b
      double s1 = 0.0;  // sum_j mu2_a mu2_b
      for (int j = 0; j < d2; ++j) {
        s0 += p.w2[j] * p.w2[j] * act_grads[a][j] * act_grads[b][j];
        s1 += states[a].mu2[j] * states[b].mu2[j];
      }
      double val = c_over_d1d2 * x1_dot * s0 + beta2_over_d2 * s0 + s1 / d2;
      k.gram(a, b) = val;
      k.gram(b, a) = val;
    }
  }
  return k;
}

KernelMatrix empirical_ntk_naive(const ModelParams& p,
                                 const std::vector<std::vector<double>>& probes) {
  const int m = static_cast<int>(probes.size());
  std::vector<QuasiGrad> grads(m);
  for (int a = 0; a < m; ++a) {
    MomentState st = propagate_moments(p, probes[a], VarianceMode::Limit);
    grads[a] = quasi_backward(p, st, 1.0);
  }
  KernelMatrix k;
  k.gram = Matrix(m, m);
  k.provenance = "empirical-naive(d2=" + std::to_string(p.dims.d2) + ")";
  k.probe_ids.resize(m);
  for (int i = 0; i < m; ++i) k.probe_ids[i] = i;
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      double val = dot(grads[a].d_theta1.data, grads[b].d_theta1.data) +
                   dot(grads[a].d_b1, grads[b].d_b1) + dot(grads[a].d_w2, grads[b].d_w2);
      k.gram(a, b) = val;
      k.gram(b, a) = val;
    }
  return k;
}

namespace {

struct BivariateQuad {
  // E[f(mu) g(mu')] with (mu, mu') ~ N(0, v [[1, t], [t, 1]]).
  double v, t;
  const QuadratureRule& rule;

  double expect(const auto& f, const auto& g) const {
    const double sv = std::sqrt(v);
    const double inv_pi = 1.0 / 3.14159265358979323846;
    if (std::abs(std::abs(t) - 1.0) < 1e-12) {
      const double sgn = t > 0.0 ? 1.0 : -1.0;
      double s = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
        double z = std::sqrt(2.0) * rule.nodes[i] * sv;
        s += rule.weights[i] * f(z) * g(sgn * z);
      }
      return s * std::sqrt(inv_pi);
    }
    const double a = t, b = std::sqrt(1.0 - t * t);  // Cholesky of the correlation
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      double z1 = std::sqrt(2.0) * rule.nodes[i];
      double fi = f(sv * z1);
      double inner = 0.0;
      for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
        double z2 = std::sqrt(2.0) * rule.nodes[j];
        inner += rule.weights[j] * g(sv * (a * z1 + b * z2));
      }
      s += rule.weights[i] * fi * inner;
    }
    return s * inv_pi;
  }
};

}  // namespace

double analytic_ntk_bwnn(double t, double c, int d, double var_theta, double beta,
                         int quad_order) {
  if (std::abs(t) > 1.0) throw std::invalid_argument("analytic_ntk_bwnn: |t| > 1");
  const double v = (c / d) * var_theta;
  const double vs = std::sqrt(tilde_varsigma_sq(c, d, var_theta));
  auto rule = make_quadrature(QuadKind::GaussHermite, quad_order);
  BivariateQuad q{v, t, rule};
  auto act = [vs](double x) { return quasi_act(x, vs); };
  auto actg = [vs](double x) { return quasi_act_grad(x, vs); };
  double sigma0 = q.expect(actg, actg);
  double sigma1 = q.expect(act, act);
  return (c * t / d + beta * beta) * sigma0 + sigma1;
}

double analytic_ntk_bwnn_mc(double t, double c, int d, double var_theta, double beta,
                            int n_samples, Rng& rng) {
  if (std::abs(t) > 1.0) throw std::invalid_argument("analytic_ntk_bwnn_mc: |t| > 1");
  const double sv = std::sqrt((c / d) * var_theta);
  const double vs = std::sqrt(tilde_varsigma_sq(c, d, var_theta));
  const double b = std::sqrt(std::max(0.0, 1.0 - t * t));
  double s0 = 0.0, s1 = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    double z1 = rng.next_gaussian(), z2 = rng.next_gaussian();
    double mu = sv * z1;
    double mup = sv * (t * z1 + b * z2);
    s0 += quasi_act_grad(mu, vs) * quasi_act_grad(mup, vs);
    s1 += quasi_act(mu, vs) * quasi_act(mup, vs);
  }
  s0 /= n_samples;
  s1 /= n_samples;
  return (c * t / d + beta * beta) * s0 + s1;
}

double relu_sigma0(double t) {
  const double pi = 3.14159265358979323846;
  return (pi - std::acos(std::min(1.0, std::max(-1.0, t)))) / (2.0 * pi);
}

double relu_sigma1(double t) {
  const double pi = 3.14159265358979323846;
  t = std::min(1.0, std::max(-1.0, t));
  return (std::sqrt(1.0 - t * t) + t * (pi - std::acos(t))) / (2.0 * pi);
}

double analytic_ntk_relu(double t, double c, int d, double beta) {
  if (std::abs(t) > 1.0) throw std::invalid_argument("analytic_ntk_relu: |t| > 1");
  return (c * t / d + beta * beta) * relu_sigma0(t) + relu_sigma1(t);
}

KernelMatrix analytic_gram(const std::vector<std::vector<double>>& probes, double c, int d,
                           double var_theta, double beta, int quad_order) {
  const int m = static_cast<int>(probes.size());
  KernelMatrix k;
  k.gram = Matrix(m, m);
  k.provenance = "analytic-bwnn";
  k.probe_ids.resize(m);
  for (int i = 0; i < m; ++i) k.probe_ids[i] = i;
  for (int a = 0; a < m; ++a)
    for (int b = a; b < m; ++b) {
      double t = dot(probes[a], probes[b]);
      t = std::min(1.0, std::max(-1.0, t));
      double val = analytic_ntk_bwnn(t, c, d, var_theta, beta, quad_order);
      k.gram(a, b) = val;
      k.gram(b, a) = val;
    }
  return k;
}

std::vector<double> kernel_ridge_fit(const KernelMatrix& k, const std::vector<double>& targets,
                                     double lambda) {
  if (lambda <= 0.0) throw std::invalid_argument("kernel_ridge_fit: lambda must be > 0");
  return cholesky_solve(k.gram, targets, lambda);
}

std::vector<double> kernel_ridge_predict(const Matrix& cross, const std::vector<double>& coeffs) {
  if (cross.cols != coeffs.size())
    throw std::invalid_argument("kernel_ridge_predict: shape mismatch");
  std::vector<double> out(cross.rows, 0.0);
  for (std::size_t i = 0; i < cross.rows; ++i)
    for (std::size_t j = 0; j < cross.cols; ++j) out[i] += cross(i, j) * coeffs[j];
  return out;
}

void write_kernel_csv(const KernelMatrix& k, const std::string& path) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("write_kernel_csv: cannot open " + tmp);
    os << "# provenance=" << k.provenance << " m=" << k.gram.rows << "\n";
    os.precision(17);
    for (std::size_t i = 0; i < k.gram.rows; ++i) {
      for (std::size_t j = 0; j < k.gram.cols; ++j)
        os << k.gram(i, j) << (j + 1 < k.gram.cols ? ',' : '\n');
    }
  }
  std::rename(tmp.c_str(), path.c_str());
}

}  // namespace bwnn
