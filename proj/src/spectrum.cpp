#include "bwnn/spectrum.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "bwnn/ntk.hpp"
#include "bwnn/quasi.hpp"

namespace bwnn {

double legendre_eval(int d, int k, double t) {
  if (k > 256) throw std::invalid_argument("legendre_eval: degree > 256");
  if (std::abs(t) > 1.0) throw std::invalid_argument("legendre_eval: |t| > 1");
  if (d < 2) throw std::invalid_argument("legendre_eval: d < 2");
  double pm1 = 1.0, p = t;
  if (k == 0) return pm1;
  for (int n = 1; n < k; ++n) {
    double pn = ((2.0 * n + d - 2.0) * t * p - n * pm1) / (n + d - 2.0);
    pm1 = p;
    p = pn;
  }
  return p;
}

std::vector<double> legendre_all(int d, int kmax, double t) {
  std::vector<double> out(kmax + 1);
  out[0] = 1.0;
  if (kmax >= 1) out[1] = t;
  for (int n = 1; n < kmax; ++n)
    out[n + 1] = ((2.0 * n + d - 2.0) * t * out[n] - n * out[n - 1]) / (n + d - 2.0);
  return out;
}

std::uint64_t n_dk(int d, int k) {
  if (d < 2 || k < 0) throw std::invalid_argument("n_dk: need d >= 2, k >= 0");
  if (k == 0) return 1;
  // (2k+d-2)/(k+d-2) * C(k+d-2, d-2), built multiplicatively in 128-bit.
  unsigned __int128 binom = 1;
  for (int i = 1; i <= d - 2; ++i) {
    binom = binom * static_cast<unsigned>(k + i);
    binom /= static_cast<unsigned>(i);
    if (binom > (static_cast<unsigned __int128>(1) << 100))
      throw std::overflow_error("n_dk: value exceeds 64-bit range");
  }
  unsigned __int128 val = binom * static_cast<unsigned>(2 * k + d - 2);
  val /= static_cast<unsigned>(k + d - 2);
  if (val > UINT64_MAX) throw std::overflow_error("n_dk: value exceeds 64-bit range");
  return static_cast<std::uint64_t>(val);
}

namespace {

QuadratureRule zonal_rule(int d, int order) {
  double a = (d - 3) / 2.0;
  return make_quadrature(QuadKind::GaussJacobi, order, a, a);
}

std::vector<double> project_with_rule(const std::function<double(double)>& f, int d, int kmax,
                                      const QuadratureRule& rule) {
  std::vector<double> u(kmax + 1, 0.0);
  double z = 0.0;
  for (double w : rule.weights) z += w;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    const double t = rule.nodes[q];
    const double fw = f(t) * rule.weights[q];
    std::vector<double> pk = legendre_all(d, kmax, t);
    for (int k = 0; k <= kmax; ++k) u[k] += fw * pk[k];
  }
  for (auto& v : u) v /= z;
  return u;
}

}  // namespace

double gegenbauer_orthogonality_residual(int d, int j, int k, int quad_order) {
  auto rule = zonal_rule(d, quad_order);
  double z = 0.0, ip = 0.0;
  for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
    z += rule.weights[q];
    ip += rule.weights[q] * legendre_eval(d, j, rule.nodes[q]) *
          legendre_eval(d, k, rule.nodes[q]);
  }
  double target = (j == k) ? z / static_cast<double>(n_dk(d, k)) : 0.0;
  double norm = z / static_cast<double>(n_dk(d, k));
  return std::abs(ip - target) / norm;
}

SpectrumTable project_zonal(const std::function<double(double)>& f, int d, int kmax,
                            int quad_order) {
  if (kmax > 64) throw std::invalid_argument("project_zonal: kmax capped at 64");
  if (d > 25) throw std::invalid_argument("project_zonal: d capped at 25");
  SpectrumTable tab;
  tab.dim = d;
  tab.coeffs = project_with_rule(f, d, kmax, zonal_rule(d, quad_order));
  std::vector<double> check = project_with_rule(f, d, kmax, zonal_rule(d, 2 * quad_order));
  double max_u = 0.0;
  for (double v : tab.coeffs) max_u = std::max(max_u, std::abs(v));
  tab.quad_converged = true;
  for (int k = 0; k <= kmax; ++k)
    if (std::abs(tab.coeffs[k] - check[k]) > 1e-6 * max_u) tab.quad_converged = false;
  tab.n_dk.resize(kmax + 1);
  for (int k = 0; k <= kmax; ++k) tab.n_dk[k] = n_dk(d, k);
  return tab;
}

ActivationSpectra activation_coeffs(double c_hat, int d, int kmax, int quad_order) {
  if (c_hat <= 0.0) throw std::invalid_argument("activation_coeffs: c_hat must be > 0");
  ActivationSpectra sp;
  sp.lambda = project_zonal([c_hat](double t) { return quasi_act(c_hat * t, 1.0); }, d, kmax,
                            quad_order);
  sp.lambda_prime = project_zonal([c_hat](double t) { return quasi_act_grad(c_hat * t, 1.0); }, d,
                                  kmax, quad_order);
  return sp;
}

KernelSpectrum kernel_eigen_bwnn(double c, int d, double var_theta, double beta, int kmax,
                                 int quad_order) {
  KernelSpectrum ks;
  ks.t_c_effective = std::sqrt(var_theta / (1.0 - var_theta));
  ks.table = project_zonal(
      [=](double t) { return analytic_ntk_bwnn(t, c, d, var_theta, beta); }, d, kmax, quad_order);
  return ks;
}

std::vector<double> shift_coeffs_by_t(const std::vector<double>& coeffs, int d) {
  // t P_k = k/(2k+d-2) P_{k-1} + (k+d-2)/(2k+d-2) P_{k+1}
  const int kmax = static_cast<int>(coeffs.size()) - 1;
  std::vector<double> out(kmax + 1, 0.0);
  for (int k = 0; k <= kmax; ++k) {
    double a_k = coeffs[k] * static_cast<double>(n_dk(d, k));
    double denom = 2.0 * k + d - 2.0;
    if (k >= 1) out[k - 1] += a_k * k / denom;
    if (k + 1 <= kmax) out[k + 1] += a_k * (k + d - 2.0) / denom;
  }
  for (int k = 0; k <= kmax; ++k) out[k] /= static_cast<double>(n_dk(d, k));
  return out;
}

double rgauss_kernel(double t, int d, double xi) {
  if (xi <= 0.0) throw std::invalid_argument("rgauss_kernel: xi must be > 0");
  return std::pow(1.0 + 2.0 * (2.0 - 2.0 * t) / (xi * xi), -0.5 * d);
}

double rgauss_kernel_mc(double t, int d, double xi, int n_samples, Rng& rng) {
  if (xi <= 0.0) throw std::invalid_argument("rgauss_kernel_mc: xi must be > 0");
  const double dist_sq = 2.0 - 2.0 * t;
  double s = 0.0;
  for (int i = 0; i < n_samples; ++i) {
    double kappa = sample_chi(rng, d);
    s += std::exp(-kappa * kappa * dist_sq / (xi * xi));
  }
  return s / n_samples;
}

SpectrumTable kernel_eigen_rgauss(int d, double xi, int kmax, int quad_order) {
  return project_zonal([=](double t) { return rgauss_kernel(t, d, xi); }, d, kmax, quad_order);
}

double laplace_kernel(double t, double bandwidth) {
  return std::exp(-bandwidth * std::sqrt(std::max(0.0, 2.0 - 2.0 * t)));
}

double gaussian_kernel(double t, double bandwidth) {
  return std::exp(-bandwidth * bandwidth * (2.0 - 2.0 * t));
}

DecayFit fit_decay(const SpectrumTable& table, int k_min, int k_max, int parity) {
  DecayFit fit;
  fit.k_min = k_min;
  fit.k_max = std::min(k_max, static_cast<int>(table.coeffs.size()) - 1);
  fit.parity = parity;

  std::vector<double> ks, logu;
  for (int k = std::max(1, k_min); k <= fit.k_max; ++k) {
    if (parity != 2 && k % 2 != parity) continue;
    double u = table.coeffs[k];
    if (u <= 1e-250) continue;
    ks.push_back(static_cast<double>(k));
    logu.push_back(std::log(u));
  }
  if (ks.size() < 6) throw std::runtime_error("fit_decay: fewer than 6 usable coefficients");

  auto least_squares = [](const std::vector<double>& x, const std::vector<double>& y, double& a,
                          double& b, double& r2) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      sx += x[i];
      sy += y[i];
      sxx += x[i] * x[i];
      sxy += x[i] * y[i];
      syy += y[i] * y[i];
    }
    a = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    b = (sy - a * sx) / n;
    double ss_res = 0.0, ss_tot = 0.0, ybar = sy / n;
    for (std::size_t i = 0; i < x.size(); ++i) {
      double e = y[i] - (a * x[i] + b);
      ss_res += e * e;
      ss_tot += (y[i] - ybar) * (y[i] - ybar);
    }
    r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
  };

  least_squares(ks, logu, fit.exp_slope, fit.exp_intercept, fit.exp_r2);
  std::vector<double> logk(ks.size());
  for (std::size_t i = 0; i < ks.size(); ++i) logk[i] = std::log(ks[i]);
  double slope;
  least_squares(logk, logu, slope, fit.pow_intercept, fit.pow_r2);
  fit.pow_exponent = -slope;
  return fit;
}

void write_spectrum_csv(const SpectrumTable& table, const std::string& path) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("write_spectrum_csv: cannot open " + tmp);
    os << "k,N_dk,u_k,parity\n";
    os.precision(17);
    for (std::size_t k = 0; k < table.coeffs.size(); ++k)
      os << k << ',' << table.n_dk[k] << ',' << table.coeffs[k] << ','
         << (k % 2 == 0 ? "even" : "odd") << '\n';
  }
  std::rename(tmp.c_str(), path.c_str());
}

}  // namespace bwnn
