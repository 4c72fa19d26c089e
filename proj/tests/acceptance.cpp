// End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
// the exit code is the number of failures. Tolerances are pinned here.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "bwnn/dataset_io.hpp"
#include "bwnn/harness.hpp"
#include "bwnn/spectrum.hpp"

using namespace bwnn;

namespace {

struct Check {
  bool ok = true;
  std::string detail;

  void require(bool cond, const std::string& what) {
    if (!cond && ok) {
      ok = false;
      detail = what;
    }
  }
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

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

// --- 1. quantization law ---
Check criterion_quantization() {
  Check c;
  const int n = 100000;
  for (double theta : {-1.0, -0.5, 0.0, 0.5, 1.0}) {
    Rng rng(101);
    double mean = 0.0;
    for (int i = 0; i < n; ++i) mean += quantize_entry(theta, rng);
    mean /= n;
    double var_hat = 1.0 - mean * mean;  // w^2 = 1 identically
    double true_var = 1.0 - theta * theta;
    double se_mean = std::sqrt(std::max(true_var, 1e-12) / n);
    c.require(std::abs(mean - theta) <= 4.0 * se_mean + 1e-12,
              "mean outside 4-sigma at theta=" + std::to_string(theta));
    // delta method: Var(1 - mean^2) ~ (2 theta se)^2, plus a second-order term
    double se_var = 2.0 * std::abs(theta) * se_mean + se_mean * se_mean;
    c.require(std::abs(var_hat - true_var) <= 4.0 * se_var + 1e-9,
              "variance outside 4-sigma at theta=" + std::to_string(theta));
  }
  return c;
}

// --- 2. activation oracle ---
Check criterion_activation_oracle() {
  Check c;
  // independent oracle: truncated Gauss-Legendre integral of the exact density
  auto gl = make_quadrature(QuadKind::GaussLegendre, 256);
  auto oracle_moments = [&](double nu, double vs) {
    double a = -nu / vs, b = std::max(10.0, a + 20.0);
    double m = 0.0, m2 = 0.0;
    for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
      double z = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[q];
      double w = 0.5 * (b - a) * gl.weights[q] * gauss_pdf(z);
      double val = nu + vs * z;
      m += w * val;
      m2 += w * val * val;
    }
    return std::pair<double, double>{m, m2 - m * m};
  };
  for (double nu : {-3.0, -1.0, -0.2, 0.0, 0.5, 2.0, 4.0}) {
    for (double vs : {0.25, 0.5, 1.0, 2.0}) {
      auto [om, ov] = oracle_moments(nu, vs);
      double scale = std::max(std::abs(om), 1e-6);
      c.require(std::abs(quasi_act(nu, vs) - om) < 1e-3 * scale, "quasi_act mismatch");
      auto [rm, rv] = relu_moments(nu, vs);
      c.require(std::abs(rm - om) < 1e-3 * scale, "relu mean mismatch");
      c.require(std::abs(rv - ov) < 1e-3 * std::max(ov, 1e-6), "relu variance mismatch");
      const double h = 1e-5;
      double fd = (quasi_act(nu + h, vs) - quasi_act(nu - h, vs)) / (2 * h);
      c.require(std::abs(fd - quasi_act_grad(nu, vs)) < 1e-8, "activation derivative mismatch");
    }
  }
  return c;
}

// --- 3. CLT verification ---
Check criterion_clt() {
  Check c;
  VerifyQuasiConfig cfg;  // d1=1600, d2=32, n=1000, 64 probes, thresholds 0.05/0.99
  cfg.seed = 301;
  auto rep = verify_quasi(cfg);
  c.require(rep.ks_pass_rate >= 0.95, "KS pass rate " + std::to_string(rep.ks_pass_rate));
  c.require(rep.pearson_r > 0.99, "pearson r " + std::to_string(rep.pearson_r));
  return c;
}

// --- 4. gradient unbiasedness + gradcheck ---
Check criterion_gradients() {
  Check c;
  const int d = 16, d1 = 256, d2 = 256, n_samples = 20000;
  Rng rng(401);
  ModelParams p = init_params({d, d1, d2}, 1.0, 1.0, ThetaInit::Uniform, 1.0, rng);
  for (auto& b : p.b1) b = rng.uniform(-0.2, 0.2);
  std::vector<double> x = sample_gaussian(rng, d);
  double xn = norm2(x);
  for (auto& v : x) v /= xn;

  MomentState st = propagate_moments(p, x, VarianceMode::Exact);
  QuasiGrad qg = quasi_backward(p, st, 1.0);
  double want_th = 0.0, want_b = 0.0, want_w = 0.0;
  for (double v : qg.d_theta1.data) want_th += v;
  for (double v : qg.d_b1) want_b += v;
  for (double v : qg.d_w2) want_w += v;

  // sampled straight-through gradients; block sums factorize
  const std::vector<double> x1 = project_input(p, x);
  double x1_sum = 0.0;
  for (double v : x1) x1_sum += v;
  const double scale1 = std::sqrt(p.c / d1);
  const double inv_sqrt_d2 = 1.0 / std::sqrt(static_cast<double>(d2));
  const double scale_th = std::sqrt(p.c / (static_cast<double>(d1) * d2));

  double s_th = 0, s2_th = 0, s_b = 0, s2_b = 0, s_w = 0, s2_w = 0;
  std::vector<double> y1(d2);
  Rng base(402);
  for (int s = 0; s < n_samples; ++s) {
    Rng srng = base.substream(static_cast<std::uint64_t>(s));
    for (int j = 0; j < d2; ++j) y1[j] = p.beta * p.b1[j];
    for (int i = 0; i < d1; ++i) {
      const double xi = x1[i] * scale1;
      const double* row = &p.theta1.theta.data[static_cast<std::size_t>(i) * d2];
      for (int j = 0; j < d2; ++j)
        y1[j] += (srng.next_double() < 0.5 * (row[j] + 1.0) ? xi : -xi);
    }
    double gw = 0.0, gb = 0.0, gact = 0.0;
    for (int j = 0; j < d2; ++j) {
      if (y1[j] > 0.0) {
        gw += y1[j];
        gb += p.w2[j];
        gact += p.w2[j];
      }
    }
    double v_w = inv_sqrt_d2 * gw;
    double v_b = inv_sqrt_d2 * p.beta * gb;
    double v_th = scale_th * x1_sum * gact;
    s_w += v_w;
    s2_w += v_w * v_w;
    s_b += v_b;
    s2_b += v_b * v_b;
    s_th += v_th;
    s2_th += v_th * v_th;
  }
  auto within_ci = [&](double sum, double sum2, double want, const char* name) {
    double m = sum / n_samples;
    double var = sum2 / n_samples - m * m;
    double se = std::sqrt(var / n_samples);
    c.require(std::abs(m - want) <= 4.0 * se,
              std::string(name) + " block mean off by " + std::to_string((m - want) / se) +
                  " sigma");
  };
  within_ci(s_w, s2_w, want_w, "w2");
  within_ci(s_b, s2_b, want_b, "b1");
  within_ci(s_th, s2_th, want_th, "theta1");

  // finite-difference check of the quasi gradients (smoothing scale frozen)
  auto ybar_frozen = [&](const ModelParams& q) {
    std::vector<double> nu(d2, 0.0);
    for (int i = 0; i < d1; ++i)
      for (int j = 0; j < d2; ++j) nu[j] += q.theta1.theta(i, j) * x1[i] * scale1;
    double acc = 0.0;
    for (int j = 0; j < d2; ++j) {
      nu[j] += q.beta * q.b1[j];
      acc += q.w2[j] * quasi_act(nu[j], std::sqrt(st.varsigma1_sq[j]));
    }
    return acc * inv_sqrt_d2;
  };
  const double h = 1e-6;
  double worst = 0.0;
  Rng pick(403);
  for (int rep = 0; rep < 64; ++rep) {
    int i = static_cast<int>(pick.next_index(d1));
    int j = static_cast<int>(pick.next_index(d2));
    ModelParams q = p;
    q.theta1.theta(i, j) += h;
    double fp = ybar_frozen(q);
    q.theta1.theta(i, j) -= 2 * h;
    double fm = ybar_frozen(q);
    double fd = (fp - fm) / (2 * h);
    double an = qg.d_theta1(i, j);
    worst = std::max(worst, std::abs(fd - an) / std::max({std::abs(fd), std::abs(an), 1e-4}));
  }
  for (int j = 0; j < d2; j += 16) {
    ModelParams q = p;
    q.b1[j] += h;
    double fp = ybar_frozen(q);
    q.b1[j] -= 2 * h;
    double fd = (fp - ybar_frozen(q)) / (2 * h);
    worst = std::max(worst,
                     std::abs(fd - qg.d_b1[j]) / std::max({std::abs(fd), std::abs(qg.d_b1[j]), 1e-4}));
    q = p;
    q.w2[j] += h;
    fp = ybar_frozen(q);
    q.w2[j] -= 2 * h;
    fd = (fp - ybar_frozen(q)) / (2 * h);
    worst = std::max(worst,
                     std::abs(fd - qg.d_w2[j]) / std::max({std::abs(fd), std::abs(qg.d_w2[j]), 1e-4}));
  }
  c.require(worst < 1e-5, "gradcheck max relative error " + std::to_string(worst));
  return c;
}

// --- 5. limit variance ---
Check criterion_limit_variance() {
  Check c;
  const int d = 16, d1 = 10000, d2 = 32;
  Rng rng(501);
  ModelParams p = init_params({d, d1, d2}, 1.0, 1.0, ThetaInit::Uniform, 1.0, rng);
  std::vector<double> x = sample_gaussian(rng, d);
  double xn = norm2(x);
  for (auto& v : x) v /= xn;
  MomentState st = propagate_moments(p, x, VarianceMode::Exact);
  const double limit = (p.c / d) * (1.0 - 1.0 / 3.0);
  double worst = 0.0;
  for (double v : st.varsigma1_sq) worst = std::max(worst, std::abs(v - limit) / limit);
  c.require(worst < 0.05, "max relative deviation " + std::to_string(worst));
  return c;
}

// --- 6. NTK convergence ---
Check criterion_ntk_convergence() {
  Check c;
  const int d = 16;
  auto probes = unit_probes(16, d, 601);
  auto rel_err = [&](int width, std::uint64_t seed) {
    Rng rng(seed);
    ModelParams p = init_params({d, width, width}, 1.0, 1.0, ThetaInit::Uniform, 1.0, rng);
    KernelMatrix emp = empirical_ntk(p, probes);
    KernelMatrix ana = analytic_gram(probes, 1.0, d, empirical_var_theta(p), 1.0);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < emp.gram.data.size(); ++i) {
      double e = emp.gram.data[i] - ana.gram.data[i];
      num += e * e;
      den += ana.gram.data[i] * ana.gram.data[i];
    }
    return std::sqrt(num / den);
  };
  std::vector<double> med;
  for (int width : {256, 1024, 4096}) {
    std::vector<double> errs;
    for (std::uint64_t seed = 610; seed < 615; ++seed) errs.push_back(rel_err(width, seed));
    med.push_back(median(errs));
  }
  c.require(med[2] < 0.05, "error at width 4096 = " + std::to_string(med[2]));
  c.require(med[0] > med[1] && med[1] > med[2],
            "error not decreasing: " + std::to_string(med[0]) + ", " + std::to_string(med[1]) +
                ", " + std::to_string(med[2]));
  return c;
}

// --- 7. kernel drift rate ---
Check criterion_kernel_drift() {
  Check c;
  const int d = 8, d1 = 512;
  auto probes = unit_probes(16, d, 701);
  auto drift_at = [&](int d2, std::uint64_t seed) {
    Dataset ds = make_synthetic(SyntheticKind::RandomFourierTarget, 64, d, 0.1, seed, 1.0, 2.0);
    Rng rng(seed);
    ModelParams p0 = init_params({d, d1, d2}, 1.0, 1.0, ThetaInit::ScaledUniform, 0.5, rng);
    // deep in the lazy regime the kernel moves at the faster 1/width rate
    // (its change is second order in the parameter displacement), so the
    // budget is chosen to take the narrowest net to the edge of that regime,
    // where the ratio across widths reflects the 1/sqrt(width) parameter rate
    TrainConfig tc;
    tc.mode = TrainMode::Quasi;
    tc.lr = 1.0;
    tc.epochs = 600;
    tc.record_drift_every = 0;
    Rng trng(seed + 1);
    TrainResult res = train(p0, ds, tc, trng);
    return measure_kernel_drift(p0, res.params, probes);
  };
  std::vector<double> med;
  for (int d2 : {64, 128, 256}) {
    std::vector<double> vals;
    for (std::uint64_t seed = 710; seed < 715; ++seed) vals.push_back(drift_at(d2, seed));
    med.push_back(median(vals));
  }
  double ratio = med[2] / med[0];  // width quadrupled; 1/sqrt rate predicts 0.5
  c.require(ratio >= 0.3 && ratio <= 0.8, "drift ratio " + std::to_string(ratio));
  c.require(med[0] > med[1] && med[1] > med[2],
            "drift not decreasing: " + std::to_string(med[0]) + ", " + std::to_string(med[1]) +
                ", " + std::to_string(med[2]));
  return c;
}

// --- 8. spectral parity ---
Check criterion_spectral_parity() {
  Check c;
  auto sp = activation_coeffs(1.0, 5, 21);
  double max_l = 0.0, max_lp = 0.0;
  for (double v : sp.lambda.coeffs) max_l = std::max(max_l, std::abs(v));
  for (double v : sp.lambda_prime.coeffs) max_lp = std::max(max_lp, std::abs(v));
  // forbidden classes (the linear part of the activation carries k=1, the
  // constant part of its derivative carries k=0; those are excluded)
  for (int k = 3; k <= 21; k += 2)
    c.require(std::abs(sp.lambda.coeffs[k]) < 1e-9 * max_l,
              "activation odd coefficient at k=" + std::to_string(k));
  for (int k = 2; k <= 21; k += 2)
    c.require(std::abs(sp.lambda_prime.coeffs[k]) < 1e-9 * max_lp,
              "derivative even coefficient at k=" + std::to_string(k));
  // supported classes carry genuine mass: coefficients alternate in sign for
  // higher degrees (like |t|'s expansion) but stay far above the numerical
  // floor of the forbidden classes
  c.require(sp.lambda.coeffs[0] > 0.0 && sp.lambda.coeffs[2] > 0.0,
            "leading activation coefficients not positive");
  c.require(sp.lambda_prime.coeffs[1] > 0.0, "derivative k=1 coefficient not positive");
  for (int k = 4; k <= 12; k += 2)
    c.require(std::abs(sp.lambda.coeffs[k]) > 1e-12 * max_l,
              "activation even coefficient k=" + std::to_string(k) + " at noise floor");
  for (int k = 3; k <= 13; k += 2)
    c.require(std::abs(sp.lambda_prime.coeffs[k]) > 1e-12 * max_lp,
              "derivative odd coefficient k=" + std::to_string(k) + " at noise floor");
  // positivity holds for the kernel (a positive-definite zonal function):
  // every resolvable coefficient is strictly positive
  auto ks = kernel_eigen_bwnn(1.0, 5, 0.75, 1.0, 20, 512);
  for (int k = 0; k <= 20; ++k)
    c.require(ks.table.coeffs[k] > 0.0,
              "kernel coefficient k=" + std::to_string(k) + " not positive");
  return c;
}

// --- 9. decay-law contrast ---
Check criterion_decay_laws() {
  Check c;
  const int d = 3, kmax = 32;
  auto bw = kernel_eigen_bwnn(1.0, d, 1.0 / 3.0, 1.0, kmax, 512);
  // coefficients fall below the double-precision quadrature floor (~1e-16)
  // past k = 16, so the fit window stops there
  auto fit_bw = fit_decay(bw.table, 6, 16, 0);
  c.require(fit_bw.exp_r2 > fit_bw.pow_r2,
            "bwnn kernel not exponential: exp r2 " + std::to_string(fit_bw.exp_r2) + " pow r2 " +
                std::to_string(fit_bw.pow_r2));

  auto relu = project_zonal([&](double t) { return analytic_ntk_relu(t, 1.0, d, 1.0); }, d, kmax,
                            512);
  auto fit_relu = fit_decay(relu, 6, 30, 0);
  c.require(fit_relu.pow_r2 > fit_relu.exp_r2, "relu kernel not power-law");
  c.require(fit_relu.pow_exponent > d - 1 && fit_relu.pow_exponent < d + 1,
            "relu exponent " + std::to_string(fit_relu.pow_exponent));

  auto rg = kernel_eigen_rgauss(d, 1.0, kmax, 512);
  auto fit_rg = fit_decay(rg, 6, 30, 0);
  c.require(fit_rg.exp_r2 > 0.99, "rgauss exp r2 " + std::to_string(fit_rg.exp_r2));

  // the per-degree geometric base -> t_c^2 / (2 (1 + t_c^2)) = 1/6 at
  // Var = 1/3; the same-parity two-step ratio converges to its square, so
  // take the square root of u_{k+2}/u_k at the largest resolvable degrees
  double ratio = 0.0;
  int n_ratio = 0;
  for (int k = 12; k <= 14; k += 2) {
    ratio += std::sqrt(bw.table.coeffs[k + 2] / bw.table.coeffs[k]);
    ++n_ratio;
  }
  ratio /= n_ratio;
  c.require(std::abs(ratio - 1.0 / 6.0) < 0.3 / 6.0, "tail ratio " + std::to_string(ratio));
  return c;
}

// --- 10. randomized-scale gaussian closed form ---
Check criterion_rgauss() {
  Check c;
  const int d = 6;
  const double xi = 2.0;
  Rng rng(1001);
  const int n = 1000000;
  for (double t : {-1.0, -0.5, 0.0, 0.5, 0.9}) {
    const double dist_sq = 2.0 - 2.0 * t;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      double kappa = sample_chi(rng, d);
      double v = std::exp(-kappa * kappa * dist_sq / (xi * xi));
      s += v;
      s2 += v * v;
    }
    double m = s / n;
    double se = std::sqrt((s2 / n - m * m) / n);
    double want = rgauss_kernel(t, d, xi);
    c.require(std::abs(m - want) <= 4.0 * se + 1e-12,
              "mc mismatch at t=" + std::to_string(t));
  }
  return c;
}

// --- 11. generalization direction ---
Check criterion_generalization() {
  Check c;
  // smooth regression targets with label noise: the continuous R^2 metric
  // resolves the gap ordering that coarse 0/1 accuracy washes out
  std::vector<Dataset> data;
  data.push_back(make_synthetic(SyntheticKind::RandomFourierTarget, 60, 8, 0.3, 1103, 0.5, 3.0));
  data.push_back(make_synthetic(SyntheticKind::RandomFourierTarget, 60, 8, 0.4, 1105, 0.5, 3.0));
  data.push_back(make_synthetic(SyntheticKind::RandomFourierTarget, 60, 8, 0.3, 1106, 0.5, 2.5));
  data.push_back(make_synthetic(SyntheticKind::RandomFourierTarget, 60, 8, 0.5, 1107, 0.5, 3.0));
  std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
  std::vector<ModelKind> models = {ModelKind::RealNN, ModelKind::BWNN, ModelKind::KernelLaplace,
                                   ModelKind::KernelGaussian};
  auto rep = generalization_suite(models, data, seeds);  // 20 (dataset, seed) pairs

  for (const auto& pair : rep.pairs) {
    // one-sided: first model's gap exceeds the second's
    double p_one = pair.gap_test.t > 0.0 ? 0.5 * pair.gap_test.p : 1.0 - 0.5 * pair.gap_test.p;
    c.require(pair.mean_gap_first > pair.mean_gap_second,
              pair.first + " mean gap not larger than " + pair.second);
    c.require(p_one < 0.1, pair.first + " vs " + pair.second + " one-sided p " +
                               std::to_string(p_one));
  }
  c.require(rep.pairs.size() == 2, "expected two paired comparisons");
  return c;
}

// --- 12. reproducibility ---
Check criterion_reproducibility() {
  Check c;
  VerifyQuasiConfig vq;
  vq.d = 8;
  vq.d1 = 400;
  vq.d2 = 8;
  vq.n_samples = 500;
  vq.n_probes = 8;
  vq.seed = 1201;
  auto a = verify_quasi(vq);
  auto b = verify_quasi(vq);
  c.require(a.ks_pass_rate == b.ks_pass_rate && a.ks_median == b.ks_median &&
                a.pearson_r == b.pearson_r,
            "verification report not bit-identical on replay");

  Dataset ds = make_synthetic(SyntheticKind::RandomFourierTarget, 40, 6, 0.2, 1202);
  Rng ir(1203);
  ModelParams p0 = init_params({6, 64, 64}, 1.0, 1.0, ThetaInit::Uniform, 1.0, ir);
  TrainConfig tc;
  tc.mode = TrainMode::BinaryConnect;
  tc.lr = 0.05;
  tc.epochs = 10;
  tc.batch_size = 8;
  Rng t1(1204), t2(1204);
  auto r1 = train(p0, ds, tc, t1);
  auto r2 = train(p0, ds, tc, t2);
  c.require(r1.params.theta1.theta.data == r2.params.theta1.theta.data &&
                r1.params.w2 == r2.params.w2 && r1.loss_curve == r2.loss_curve,
            "training not bit-identical on replay");

  auto probes = unit_probes(8, 6, 1205);
  auto k1 = empirical_ntk(r1.params, probes);
  auto k2 = empirical_ntk(r2.params, probes);
  c.require(k1.gram.data == k2.gram.data, "kernel not bit-identical on replay");

  // checkpoint round trip preserves every bit
  save_checkpoint(r1.params, "acceptance_ckpt.txt");
  ModelParams re = load_checkpoint("acceptance_ckpt.txt");
  std::remove("acceptance_ckpt.txt");
  c.require(re.theta1.theta.data == r1.params.theta1.theta.data &&
                re.w0.data == r1.params.w0.data && re.w2 == r1.params.w2,
            "checkpoint round trip not bit-exact");
  return c;
}

}  // namespace

int main() {
  struct Entry {
    const char* name;
    std::function<Check()> fn;
  };
  const std::vector<Entry> entries = {
      {"quantization law (4-sigma moments)", criterion_quantization},
      {"activation oracle (integral + finite difference)", criterion_activation_oracle},
      {"pre-activation CLT (KS + mean correlation)", criterion_clt},
      {"gradient unbiasedness + gradcheck", criterion_gradients},
      {"limit variance at width 10^4", criterion_limit_variance},
      {"NTK convergence across widths", criterion_ntk_convergence},
      {"kernel drift rate in width", criterion_kernel_drift},
      {"spectral parity of activation coefficients", criterion_spectral_parity},
      {"decay-law contrast (exp vs power law)", criterion_decay_laws},
      {"randomized-scale gaussian closed form", criterion_rgauss},
      {"generalization gap direction", criterion_generalization},
      {"bit-exact replay", criterion_reproducibility},
  };

  int failures = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    auto start = std::chrono::steady_clock::now();
    Check c;
    try {
      c = entries[i].fn();
    } catch (const std::exception& e) {
      c.ok = false;
      c.detail = std::string("exception: ") + e.what();
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%2zu/12] %-50s %s (%.1fs)%s%s\n", i + 1, entries[i].name,
                c.ok ? "PASS" : "FAIL", secs, c.ok ? "" : " -- ", c.ok ? "" : c.detail.c_str());
    std::fflush(stdout);
    if (!c.ok) ++failures;
  }
  return failures;
}
