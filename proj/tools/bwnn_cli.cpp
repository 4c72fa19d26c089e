// Command-line driver for the bwnn library: quasi-approximation verification,
// gradient checking, training, kernel computation, spectral analysis, kernel
// drift sweeps, and model comparisons.
//
// Configuration comes from an optional JSON file (--config) overridden by
// command-line flags; the effective configuration, seed, code version, and RNG
// version are embedded in every report so runs replay bit-exactly.
//
// Exit codes: 0 pass, 1 threshold failure, 2 usage/config error, 3 data error.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "bwnn/dataset_io.hpp"
#include "bwnn/harness.hpp"
#include "bwnn/ntk.hpp"
#include "bwnn/quasi.hpp"
#include "bwnn/spectrum.hpp"
#include "bwnn/trainer.hpp"

using json = nlohmann::ordered_json;
using namespace bwnn;

namespace {

constexpr const char* kCodeVersion = "1.0.0";

constexpr int kExitPass = 0;
constexpr int kExitThreshold = 1;
constexpr int kExitUsage = 2;
constexpr int kExitData = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Binds each option to a JSON key of the same name. Flags given on the command
// line win; remaining keys come from the config file; anything else keeps its
// default. Unknown config keys are rejected by name.
class OptionSet {
 public:
  explicit OptionSet(CLI::App* cmd) : cmd_(cmd) {
    cmd->add_option("--config", config_path_, "JSON config file (flags override it)");
  }

  template <typename T>
  void add(const std::string& name, T& var, const std::string& desc) {
    CLI::Option* opt = cmd_->add_option("--" + name, var, desc);
    appliers_.push_back([&var, name, opt](const json& j) {
      if (!j.contains(name) || opt->count() > 0) return;
      try {
        var = j.at(name).get<T>();
      } catch (const json::exception&) {
        throw UsageError("config key \"" + name + "\": type mismatch");
      }
    });
    emitters_.push_back([&var, name](json& out) { out[name] = var; });
    names_.push_back(name);
  }

  // Call after CLI11 parsing: applies the config file, then validates keys.
  void merge() {
    if (config_path_.empty()) return;
    std::ifstream is(config_path_);
    if (!is) throw UsageError("cannot open config file " + config_path_);
    json j;
    try {
      j = json::parse(is);
    } catch (const json::exception& e) {
      throw UsageError(std::string("config file is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw UsageError("config file must hold a JSON object");
    for (const auto& [key, _] : j.items())
      if (std::find(names_.begin(), names_.end(), key) == names_.end())
        throw UsageError("unknown config key \"" + key + "\"");
    for (const auto& apply : appliers_) apply(j);
  }

  json effective() const {
    json out = json::object();
    for (const auto& emit : emitters_) emit(out);
    return out;
  }

 private:
  CLI::App* cmd_;
  std::string config_path_;
  std::vector<std::function<void(const json&)>> appliers_;
  std::vector<std::function<void(json&)>> emitters_;
  std::vector<std::string> names_;
};

void require(bool ok, const std::string& key, const std::string& what) {
  if (!ok) throw UsageError("config value \"" + key + "\" " + what);
}

json report_shell(const std::string& command, const OptionSet& opts, std::uint64_t seed) {
  json rep;
  rep["command"] = command;
  rep["code_version"] = kCodeVersion;
  rep["rng_version"] = kRngVersion;
  rep["seed"] = seed;
  rep["config"] = opts.effective();
  return rep;
}

// Atomic write (temp then rename) so partial reports never land on disk.
void emit_report(const json& rep, const std::string& out_path) {
  std::string text = rep.dump(2) + "\n";
  std::cout << text;
  if (out_path.empty()) return;
  std::string tmp = out_path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw DataError("cannot open output file " + tmp);
    os << text;
  }
  std::rename(tmp.c_str(), out_path.c_str());
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

ThetaInit parse_theta_init(const std::string& s) {
  if (s == "uniform") return ThetaInit::Uniform;
  if (s == "scaled-uniform") return ThetaInit::ScaledUniform;
  throw UsageError("config value \"theta-init\" must be uniform or scaled-uniform");
}

TrainMode parse_train_mode(const std::string& s) {
  if (s == "binaryconnect") return TrainMode::BinaryConnect;
  if (s == "quasi") return TrainMode::Quasi;
  if (s == "real") return TrainMode::Real;
  throw UsageError("config value \"mode\" must be binaryconnect, quasi, or real");
}

// --- verify-quasi ---------------------------------------------------------

struct VerifyQuasiCmd {
  VerifyQuasiConfig cfg;
  std::string out;

  void bind(OptionSet& o) {
    o.add("d", cfg.d, "input dimension");
    o.add("width", cfg.d1, "projection layer width d1");
    o.add("d2", cfg.d2, "hidden width d2");
    o.add("samples", cfg.n_samples, "binary-weight draws per probe");
    o.add("probes", cfg.n_probes, "number of unit-norm probe inputs");
    o.add("c", cfg.c, "layer-1 scale constant");
    o.add("beta", cfg.beta, "bias scale");
    o.add("seed", cfg.seed, "RNG seed");
    o.add("ks-threshold", cfg.ks_threshold, "per-neuron KS pass threshold");
    o.add("r-threshold", cfg.r_threshold, "Pearson-r pass threshold");
    o.add("out", out, "report JSON path");
  }

  int run(const OptionSet& opts) {
    require(cfg.d >= 1, "d", "must be >= 1");
    require(cfg.n_samples >= 10, "samples", "must be >= 10");
    auto rep = verify_quasi(cfg);
    json r = report_shell("verify-quasi", opts, cfg.seed);
    r["results"] = {{"n_neurons_tested", rep.n_neurons_tested},
                    {"ks_pass_rate", rep.ks_pass_rate},
                    {"ks_median", rep.ks_median},
                    {"pearson_r", rep.pearson_r},
                    {"pass", rep.pass}};
    emit_report(r, out);
    return rep.pass ? kExitPass : kExitThreshold;
  }
};

// --- gradcheck ------------------------------------------------------------

// ybar with the per-neuron smoothing scales frozen at the base point; the
// finite-difference oracle must not let the population variance move when a
// single coordinate is perturbed.
double ybar_frozen(const ModelParams& p, const std::vector<double>& x,
                   const std::vector<double>& vs2) {
  std::vector<double> x1 = project_input(p, x);
  const int d1 = p.dims.d1, d2 = p.dims.d2;
  const double scale1 = std::sqrt(p.c / d1);
  double y = 0.0;
  for (int j = 0; j < d2; ++j) {
    double nu = p.beta * p.b1[j];
    for (int i = 0; i < d1; ++i) nu += scale1 * p.theta1.theta(i, j) * x1[i];
    y += p.w2[j] * quasi_act(nu, std::sqrt(vs2[j]));
  }
  return y / std::sqrt(static_cast<double>(d2));
}

struct GradcheckCmd {
  int d = 3, d1 = 5, d2 = 4;
  std::uint64_t seed = 1;
  double eps = 1e-6;
  double tol = 1e-5;
  std::string variance_mode = "exact";
  std::string out;

  void bind(OptionSet& o) {
    o.add("d", d, "input dimension");
    o.add("d1", d1, "projection layer width");
    o.add("d2", d2, "hidden width");
    o.add("seed", seed, "RNG seed");
    o.add("eps", eps, "finite-difference step");
    o.add("tol", tol, "max relative error threshold");
    o.add("variance-mode", variance_mode, "exact or limit");
    o.add("out", out, "report JSON path");
  }

  int run(const OptionSet& opts) {
    require(d >= 1 && d1 >= 1 && d2 >= 1, "d", "dims must be >= 1");
    require(eps > 0.0, "eps", "must be > 0");
    VarianceMode mode;
    if (variance_mode == "exact")
      mode = VarianceMode::Exact;
    else if (variance_mode == "limit")
      mode = VarianceMode::Limit;
    else
      throw UsageError("config value \"variance-mode\" must be exact or limit");

    Rng rng(seed);
    ModelParams p = init_params({d, d1, d2}, 1.0, 1.0, ThetaInit::ScaledUniform, 0.5, rng);
    std::vector<double> x = sample_gaussian(rng, d);
    double nx = norm2(x);
    for (auto& v : x) v /= nx;

    const double loss_grad = 1.7;
    MomentState st = propagate_moments(p, x, mode);
    QuasiGrad g = quasi_backward(p, st, loss_grad);
    std::vector<double> vs2 = st.varsigma1_sq;

    double worst = 0.0;
    auto check = [&](double analytic, double* param) {
      double keep = *param;
      *param = keep + eps;
      double yp = ybar_frozen(p, x, vs2);
      *param = keep - eps;
      double ym = ybar_frozen(p, x, vs2);
      *param = keep;
      double fd = loss_grad * (yp - ym) / (2.0 * eps);
      double denom = std::max({std::abs(fd), std::abs(analytic), 1e-4});
      worst = std::max(worst, std::abs(fd - analytic) / denom);
    };
    for (int i = 0; i < d1; ++i)
      for (int j = 0; j < d2; ++j) check(g.d_theta1(i, j), &p.theta1.theta(i, j));
    for (int j = 0; j < d2; ++j) check(g.d_b1[j], &p.b1[j]);
    for (int j = 0; j < d2; ++j) check(g.d_w2[j], &p.w2[j]);

    bool pass = worst < tol;
    json r = report_shell("gradcheck", opts, seed);
    r["results"] = {{"n_coordinates", d1 * d2 + 2 * d2},
                    {"max_rel_error", worst},
                    {"tolerance", tol},
                    {"pass", pass}};
    emit_report(r, out);
    return pass ? kExitPass : kExitThreshold;
  }
};

// --- shared dataset loading -----------------------------------------------

struct DataOpts {
  std::string csv, label = "label";
  std::string idx_images, idx_labels;
  int subsample = 0;
  std::string synthetic;  // two-gaussians | random-fourier
  int n = 200, d = 8;
  double noise = 0.1, frequency = 1.0, train_fraction = 0.5;

  void bind(OptionSet& o) {
    o.add("data", csv, "CSV dataset path");
    o.add("label", label, "CSV label column name");
    o.add("idx-images", idx_images, "IDX image file path");
    o.add("idx-labels", idx_labels, "IDX label file path");
    o.add("subsample", subsample, "IDX subsample size (0 = all)");
    o.add("synthetic", synthetic, "synthetic kind: two-gaussians or random-fourier");
    o.add("n", n, "synthetic sample count");
    o.add("d", d, "synthetic input dimension");
    o.add("noise", noise, "synthetic noise level");
    o.add("frequency", frequency, "random-fourier frequency scale");
    o.add("train-fraction", train_fraction, "synthetic train split fraction");
  }

  Dataset load(std::uint64_t seed) const {
    try {
      if (!csv.empty()) return load_csv(csv, label);
      if (!idx_images.empty() || !idx_labels.empty()) {
        if (idx_images.empty() || idx_labels.empty())
          throw UsageError("idx-images and idx-labels must both be set");
        return load_idx(idx_images, idx_labels, subsample, seed);
      }
      if (!synthetic.empty()) {
        SyntheticKind kind;
        if (synthetic == "two-gaussians")
          kind = SyntheticKind::TwoGaussiansOnSphere;
        else if (synthetic == "random-fourier")
          kind = SyntheticKind::RandomFourierTarget;
        else
          throw UsageError(
              "config value \"synthetic\" must be two-gaussians or random-fourier");
        return make_synthetic(kind, n, d, noise, seed, train_fraction, frequency);
      }
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      throw DataError(e.what());
    }
    throw UsageError("no dataset given: set --data, --idx-images/--idx-labels, or --synthetic");
  }
};

// --- train ----------------------------------------------------------------

struct TrainCmd {
  DataOpts data;
  int d1 = 512, d2 = 512;
  double c = 1.0, beta = 1.0, s = 1.0;
  std::string theta_init = "uniform";
  std::string mode = "binaryconnect";
  TrainConfig tc;
  std::uint64_t seed = 0;
  std::string checkpoint_out, drift_out, out;

  void bind(OptionSet& o) {
    data.bind(o);
    o.add("d1", d1, "projection layer width");
    o.add("d2", d2, "hidden width");
    o.add("c", c, "layer-1 scale constant");
    o.add("beta", beta, "bias scale");
    o.add("theta-init", theta_init, "uniform or scaled-uniform");
    o.add("init-scale", s, "scaled-uniform half-width");
    o.add("mode", mode, "binaryconnect, quasi, or real");
    o.add("lr", tc.lr, "learning rate");
    o.add("epochs", tc.epochs, "training epochs");
    o.add("batch-size", tc.batch_size, "minibatch size (0 = full batch)");
    o.add("weight-decay", tc.weight_decay, "weight decay");
    o.add("record-drift-every", tc.record_drift_every, "drift log stride (0 = off)");
    o.add("seed", seed, "RNG seed");
    o.add("checkpoint-out", checkpoint_out, "trained checkpoint path");
    o.add("drift-out", drift_out, "drift log CSV path");
    o.add("out", out, "report JSON path");
  }

  int run(const OptionSet& opts) {
    require(tc.lr > 0.0, "lr", "must be > 0");
    require(tc.epochs >= 1, "epochs", "must be >= 1");
    require(tc.batch_size >= 0, "batch-size", "must be >= 0");
    require(tc.weight_decay >= 0.0, "weight-decay", "must be >= 0");
    require(d1 >= 1 && d2 >= 1, "d1", "widths must be >= 1");
    tc.mode = parse_train_mode(mode);
    ThetaInit init = parse_theta_init(theta_init);

    Dataset ds = data.load(seed);
    Rng irng(seed);
    ModelParams p0 =
        init_params({static_cast<int>(ds.inputs.cols), d1, d2}, c, beta, init, s, irng);
    Rng trng(seed + 1);
    TrainResult res;
    try {
      res = train(p0, ds, tc, trng);
    } catch (const std::exception& e) {
      std::cerr << "training diverged: " << e.what() << "\n";
      return kExitThreshold;
    }
    if (!checkpoint_out.empty()) save_checkpoint(res.params, checkpoint_out);
    if (!drift_out.empty()) write_drift_csv(res.drift, drift_out);

    json r = report_shell("train", opts, seed);
    r["results"] = {{"n_train", ds.train_idx.size()},
                    {"n_steps", res.loss_curve.size()},
                    {"initial_loss", res.loss_curve.empty() ? 0.0 : res.loss_curve.front()},
                    {"final_loss", res.loss_curve.empty() ? 0.0 : res.loss_curve.back()},
                    {"clip_fraction", clip_check(res.params)}};
    emit_report(r, out);
    return kExitPass;
  }
};

// --- ntk ------------------------------------------------------------------

struct NtkCmd {
  std::string kind = "empirical";  // empirical | analytic
  int d = 8, d1 = 1024, d2 = 1024, probes = 16, quad_order = 64;
  double c = 1.0, beta = 1.0, var_theta = 1.0 / 3.0, s = 1.0;
  std::string theta_init = "uniform";
  std::string checkpoint;
  std::uint64_t seed = 0;
  std::string gram_out = "gram.csv", out;

  void bind(OptionSet& o) {
    o.add("kind", kind, "empirical or analytic");
    o.add("d", d, "input dimension");
    o.add("d1", d1, "projection layer width");
    o.add("d2", d2, "hidden width");
    o.add("probes", probes, "number of unit-norm probes");
    o.add("quad-order", quad_order, "quadrature order for the analytic kernel");
    o.add("c", c, "layer-1 scale constant");
    o.add("beta", beta, "bias scale");
    o.add("var-theta", var_theta, "buffer variance for the analytic kernel");
    o.add("theta-init", theta_init, "uniform or scaled-uniform");
    o.add("init-scale", s, "scaled-uniform half-width");
    o.add("checkpoint", checkpoint, "use parameters from this checkpoint");
    o.add("seed", seed, "RNG seed");
    o.add("gram-out", gram_out, "Gram matrix CSV path");
    o.add("out", out, "report JSON path");
  }

  int run(const OptionSet& opts) {
    require(probes >= 2, "probes", "must be >= 2");
    require(var_theta >= 0.0 && var_theta <= 1.0, "var-theta", "must lie in [0, 1]");
    KernelMatrix k;
    if (kind == "empirical") {
      ModelParams p;
      if (!checkpoint.empty()) {
        try {
          p = load_checkpoint(checkpoint);
        } catch (const std::exception& e) {
          throw DataError(e.what());
        }
        d = p.dims.d;
      } else {
        Rng rng(seed);
        p = init_params({d, d1, d2}, c, beta, parse_theta_init(theta_init), s, rng);
      }
      k = empirical_ntk(p, unit_probes(probes, d, seed + 1));
    } else if (kind == "analytic") {
      k = analytic_gram(unit_probes(probes, d, seed + 1), c, d, var_theta, beta, quad_order);
    } else {
      throw UsageError("config value \"kind\" must be empirical or analytic");
    }
    bool valid = k.validate();
    write_kernel_csv(k, gram_out);

    json r = report_shell("ntk", opts, seed);
    r["results"] = {{"provenance", k.provenance},
                    {"n_probes", probes},
                    {"gram_csv", gram_out},
                    {"valid", valid}};
    emit_report(r, out);
    return valid ? kExitPass : kExitThreshold;
  }
};

// --- spectrum -------------------------------------------------------------

struct SpectrumCmd {
  std::string kernel = "bwnn";  // bwnn | relu | rgauss | laplace | gaussian
  int d = 3, kmax = 32, quad_order = 512;
  double c = 1.0, beta = 1.0, var_theta = 1.0 / 3.0, xi = 2.0, bandwidth = 1.0;
  int fit_kmin = 6, fit_kmax = 16, fit_parity = 2;
  std::string expect;  // "", "exp", or "pow"
  std::string spectrum_out = "spectrum.csv", out;

  void bind(OptionSet& o) {
    o.add("kernel", kernel, "bwnn, relu, rgauss, laplace, or gaussian");
    o.add("dim", d, "sphere ambient dimension");
    o.add("kmax", kmax, "highest degree");
    o.add("quad-order", quad_order, "projection quadrature order");
    o.add("c", c, "layer-1 scale constant");
    o.add("beta", beta, "bias scale");
    o.add("var-theta", var_theta, "buffer variance for the bwnn kernel");
    o.add("xi", xi, "randomized-scale gaussian length scale");
    o.add("bandwidth", bandwidth, "laplace/gaussian kernel bandwidth");
    o.add("fit-kmin", fit_kmin, "decay fit window start");
    o.add("fit-kmax", fit_kmax, "decay fit window end");
    o.add("fit-parity", fit_parity, "fit parity filter: 0 even, 1 odd, 2 both");
    o.add("expect", expect, "declare decay law to check: exp or pow");
    o.add("spectrum-out", spectrum_out, "coefficient table CSV path");
    o.add("out", out, "report JSON path");
  }

  int run(const OptionSet& opts) {
    require(kmax >= 1 && kmax <= 64, "kmax", "must lie in [1, 64]");
    require(var_theta >= 0.0 && var_theta <= 1.0, "var-theta", "must lie in [0, 1]");
    require(fit_parity >= 0 && fit_parity <= 2, "fit-parity", "must be 0, 1, or 2");
    SpectrumTable tab;
    json extra = json::object();
    if (kernel == "bwnn") {
      auto ks = kernel_eigen_bwnn(c, d, var_theta, beta, kmax, quad_order);
      tab = ks.table;
      extra["t_c_effective"] = ks.t_c_effective;
    } else if (kernel == "relu") {
      tab = project_zonal([&](double t) { return analytic_ntk_relu(t, c, d, beta); }, d, kmax,
                          quad_order);
    } else if (kernel == "rgauss") {
      require(xi > 0.0, "xi", "must be > 0");
      tab = kernel_eigen_rgauss(d, xi, kmax, quad_order);
    } else if (kernel == "laplace") {
      tab = project_zonal([&](double t) { return laplace_kernel(t, bandwidth); }, d, kmax,
                          quad_order);
    } else if (kernel == "gaussian") {
      tab = project_zonal([&](double t) { return gaussian_kernel(t, bandwidth); }, d, kmax,
                          quad_order);
    } else {
      throw UsageError(
          "config value \"kernel\" must be bwnn, relu, rgauss, laplace, or gaussian");
    }
    write_spectrum_csv(tab, spectrum_out);

    json fit_json;
    bool pass = true;
    try {
      DecayFit fit = fit_decay(tab, fit_kmin, fit_kmax, fit_parity);
      fit_json = {{"exp_slope", fit.exp_slope},   {"exp_r2", fit.exp_r2},
                  {"pow_exponent", fit.pow_exponent}, {"pow_r2", fit.pow_r2},
                  {"k_min", fit.k_min},           {"k_max", fit.k_max}};
      if (expect == "exp")
        pass = fit.exp_r2 > fit.pow_r2;
      else if (expect == "pow")
        pass = fit.pow_r2 > fit.exp_r2;
      else if (!expect.empty())
        throw UsageError("config value \"expect\" must be exp or pow");
    } catch (const UsageError&) {
      throw;
    } catch (const std::exception& e) {
      fit_json = {{"error", e.what()}};
      if (!expect.empty()) pass = false;
    }

    json r = report_shell("spectrum", opts, 0);
    r["results"] = {{"quad_converged", tab.quad_converged},
                    {"spectrum_csv", spectrum_out},
                    {"fit", fit_json},
                    {"pass", pass}};
    for (const auto& [key, val] : extra.items()) r["results"][key] = val;
    emit_report(r, out);
    if (!tab.quad_converged) return kExitThreshold;
    return pass ? kExitPass : kExitThreshold;
  }
};

// --- drift ----------------------------------------------------------------

struct DriftCmd {
  std::vector<int> widths = {64, 128, 256};
  int d = 8, d1 = 512, probes = 16, n_seeds = 5;
  double c = 1.0, beta = 1.0, noise = 0.1, frequency = 2.0;
  int n = 64;
  std::string mode = "quasi";
  double lr = 1.0;
  int epochs = 600;
  std::uint64_t seed = 710;
  double ratio_lo = 0.3, ratio_hi = 0.8;
  std::string out;

  void bind(OptionSet& o) {
    o.add("widths", widths, "hidden widths to sweep");
    o.add("d", d, "input dimension");
    o.add("d1", d1, "projection layer width");
    o.add("probes", probes, "kernel probe count");
    o.add("seeds", n_seeds, "seeds per width (median reported)");
    o.add("c", c, "layer-1 scale constant");
    o.add("beta", beta, "bias scale");
    o.add("n", n, "synthetic sample count");
    o.add("noise", noise, "synthetic noise level");
    o.add("frequency", frequency, "random-fourier frequency scale");
    o.add("mode", mode, "training mode");
    o.add("lr", lr, "learning rate");
    o.add("epochs", epochs, "training epochs");
    o.add("seed", seed, "base RNG seed");
    o.add("ratio-lo", ratio_lo, "lower bound on drift(4w)/drift(w)");
    o.add("ratio-hi", ratio_hi, "upper bound on drift(4w)/drift(w)");
    o.add("out", out, "report JSON path");
  }

  int run(const OptionSet& opts) {
    require(widths.size() >= 2, "widths", "needs at least two widths");
    require(n_seeds >= 1, "seeds", "must be >= 1");
    require(lr > 0.0, "lr", "must be > 0");
    TrainMode tm = parse_train_mode(mode);
    auto probe_set = unit_probes(probes, d, seed);

    json per_width = json::array();
    std::vector<double> medians;
    for (int d2 : widths) {
      std::vector<double> vals;
      for (int si = 0; si < n_seeds; ++si) {
        std::uint64_t s = seed + si;
        Dataset ds = make_synthetic(SyntheticKind::RandomFourierTarget, n, d, noise, s, 1.0,
                                    frequency);
        Rng rng(s);
        ModelParams p0 = init_params({d, d1, d2}, c, beta, ThetaInit::ScaledUniform, 0.5, rng);
        TrainConfig tc;
        tc.mode = tm;
        tc.lr = lr;
        tc.epochs = epochs;
        tc.record_drift_every = 0;
        Rng trng(s + 1);
        TrainResult res = train(p0, ds, tc, trng);
        vals.push_back(measure_kernel_drift(p0, res.params, probe_set));
      }
      std::sort(vals.begin(), vals.end());
      double med = vals[vals.size() / 2];
      medians.push_back(med);
      per_width.push_back({{"d2", d2}, {"median_drift", med}, {"drifts", vals}});
    }

    bool monotone = true;
    for (std::size_t i = 1; i < medians.size(); ++i)
      if (medians[i] >= medians[i - 1]) monotone = false;
    bool ratio_ok = true;
    json ratios = json::array();
    for (std::size_t i = 0; i + 1 < widths.size(); ++i)
      for (std::size_t j = i + 1; j < widths.size(); ++j)
        if (widths[j] == 4 * widths[i]) {
          double ratio = medians[j] / medians[i];
          ratios.push_back({{"w", widths[i]}, {"ratio", ratio}});
          if (ratio < ratio_lo || ratio > ratio_hi) ratio_ok = false;
        }

    json r = report_shell("drift", opts, seed);
    r["results"] = {{"per_width", per_width},
                    {"quadruple_ratios", ratios},
                    {"monotone_decreasing", monotone},
                    {"pass", monotone && ratio_ok}};
    emit_report(r, out);
    return (monotone && ratio_ok) ? kExitPass : kExitThreshold;
  }
};

// --- compare --------------------------------------------------------------

struct CompareCmd {
  int n_datasets = 4, m = 60, d = 8, n_seeds = 5;
  std::string synthetic = "random-fourier";
  double noise = 0.3, frequency = 3.0, train_fraction = 0.5;
  std::uint64_t seed = 1103;
  SuiteConfig sc;
  double alpha = 0.0;  // 0 = report only; otherwise one-sided p threshold
  std::string csv_out = "comparison.csv", out;

  void bind(OptionSet& o) {
    o.add("datasets", n_datasets, "number of synthetic datasets");
    o.add("m", m, "samples per dataset");
    o.add("d", d, "input dimension");
    o.add("seeds", n_seeds, "model seeds per dataset");
    o.add("synthetic", synthetic, "two-gaussians or random-fourier");
    o.add("noise", noise, "synthetic noise level");
    o.add("frequency", frequency, "random-fourier frequency scale");
    o.add("train-fraction", train_fraction, "train split fraction");
    o.add("seed", seed, "base dataset seed");
    o.add("d1", sc.d1, "network projection width");
    o.add("d2", sc.d2, "network hidden width");
    o.add("epochs", sc.epochs, "network training epochs");
    o.add("weight-decay", sc.weight_decay, "network weight decay");
    o.add("ridge", sc.ridge, "kernel ridge regularization");
    o.add("alpha", alpha, "one-sided p threshold for gap direction (0 = report only)");
    o.add("csv-out", csv_out, "per-cell results CSV path");
    o.add("out", out, "report JSON path");
  }

  int run(const OptionSet& opts) {
    require(n_datasets >= 1, "datasets", "must be >= 1");
    require(n_seeds >= 1, "seeds", "must be >= 1");
    SyntheticKind kind;
    if (synthetic == "two-gaussians")
      kind = SyntheticKind::TwoGaussiansOnSphere;
    else if (synthetic == "random-fourier")
      kind = SyntheticKind::RandomFourierTarget;
    else
      throw UsageError("config value \"synthetic\" must be two-gaussians or random-fourier");

    std::vector<Dataset> data;
    for (int i = 0; i < n_datasets; ++i)
      data.push_back(make_synthetic(kind, m, d, noise, seed + i, train_fraction, frequency));
    std::vector<std::uint64_t> seeds;
    for (int i = 0; i < n_seeds; ++i) seeds.push_back(i + 1);
    std::vector<ModelKind> models = {ModelKind::RealNN, ModelKind::BWNN, ModelKind::KernelLaplace,
                                     ModelKind::KernelGaussian};
    auto rep = generalization_suite(models, data, seeds, sc);
    write_comparison_csv(rep, csv_out);

    bool pass = true;
    json pairs = json::array();
    for (const auto& p : rep.pairs) {
      double p_one = p.gap_test.t > 0.0 ? 0.5 * p.gap_test.p : 1.0 - 0.5 * p.gap_test.p;
      if (alpha > 0.0 && (p.mean_gap_first <= p.mean_gap_second || p_one >= alpha)) pass = false;
      pairs.push_back({{"first", p.first},
                       {"second", p.second},
                       {"mean_gap_first", p.mean_gap_first},
                       {"mean_gap_second", p.mean_gap_second},
                       {"t", p.gap_test.t},
                       {"p_two_sided", p.gap_test.p},
                       {"p_one_sided", p_one},
                       {"first_higher_pct", p.first_higher_pct}});
    }

    json r = report_shell("compare", opts, seed);
    r["results"] = {{"n_cells", rep.cells.size()},
                    {"cells_csv", csv_out},
                    {"pairs", pairs},
                    {"pass", pass}};
    emit_report(r, out);
    return pass ? kExitPass : kExitThreshold;
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"binary-weight network analysis toolkit"};
  app.require_subcommand(1);

  VerifyQuasiCmd verify_cmd;
  GradcheckCmd gradcheck_cmd;
  TrainCmd train_cmd;
  NtkCmd ntk_cmd;
  SpectrumCmd spectrum_cmd;
  DriftCmd drift_cmd;
  CompareCmd compare_cmd;

  auto* c1 = app.add_subcommand("verify-quasi",
                                "compare the moment propagation against binary-weight sampling");
  auto* c2 = app.add_subcommand("gradcheck", "finite-difference check of the analytic gradients");
  auto* c3 = app.add_subcommand("train", "train a model on a dataset");
  auto* c4 = app.add_subcommand("ntk", "emit an empirical or analytic kernel Gram matrix");
  auto* c5 = app.add_subcommand("spectrum", "project a kernel onto the zonal harmonic basis");
  auto* c6 = app.add_subcommand("drift", "kernel drift across hidden widths");
  auto* c7 = app.add_subcommand("compare", "generalization-gap comparison across model families");

  OptionSet o1(c1), o2(c2), o3(c3), o4(c4), o5(c5), o6(c6), o7(c7);
  verify_cmd.bind(o1);
  gradcheck_cmd.bind(o2);
  train_cmd.bind(o3);
  ntk_cmd.bind(o4);
  spectrum_cmd.bind(o5);
  drift_cmd.bind(o6);
  compare_cmd.bind(o7);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitPass : kExitUsage;
  }

  try {
    if (c1->parsed()) {
      o1.merge();
      return verify_cmd.run(o1);
    }
    if (c2->parsed()) {
      o2.merge();
      return gradcheck_cmd.run(o2);
    }
    if (c3->parsed()) {
      o3.merge();
      return train_cmd.run(o3);
    }
    if (c4->parsed()) {
      o4.merge();
      return ntk_cmd.run(o4);
    }
    if (c5->parsed()) {
      o5.merge();
      return spectrum_cmd.run(o5);
    }
    if (c6->parsed()) {
      o6.merge();
      return drift_cmd.run(o6);
    }
    if (c7->parsed()) {
      o7.merge();
      return compare_cmd.run(o7);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
