#include "bwnn/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "bwnn/spectrum.hpp"

namespace bwnn {

VerifyQuasiReport verify_quasi(const VerifyQuasiConfig& cfg) {
  if (cfg.d1 < 100 || cfg.n_samples < 500)
    throw std::invalid_argument("verify_quasi: need d1 >= 100, n >= 500");
  Rng rng(cfg.seed);
  ModelParams p = init_params({cfg.d, cfg.d1, cfg.d2}, cfg.c, cfg.beta, ThetaInit::Uniform, 1.0,
                              rng);

  VerifyQuasiReport rep;
  std::vector<double> ks_stats;
  std::vector<double> quasi_means(cfg.n_probes), mc_means(cfg.n_probes);

  for (int pr = 0; pr < cfg.n_probes; ++pr) {
    std::vector<double> x = sample_gaussian(rng, cfg.d);
    double n = norm2(x);
    for (auto& v : x) v /= n;

    MomentState st = propagate_moments(p, x, VarianceMode::Exact);
    McForwardStats mc = mc_forward_stats(p, x, cfg.n_samples, rng);
    quasi_means[pr] = st.ybar;
    mc_means[pr] = mc.mean;

    for (int j = 0; j < cfg.d2; ++j) {
      std::vector<double> col(cfg.n_samples);
      for (int s = 0; s < cfg.n_samples; ++s) col[s] = mc.y1_samples(s, j);
      ks_stats.push_back(ks_statistic_gaussian(col, st.nu1[j], std::sqrt(st.varsigma1_sq[j])));
    }
  }

  rep.n_neurons_tested = static_cast<int>(ks_stats.size());
  std::size_t under = 0;
  for (double k : ks_stats)
    if (k < cfg.ks_threshold) ++under;
  rep.ks_pass_rate = static_cast<double>(under) / ks_stats.size();
  std::nth_element(ks_stats.begin(), ks_stats.begin() + ks_stats.size() / 2, ks_stats.end());
  rep.ks_median = ks_stats[ks_stats.size() / 2];

  // Pearson r between quasi ybar and MC mean over probes.
  double ma = 0, mb = 0;
  for (int i = 0; i < cfg.n_probes; ++i) {
    ma += quasi_means[i];
    mb += mc_means[i];
  }
  ma /= cfg.n_probes;
  mb /= cfg.n_probes;
  double sab = 0, saa = 0, sbb = 0;
  for (int i = 0; i < cfg.n_probes; ++i) {
    sab += (quasi_means[i] - ma) * (mc_means[i] - mb);
    saa += (quasi_means[i] - ma) * (quasi_means[i] - ma);
    sbb += (mc_means[i] - mb) * (mc_means[i] - mb);
  }
  rep.pearson_r = sab / std::sqrt(saa * sbb);
  rep.pass = rep.ks_pass_rate >= 0.95 && rep.pearson_r > cfg.r_threshold;
  return rep;
}

Dataset make_synthetic(SyntheticKind kind, int m, int d, double noise, std::uint64_t seed,
                       double train_fraction, double frequency) {
  if (m < 20 || d < 2) throw std::invalid_argument("make_synthetic: need m >= 20, d >= 2");
  Rng rng(seed, 17);
  Dataset ds;
  ds.seed = seed;
  ds.inputs = Matrix(m, d);
  ds.targets.resize(m);

  if (kind == SyntheticKind::TwoGaussiansOnSphere) {
    ds.name = "two-gaussians";
    std::vector<double> center = sample_gaussian(rng, d);
    double cn = norm2(center);
    for (auto& v : center) v /= cn;
    ds.labels.resize(m);
    ds.class_names = {"-1", "+1"};
    for (int i = 0; i < m; ++i) {
      int label = (i % 2 == 0) ? 1 : -1;
      std::vector<double> x(d);
      for (int k = 0; k < d; ++k) x[k] = label * center[k] + noise * rng.next_gaussian();
      double n = norm2(x);
      for (int k = 0; k < d; ++k) ds.inputs(i, k) = x[k] / n;
      ds.targets[i] = label;
      ds.labels[i] = label > 0 ? 1 : 0;
    }
  } else {
    ds.name = "random-fourier";
    std::vector<double> w = sample_gaussian(rng, d);
    double phase = rng.uniform(0.0, 6.283185307179586);
    for (int i = 0; i < m; ++i) {
      std::vector<double> x = sample_gaussian(rng, d);
      double n = norm2(x);
      for (int k = 0; k < d; ++k) ds.inputs(i, k) = x[k] / n;
      double z = 0.0;
      for (int k = 0; k < d; ++k) z += w[k] * ds.inputs(i, k);
      ds.targets[i] = std::cos(frequency * z + phase) + noise * rng.next_gaussian();
    }
  }

  // Deterministic shuffled split.
  std::vector<int> order(m);
  std::iota(order.begin(), order.end(), 0);
  for (int i = m - 1; i > 0; --i)
    std::swap(order[i], order[static_cast<int>(rng.next_index(i + 1))]);
  const int n_train = std::max(1, static_cast<int>(m * train_fraction));
  ds.train_idx.assign(order.begin(), order.begin() + n_train);
  ds.test_idx.assign(order.begin() + n_train, order.end());
  return ds;
}

double incomplete_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // Continued fraction (Lentz), symmetric form.
  auto betacf = [](double a, double b, double x) {
    const int max_iter = 300;
    const double eps = 3e-14, fpmin = 1e-300;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int mm = 1; mm <= max_iter; ++mm) {
      int m2 = 2 * mm;
      double aa = mm * (b - mm) * x / ((qam + m2) * (a + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < fpmin) d = fpmin;
      c = 1.0 + aa / c;
      if (std::abs(c) < fpmin) c = fpmin;
      d = 1.0 / d;
      h *= d * c;
      aa = -(a + mm) * (qab + mm) * x / ((a + m2) * (qap + m2));
      d = 1.0 + aa * d;
      if (std::abs(d) < fpmin) d = fpmin;
      c = 1.0 + aa / c;
      if (std::abs(c) < fpmin) c = fpmin;
      d = 1.0 / d;
      double del = d * c;
      h *= del;
      if (std::abs(del - 1.0) < eps) break;
    }
    return h;
  };
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                    b * std::log(1.0 - x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided_p(double t, int dof) {
  double v = static_cast<double>(dof);
  return incomplete_beta(0.5 * v, 0.5, v / (v + t * t));
}

TTestResult paired_ttest(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.size() < 2)
    throw std::invalid_argument("paired_ttest: need equal lengths >= 2");
  const int n = static_cast<int>(a.size());
  double mean = 0.0;
  for (int i = 0; i < n; ++i) mean += a[i] - b[i];
  mean /= n;
  double var = 0.0;
  for (int i = 0; i < n; ++i) {
    double e = a[i] - b[i] - mean;
    var += e * e;
  }
  var /= (n - 1);

  TTestResult r;
  if (var == 0.0) {
    r.degenerate = true;
    if (mean == 0.0) {
      r.t = 0.0;
      r.p = 1.0;
    } else {
      r.t = std::copysign(1e9, mean);  // capped
      r.p = 1e-9;
    }
    return r;
  }
  r.t = mean / std::sqrt(var / n);
  r.p = student_t_two_sided_p(r.t, n - 1);
  return r;
}

std::string model_kind_name(ModelKind k) {
  switch (k) {
    case ModelKind::RealNN: return "real-nn";
    case ModelKind::BWNN: return "bwnn";
    case ModelKind::KernelLaplace: return "kernel-laplace";
    case ModelKind::KernelGaussian: return "kernel-gaussian";
    case ModelKind::KernelBwnnNtk: return "kernel-bwnn-ntk";
  }
  return "?";
}

double median_pairwise_distance(const Dataset& data) {
  std::vector<double> dists;
  const auto& idx = data.train_idx;
  for (std::size_t i = 0; i < idx.size(); ++i)
    for (std::size_t j = i + 1; j < idx.size(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < data.inputs.cols; ++k) {
        double e = data.inputs(idx[i], k) - data.inputs(idx[j], k);
        s += e * e;
      }
      dists.push_back(std::sqrt(s));
    }
  std::nth_element(dists.begin(), dists.begin() + dists.size() / 2, dists.end());
  return dists[dists.size() / 2];
}

namespace {

double metric_from_predictions(const Dataset& data, const std::vector<int>& idx,
                               const std::vector<double>& preds) {
  if (data.is_classification()) {
    int correct = 0;
    for (std::size_t i = 0; i < idx.size(); ++i)
      if ((preds[i] >= 0.0 ? 1.0 : -1.0) == data.targets[idx[i]]) ++correct;
    return static_cast<double>(correct) / idx.size();
  }
  double mse = 0.0;
  for (std::size_t i = 0; i < idx.size(); ++i) {
    double e = preds[i] - data.targets[idx[i]];
    mse += e * e;
  }
  return -mse / idx.size();
}

CellResult run_nn_cell(ModelKind kind, const Dataset& data, std::uint64_t seed,
                       const SuiteConfig& cfg) {
  CellResult cell;
  cell.model = kind;
  cell.dataset = data.name;
  cell.seed = seed;

  const int d = static_cast<int>(data.inputs.cols);
  TrainMode mode = kind == ModelKind::RealNN ? TrainMode::Real : TrainMode::BinaryConnect;

  double best_loss = 1e300;
  ModelParams best;
  bool any_ok = false;
  for (double lr : cfg.lr_grid) {
    try {
      Rng rng(seed, 3);
      ModelParams p0 =
          init_params({d, cfg.d1, cfg.d2}, 1.0, 1.0, ThetaInit::ScaledUniform, 0.5, rng);
      TrainConfig tc;
      tc.mode = mode;
      tc.lr = lr;
      tc.epochs = cfg.epochs;
      tc.batch_size = 0;
      tc.weight_decay = cfg.weight_decay;
      tc.record_drift_every = 0;
      TrainResult res = train(p0, data, tc, rng);
      double final_loss = res.loss_curve.back();
      if (final_loss < best_loss) {
        best_loss = final_loss;
        best = std::move(res.params);
        any_ok = true;
      }
    } catch (const std::runtime_error&) {
      // divergence at this lr; skip
    }
  }
  if (!any_ok) {
    cell.diverged = true;
    return cell;
  }

  auto predict = [&](const std::vector<int>& idx) {
    std::vector<double> preds(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      std::vector<double> x = data.row(idx[i]);
      // BWNN predictions use the quasi mean output; real net uses its forward.
      preds[i] = kind == ModelKind::RealNN
                     ? forward_real(best, x).y
                     : propagate_moments(best, x, VarianceMode::Limit).ybar;
    }
    return preds;
  };
  cell.train_metric = metric_from_predictions(data, data.train_idx, predict(data.train_idx));
  cell.test_metric = metric_from_predictions(data, data.test_idx, predict(data.test_idx));
  cell.gap = cell.train_metric - cell.test_metric;
  return cell;
}

CellResult run_kernel_cell(ModelKind kind, const Dataset& data, std::uint64_t seed,
                           const SuiteConfig& cfg) {
  CellResult cell;
  cell.model = kind;
  cell.dataset = data.name;
  cell.seed = seed;

  const auto& tr = data.train_idx;
  const auto& te = data.test_idx;
  const int n = static_cast<int>(tr.size());
  const int d = static_cast<int>(data.inputs.cols);

  auto inner = [&](int i, int j) {
    double s = 0.0;
    for (std::size_t k = 0; k < data.inputs.cols; ++k) s += data.inputs(i, k) * data.inputs(j, k);
    return std::min(1.0, std::max(-1.0, s));
  };

  std::vector<double> bandwidths;
  if (kind == ModelKind::KernelBwnnNtk) {
    bandwidths = {1.0};  // scale fixed by the kernel's own constants
  } else {
    double med = median_pairwise_distance(data);
    for (double f : {0.25, 0.5, 1.0, 2.0, 4.0}) bandwidths.push_back(1.0 / (f * med));
  }

  double best_test = -1e300;
  bool chosen = false;
  for (double bw : bandwidths) {
    auto kfun = [&](double t) {
      switch (kind) {
        case ModelKind::KernelLaplace: return laplace_kernel(t, bw);
        case ModelKind::KernelGaussian: return gaussian_kernel(t, bw);
        default: return analytic_ntk_bwnn(t, 1.0, d, 1.0 / 12.0, 1.0);
      }
    };
    KernelMatrix km;
    km.gram = Matrix(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        double v = kfun(inner(tr[i], tr[j]));
        km.gram(i, j) = v;
        km.gram(j, i) = v;
      }
    std::vector<double> targets(n);
    for (int i = 0; i < n; ++i) targets[i] = data.targets[tr[i]];
    std::vector<double> coeffs;
    try {
      coeffs = kernel_ridge_fit(km, targets, cfg.ridge);
    } catch (const std::runtime_error&) {
      continue;
    }

    Matrix cross_tr(n, n), cross_te(static_cast<int>(te.size()), n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) cross_tr(i, j) = km.gram(i, j);
    for (std::size_t i = 0; i < te.size(); ++i)
      for (int j = 0; j < n; ++j) cross_te(i, j) = kfun(inner(te[i], tr[j]));

    double train_m = metric_from_predictions(data, tr, kernel_ridge_predict(cross_tr, coeffs));
    double test_m = metric_from_predictions(data, te, kernel_ridge_predict(cross_te, coeffs));
    if (test_m > best_test) {
      best_test = test_m;
      cell.train_metric = train_m;
      cell.test_metric = test_m;
      cell.gap = train_m - test_m;
      chosen = true;
    }
  }
  cell.diverged = !chosen;
  return cell;
}

PairedComparison compare_models(const ComparisonReport& rep, ModelKind first, ModelKind second) {
  PairedComparison pc;
  pc.first = model_kind_name(first);
  pc.second = model_kind_name(second);
  std::vector<double> ga, gb;
  int win = 0, loss = 0, tie = 0;
  for (const auto& ca : rep.cells) {
    if (ca.model != first || ca.diverged) continue;
    for (const auto& cb : rep.cells) {
      if (cb.model != second || cb.diverged) continue;
      if (cb.dataset != ca.dataset || cb.seed != ca.seed) continue;
      ga.push_back(ca.gap);
      gb.push_back(cb.gap);
      if (ca.test_metric > cb.test_metric) ++win;
      else if (ca.test_metric < cb.test_metric) ++loss;
      else ++tie;
    }
  }
  if (ga.size() >= 2) pc.gap_test = paired_ttest(ga, gb);
  double n = static_cast<double>(ga.size());
  if (n > 0) {
    pc.first_higher_pct = 100.0 * win / n;
    pc.second_higher_pct = 100.0 * loss / n;
    pc.tie_pct = 100.0 * tie / n;
    for (double g : ga) pc.mean_gap_first += g / n;
    for (double g : gb) pc.mean_gap_second += g / n;
  }
  return pc;
}

}  // namespace

ComparisonReport generalization_suite(const std::vector<ModelKind>& models,
                                      const std::vector<Dataset>& datasets,
                                      const std::vector<std::uint64_t>& seeds,
                                      const SuiteConfig& cfg) {
  if (datasets.size() * seeds.size() < 10)
    throw std::invalid_argument("generalization_suite: need >= 10 (dataset, seed) pairs");
  ComparisonReport rep;
  for (const auto& data : datasets) {
    for (std::uint64_t seed : seeds) {
      for (ModelKind mk : models) {
        CellResult cell = (mk == ModelKind::RealNN || mk == ModelKind::BWNN)
                              ? run_nn_cell(mk, data, seed, cfg)
                              : run_kernel_cell(mk, data, seed, cfg);
        rep.cells.push_back(cell);
      }
    }
  }
  auto has = [&](ModelKind k) { return std::find(models.begin(), models.end(), k) != models.end(); };
  if (has(ModelKind::RealNN) && has(ModelKind::BWNN))
    rep.pairs.push_back(compare_models(rep, ModelKind::RealNN, ModelKind::BWNN));
  if (has(ModelKind::KernelLaplace) && has(ModelKind::KernelGaussian))
    rep.pairs.push_back(compare_models(rep, ModelKind::KernelLaplace, ModelKind::KernelGaussian));
  return rep;
}

void write_comparison_csv(const ComparisonReport& rep, const std::string& path) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("write_comparison_csv: cannot open " + tmp);
    os << "model,dataset,seed,train_metric,test_metric,gap,diverged\n";
    os.precision(12);
    for (const auto& c : rep.cells)
      os << model_kind_name(c.model) << ',' << c.dataset << ',' << c.seed << ',' << c.train_metric
         << ',' << c.test_metric << ',' << c.gap << ',' << (c.diverged ? 1 : 0) << '\n';
    os << "\npair,t_stat,p_val,first_higher_pct,second_higher_pct,tie_pct,mean_gap_first,mean_gap_second\n";
    for (const auto& p : rep.pairs)
      os << p.first << '-' << p.second << ',' << p.gap_test.t << ',' << p.gap_test.p << ','
         << p.first_higher_pct << ',' << p.second_higher_pct << ',' << p.tie_pct << ','
         << p.mean_gap_first << ',' << p.mean_gap_second << '\n';
  }
  std::rename(tmp.c_str(), path.c_str());
}

}  // namespace bwnn
