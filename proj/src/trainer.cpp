#include "bwnn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

namespace bwnn {
namespace {

struct GradAccum {
  Matrix d_theta1;
  std::vector<double> d_b1;
  std::vector<double> d_w2;

  explicit GradAccum(const Dims& dims)
      : d_theta1(dims.d1, dims.d2), d_b1(dims.d2, 0.0), d_w2(dims.d2, 0.0) {}

  void scale(double s) {
    for (auto& v : d_theta1.data) v *= s;
    for (auto& v : d_b1) v *= s;
    for (auto& v : d_w2) v *= s;
  }
};

// Backprop through the sampled (or real-weight) forward pass, straight-through
// on the quantized layer: d/d theta1 taken as d/d w1.
void accumulate_sampled_grad(const ModelParams& p, const ForwardTrace& t,
                             const std::vector<double>& /*x*/, double loss_grad, GradAccum& g) {
  const int d1 = p.dims.d1, d2 = p.dims.d2;
  const double inv_sqrt_d2 = 1.0 / std::sqrt(static_cast<double>(d2));
  std::vector<double> dy1(d2);
  for (int j = 0; j < d2; ++j) {
    g.d_w2[j] += inv_sqrt_d2 * t.x2[j] * loss_grad;
    double relu_grad = t.y1[j] > 0.0 ? 1.0 : 0.0;
    dy1[j] = inv_sqrt_d2 * p.w2[j] * relu_grad * loss_grad;
    g.d_b1[j] += p.beta * dy1[j];
  }
  const double scale1 = std::sqrt(p.c / d1);
  for (int i = 0; i < d1; ++i) {
    double* row = &g.d_theta1.data[static_cast<std::size_t>(i) * d2];
    const double xi = t.x1[i] * scale1;
    for (int j = 0; j < d2; ++j) row[j] += xi * dy1[j];
  }
}

double max_varsigma_dev(const ModelParams& p, const std::vector<double>& probe, double limit) {
  MomentState st = propagate_moments(p, probe, VarianceMode::Exact);
  double dev = 0.0;
  for (double v : st.varsigma1_sq) dev = std::max(dev, std::abs(v - limit));
  return dev;
}

}  // namespace

TrainResult train(const ModelParams& start, const Dataset& data, const TrainConfig& cfg,
                  Rng& rng) {
  if (cfg.lr < 0.0 || cfg.batch_size < 0) throw std::invalid_argument("train: bad config");
  const int m = static_cast<int>(data.train_idx.size());
  if (m == 0) throw std::invalid_argument("train: empty training split");

  TrainResult res;
  res.params = start;
  ModelParams& p = res.params;
  const int d1 = p.dims.d1, d2 = p.dims.d2;
  const double limit_vs = tilde_varsigma_sq(p.c, p.dims.d, empirical_var_theta(start));
  const std::vector<double> drift_probe = data.row(data.train_idx[0]);

  const std::vector<double> w2_0 = p.w2;
  const std::vector<double> b1_0 = p.b1;
  const std::vector<double> th_0 = p.theta1.theta.data;

  auto record = [&](int step, double loss) {
    res.drift.steps.push_back(step);
    res.drift.loss.push_back(loss);
    double dw = 0.0, db = 0.0, dt = 0.0;
    for (int j = 0; j < d2; ++j) {
      dw += (p.w2[j] - w2_0[j]) * (p.w2[j] - w2_0[j]);
      db += (p.b1[j] - b1_0[j]) * (p.b1[j] - b1_0[j]);
    }
    for (std::size_t i = 0; i < th_0.size(); ++i) {
      double e = p.theta1.theta.data[i] - th_0[i];
      dt += e * e;
    }
    res.drift.w2_drift.push_back(std::sqrt(dw));
    res.drift.b1_drift.push_back(std::sqrt(db));
    res.drift.theta1_drift.push_back(std::sqrt(dt));
    res.drift.varsigma_drift.push_back(max_varsigma_dev(p, drift_probe, limit_vs));
  };

  const int bs = cfg.batch_size == 0 ? m : std::min(cfg.batch_size, m);
  const int steps_per_epoch = (m + bs - 1) / bs;
  std::vector<int> order(data.train_idx);

  int step = 0;
  record(0, 0.0);
  // First drift entry is by definition zero; replace loss below once known.

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (bs < m) {
      // Fisher-Yates with the run's stream keeps epochs replayable.
      for (int i = m - 1; i > 0; --i)
        std::swap(order[i], order[static_cast<int>(rng.next_index(i + 1))]);
    }
    for (int sb = 0; sb < steps_per_epoch; ++sb) {
      const int lo = sb * bs, hi = std::min(m, lo + bs);
      const int nb = hi - lo;

      GradAccum g(p.dims);
      double batch_loss = 0.0;

      if (cfg.mode == TrainMode::Quasi) {
        for (int ii = lo; ii < hi; ++ii) {
          const int idx = order[ii];
          const std::vector<double> x = data.row(idx);
          MomentState st = propagate_moments(p, x, VarianceMode::Limit);
          double err = st.ybar - data.targets[idx];
          batch_loss += 0.5 * err * err;
          QuasiGrad qg = quasi_backward(p, st, err);
          for (std::size_t k = 0; k < qg.d_theta1.data.size(); ++k)
            g.d_theta1.data[k] += qg.d_theta1.data[k];
          for (int j = 0; j < d2; ++j) {
            g.d_b1[j] += qg.d_b1[j];
            g.d_w2[j] += qg.d_w2[j];
          }
        }
      } else {
        BinarySample sample;
        if (cfg.mode == TrainMode::BinaryConnect) sample = draw_binary(p, rng);
        for (int ii = lo; ii < hi; ++ii) {
          const int idx = order[ii];
          const std::vector<double> x = data.row(idx);
          ForwardTrace t = cfg.mode == TrainMode::BinaryConnect ? forward_binary(p, sample, x)
                                                                : forward_real(p, x);
          double err = t.y - data.targets[idx];
          batch_loss += 0.5 * err * err;
          accumulate_sampled_grad(p, t, x, err, g);
        }
      }

      batch_loss /= nb;
      if (!std::isfinite(batch_loss) || batch_loss > 1e6)
        throw std::runtime_error("train: divergence guard tripped");
      g.scale(1.0 / nb);

      // SGD step; weight decay on theta1 and w2 only; theta1 clipped to [-1, 1].
      for (std::size_t k = 0; k < g.d_theta1.data.size(); ++k) {
        double& th = p.theta1.theta.data[k];
        th -= cfg.lr * (g.d_theta1.data[k] + cfg.weight_decay * th);
        th = std::min(1.0, std::max(-1.0, th));
      }
      for (int j = 0; j < d2; ++j) {
        p.b1[j] -= cfg.lr * g.d_b1[j];
        p.w2[j] -= cfg.lr * (g.d_w2[j] + cfg.weight_decay * p.w2[j]);
      }

      ++step;
      res.loss_curve.push_back(batch_loss);
      if (step == 1) res.drift.loss[0] = batch_loss;
      if (cfg.record_drift_every > 0 && step % cfg.record_drift_every == 0)
        record(step, batch_loss);
    }
  }
  return res;
}

double measure_kernel_drift(const ModelParams& params_t0, const ModelParams& params_t1,
                            const std::vector<std::vector<double>>& probes) {
  if (probes.empty() || probes.size() > 64)
    throw std::invalid_argument("measure_kernel_drift: probe count must be in [1, 64]");
  KernelMatrix k0 = empirical_ntk(params_t0, probes);
  KernelMatrix k1 = empirical_ntk(params_t1, probes);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < k0.gram.data.size(); ++i) {
    double e = k1.gram.data[i] - k0.gram.data[i];
    num += e * e;
    den += k0.gram.data[i] * k0.gram.data[i];
  }
  return std::sqrt(num / den);
}

double clip_check(const ModelParams& p) {
  std::size_t at_boundary = 0;
  for (double v : p.theta1.theta.data)
    if (std::abs(v) >= 1.0 - 1e-12) ++at_boundary;
  return static_cast<double>(at_boundary) / static_cast<double>(p.theta1.theta.data.size());
}

void write_drift_csv(const DriftLog& log, const std::string& path) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("write_drift_csv: cannot open " + tmp);
    os << "step,loss,w2_drift,b1_drift,theta1_drift,varsigma_drift\n";
    os.precision(17);
    for (std::size_t i = 0; i < log.steps.size(); ++i)
      os << log.steps[i] << ',' << log.loss[i] << ',' << log.w2_drift[i] << ',' << log.b1_drift[i]
         << ',' << log.theta1_drift[i] << ',' << log.varsigma_drift[i] << '\n';
  }
  std::rename(tmp.c_str(), path.c_str());
}

}  // namespace bwnn
