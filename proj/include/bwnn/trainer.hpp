#pragma once

#include "bwnn/dataset.hpp"
#include "bwnn/ntk.hpp"

namespace bwnn {

enum class TrainMode { BinaryConnect, Quasi, Real };

struct TrainConfig {
  TrainMode mode = TrainMode::Quasi;
  double lr = 0.1;
  int epochs = 1;
  int batch_size = 0;  // 0 = full batch
  double weight_decay = 0.0;
  std::uint64_t seed = 0;
  int record_drift_every = 10;
};

// Per-checkpoint distances from the initial parameters, plus the worst-case
// deviation of the exact per-neuron variance from its limit.
struct DriftLog {
  std::vector<int> steps;
  std::vector<double> loss;
  std::vector<double> w2_drift;
  std::vector<double> b1_drift;
  std::vector<double> theta1_drift;
  std::vector<double> varsigma_drift;
};

struct TrainResult {
  ModelParams params;
  DriftLog drift;
  std::vector<double> loss_curve;  // per step
};

// SGD with MSE loss. BinaryConnect resamples binary weights each step and
// accumulates straight-through gradients into theta1; quasi mode differentiates
// ybar directly; real mode is plain backprop with theta1 as the weights.
// theta1 is clipped to [-1, 1] after every update.
TrainResult train(const ModelParams& start, const Dataset& data, const TrainConfig& cfg, Rng& rng);

// Relative Frobenius change of the empirical NTK between two parameter sets.
double measure_kernel_drift(const ModelParams& params_t0, const ModelParams& params_t1,
                            const std::vector<std::vector<double>>& probes);

// Fraction of theta1 entries sitting at the +/-1 boundary.
double clip_check(const ModelParams& p);

void write_drift_csv(const DriftLog& log, const std::string& path);

}  // namespace bwnn
