#pragma once

#include <string>
#include <vector>

#include "bwnn/quant.hpp"

namespace bwnn {

struct Dims {
  int d = 0;    // input dimension
  int d1 = 0;   // width of the fixed projection layer
  int d2 = 0;   // hidden width (quantized layer fan-out)
};

enum class ThetaInit { Uniform, ScaledUniform };

// Three-layer net: fixed random projection w0, stochastic-binary hidden layer
// driven by the real buffer theta1, real output layer w2. Trainables: {theta1, b1, w2}.
// b0 and b2 stay at 0.
struct ModelParams {
  Dims dims;
  double c = 1.0;      // layer-1 scale constant
  double beta = 1.0;   // bias scale
  Matrix w0;           // d x d1, never mutated after construction
  std::vector<double> b0;
  QuantBuffer theta1;  // d1 x d2
  std::vector<double> b1;
  std::vector<double> w2;
  double b2 = 0.0;
  std::uint64_t seed = 0;
};

// One binary realization of the hidden weights.
struct BinarySample {
  Matrix w1;  // d1 x d2, entries in {-1, +1}
  std::uint64_t parent_seed = 0;
};

struct ForwardTrace {
  std::vector<double> x1;  // d1
  std::vector<double> y1;  // d2, pre-activation
  std::vector<double> x2;  // d2, post-ReLU
  double y = 0.0;
};

struct GoodInitReport {
  double cond1_max_residual = 0.0;  // |(1/d1) sum w0_ki w0_k'i - delta|
  double cond2_max = 0.0;           // third-moment average, bound sqrt(8/pi)
  double cond3_max_residual = 0.0;  // |(1/d1) sum w0 w0 theta^2 - Var[theta] delta|
  bool pass = false;
};

ModelParams init_params(Dims dims, double c, double beta, ThetaInit init, double s, Rng& rng);

BinarySample draw_binary(const ModelParams& p, Rng& rng, bool deterministic = false);

// x1 = w0^T x / sqrt(d); y1 = sqrt(c/d1) w1^T x1 + beta*b1; x2 = relu(y1);
// y = w2^T x2 / sqrt(d2). Input must be unit-norm.
ForwardTrace forward_binary(const ModelParams& p, const BinarySample& s,
                            const std::vector<double>& x);

// Same pipeline with theta1 in place of w1 (real-weight baseline).
ForwardTrace forward_real(const ModelParams& p, const std::vector<double>& x);

GoodInitReport check_good_init(const ModelParams& p, double tol);

// Versioned text checkpoint; hex-float payload so round trips are bit exact.
void save_checkpoint(const ModelParams& p, const std::string& path);
ModelParams load_checkpoint(const std::string& path);

void require_unit_norm(const std::vector<double>& x);

// x1 = w0^T x / sqrt(d) (shared by binary/real/quasi pipelines).
std::vector<double> project_input(const ModelParams& p, const std::vector<double>& x);

}  // namespace bwnn
