#pragma once

#include <stdexcept>
#include <utility>

#include "bwnn/linalg.hpp"
#include "bwnn/rng.hpp"

namespace bwnn {

// Real-valued buffer driving the binary weight distribution; entries live in [-1, 1].
struct QuantBuffer {
  Matrix theta;
};

inline constexpr double kQuantTol = 1e-12;

// Entry-level stochastic rounding: +1 with probability (theta+1)/2.
// theta outside [-1,1] by more than kQuantTol signals a trainer clipping bug.
inline double quantize_entry(double theta, Rng& rng) {
  if (theta > 1.0 + kQuantTol || theta < -1.0 - kQuantTol)
    throw std::domain_error("quantize: theta outside [-1, 1]");
  double p = 0.5 * (std::min(1.0, std::max(-1.0, theta)) + 1.0);
  return rng.next_double() < p ? 1.0 : -1.0;
}

inline double quantize_entry_sign(double theta) { return theta >= 0.0 ? 1.0 : -1.0; }

// Draws one binary realization of the whole buffer.
// deterministic=true is the sign(theta) ablation mode.
Matrix quantize(const QuantBuffer& buffer, Rng& rng, bool deterministic = false);

// Serial reference for the OpenMP path, kept for testing.
Matrix quantize_serial(const QuantBuffer& buffer, Rng& rng, bool deterministic = false);

// (E[w|theta], Var[w|theta]) = (theta, 1 - theta^2)
inline std::pair<double, double> quantize_mean_var(double theta) {
  if (theta > 1.0 + kQuantTol || theta < -1.0 - kQuantTol)
    throw std::domain_error("quantize_mean_var: theta outside [-1, 1]");
  double t = std::min(1.0, std::max(-1.0, theta));
  return {t, 1.0 - t * t};
}

}  // namespace bwnn
