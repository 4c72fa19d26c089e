#include "bwnn/quant.hpp"

namespace bwnn {
namespace {

// One draw from the caller's stream seeds per-row substreams, so the result is
// independent of thread count and identical to the serial reference.
Matrix quantize_impl(const QuantBuffer& buffer, Rng& rng, bool deterministic, bool parallel) {
  const Matrix& th = buffer.theta;
  for (double v : th.data)
    if (v > 1.0 + kQuantTol || v < -1.0 - kQuantTol)
      throw std::domain_error("quantize: theta outside [-1, 1]");

  Matrix w(th.rows, th.cols);
  if (deterministic) {
    for (std::size_t i = 0; i < th.data.size(); ++i)
      w.data[i] = quantize_entry_sign(th.data[i]);
    return w;
  }

  Rng base(rng.next_u64());
  const std::ptrdiff_t nrows = static_cast<std::ptrdiff_t>(th.rows);
#pragma omp parallel for if (parallel) schedule(static)
  for (std::ptrdiff_t i = 0; i < nrows; ++i) {
    Rng row_rng = base.substream(static_cast<std::uint64_t>(i));
    for (std::size_t j = 0; j < th.cols; ++j) {
      double t = std::min(1.0, std::max(-1.0, th(i, j)));
      w(i, j) = row_rng.next_double() < 0.5 * (t + 1.0) ? 1.0 : -1.0;
    }
  }
  return w;
}

}  // namespace

Matrix quantize(const QuantBuffer& buffer, Rng& rng, bool deterministic) {
  return quantize_impl(buffer, rng, deterministic, true);
}

Matrix quantize_serial(const QuantBuffer& buffer, Rng& rng, bool deterministic) {
  return quantize_impl(buffer, rng, deterministic, false);
}

}  // namespace bwnn
