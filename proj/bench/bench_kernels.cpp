// Timings for the OpenMP kernels against their serial reference
// implementations. Both paths draw from counter-based substreams keyed by
// entry index, so outputs must match bit-for-bit regardless of thread count.

#include <chrono>
#include <cstdio>
#include <string>

#include "bwnn/quasi.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

using namespace bwnn;

namespace {

template <typename F>
double time_ms(F&& f, int reps) {
  // one warm-up, then best of reps
  f();
  double best = 1e300;
  for (int r = 0; r < reps; ++r) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    auto t1 = std::chrono::steady_clock::now();
    best = std::min(best, std::chrono::duration<double, std::milli>(t1 - t0).count());
  }
  return best;
}

void report(const std::string& name, double serial_ms, double parallel_ms, bool identical) {
  std::printf("%-28s serial %9.2f ms   parallel %9.2f ms   speedup %5.2fx   %s\n", name.c_str(),
              serial_ms, parallel_ms, serial_ms / parallel_ms,
              identical ? "bit-identical" : "MISMATCH");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp threads: %d\n", omp_get_max_threads());
#else
  std::printf("openmp: disabled\n");
#endif
  const int reps = 5;
  int failures = 0;

  {
    const int d1 = 2000, d2 = 2000;
    QuantBuffer buf;
    buf.theta = Matrix(d1, d2);
    Rng init(7);
    for (auto& v : buf.theta.data) v = init.uniform(-1.0, 1.0);

    Rng r1(11), r2(11);
    Matrix ws, wp;
    double ts = time_ms([&] { ws = quantize_serial(buf, r1); }, reps);
    double tp = time_ms([&] { wp = quantize(buf, r2); }, reps);
    bool same = ws.data == wp.data;
    report("quantize (2000x2000)", ts, tp, same);
    failures += !same;
  }

  {
    const int d = 16, d1 = 400, d2 = 64, n = 400;
    Rng init(21);
    ModelParams p = init_params({d, d1, d2}, 1.0, 1.0, ThetaInit::Uniform, 1.0, init);
    std::vector<double> x = sample_gaussian(init, d);
    double nx = norm2(x);
    for (auto& v : x) v /= nx;

    Rng r1(31), r2(31);
    McForwardStats ss, sp;
    double ts = time_ms([&] { ss = mc_forward_stats_serial(p, x, n, r1); }, reps);
    double tp = time_ms([&] { sp = mc_forward_stats(p, x, n, r2); }, reps);
    bool same = ss.mean == sp.mean && ss.var == sp.var && ss.y1_samples.data == sp.y1_samples.data;
    report("mc_forward_stats (n=400)", ts, tp, same);
    failures += !same;
  }

  return failures == 0 ? 0 : 1;
}
