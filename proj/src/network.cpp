#include "bwnn/network.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace bwnn {

void require_unit_norm(const std::vector<double>& x) {
  double n = norm2(x);
  if (std::abs(n - 1.0) > 1e-9)
    throw std::invalid_argument("input not unit-norm: missing preprocessing");
}

ModelParams init_params(Dims dims, double c, double beta, ThetaInit init, double s, Rng& rng) {
  if (dims.d < 1 || dims.d1 < 1 || dims.d2 < 1)
    throw std::invalid_argument("init_params: dims must be >= 1");
  if (c <= 0.0 || beta < 0.0) throw std::invalid_argument("init_params: bad scale constants");
  if (init == ThetaInit::ScaledUniform && (s <= 0.0 || s > 1.0))
    throw std::invalid_argument("init_params: scale s must be in (0, 1]");

  ModelParams p;
  p.dims = dims;
  p.c = c;
  p.beta = beta;
  p.w0 = Matrix(dims.d, dims.d1);
  for (auto& v : p.w0.data) v = rng.next_gaussian();
  p.b0.assign(dims.d1, 0.0);
  p.theta1.theta = Matrix(dims.d1, dims.d2);
  const double half_width = (init == ThetaInit::Uniform) ? 1.0 : s;
  for (auto& v : p.theta1.theta.data) v = rng.uniform(-half_width, half_width);
  p.b1.assign(dims.d2, 0.0);
  p.w2.resize(dims.d2);
  for (auto& v : p.w2) v = rng.next_gaussian();
  p.b2 = 0.0;
  return p;
}

BinarySample draw_binary(const ModelParams& p, Rng& rng, bool deterministic) {
  return {quantize(p.theta1, rng, deterministic), p.seed};
}

std::vector<double> project_input(const ModelParams& p, const std::vector<double>& x) {
  const int d = p.dims.d, d1 = p.dims.d1;
  if (static_cast<int>(x.size()) != d) throw std::invalid_argument("input dimension mismatch");
  std::vector<double> x1(d1, 0.0);
  const double inv_sqrt_d = 1.0 / std::sqrt(static_cast<double>(d));
  for (int k = 0; k < d; ++k) {
    const double xk = x[k] * inv_sqrt_d;
    const double* row = &p.w0.data[static_cast<std::size_t>(k) * d1];
    for (int i = 0; i < d1; ++i) x1[i] += row[i] * xk;
  }
  for (int i = 0; i < d1; ++i) x1[i] += p.b0[i];
  return x1;
}

namespace {

ForwardTrace forward_from_weights(const ModelParams& p, const Matrix& w1,
                                  const std::vector<double>& x) {
  require_unit_norm(x);
  const int d1 = p.dims.d1, d2 = p.dims.d2;
  ForwardTrace t;
  t.x1 = project_input(p, x);
  t.y1.assign(d2, 0.0);
  const double scale1 = std::sqrt(p.c / d1);
  for (int i = 0; i < d1; ++i) {
    const double xi = t.x1[i] * scale1;
    const double* row = &w1.data[static_cast<std::size_t>(i) * d2];
    for (int j = 0; j < d2; ++j) t.y1[j] += row[j] * xi;
  }
  for (int j = 0; j < d2; ++j) t.y1[j] += p.beta * p.b1[j];
  t.x2.resize(d2);
  for (int j = 0; j < d2; ++j) t.x2[j] = t.y1[j] > 0.0 ? t.y1[j] : 0.0;
  t.y = p.b2;
  double acc = 0.0;
  for (int j = 0; j < d2; ++j) acc += p.w2[j] * t.x2[j];
  t.y += acc / std::sqrt(static_cast<double>(d2));
  return t;
}

}  // namespace

ForwardTrace forward_binary(const ModelParams& p, const BinarySample& s,
                            const std::vector<double>& x) {
  if (s.w1.rows != static_cast<std::size_t>(p.dims.d1) ||
      s.w1.cols != static_cast<std::size_t>(p.dims.d2))
    throw std::invalid_argument("forward_binary: sample shape mismatch");
  return forward_from_weights(p, s.w1, x);
}

ForwardTrace forward_real(const ModelParams& p, const std::vector<double>& x) {
  return forward_from_weights(p, p.theta1.theta, x);
}

GoodInitReport check_good_init(const ModelParams& p, double tol) {
  const int d = p.dims.d, d1 = p.dims.d1;
  const int d2 = p.dims.d2;
  GoodInitReport rep;

  // Empirical Var[theta] as the condition-3 target.
  double var_theta = 0.0;
  for (double v : p.theta1.theta.data) var_theta += v * v;
  var_theta /= static_cast<double>(p.theta1.theta.data.size());

  for (int k = 0; k < d; ++k) {
    for (int kp = k; kp < d; ++kp) {
      double s2 = 0.0, s3 = 0.0;
      for (int i = 0; i < d1; ++i) {
        double a = p.w0(k, i), b = p.w0(kp, i);
        s2 += a * b;
        s3 += std::abs(a * b * b);
      }
      s2 /= d1;
      s3 /= d1;
      double target = (k == kp) ? 1.0 : 0.0;
      rep.cond1_max_residual = std::max(rep.cond1_max_residual, std::abs(s2 - target));
      rep.cond2_max = std::max(rep.cond2_max, s3);

      // Condition 3 over a handful of hidden columns keeps this O(d^2 d1).
      const int probe_cols = std::min(d2, 4);
      for (int j = 0; j < probe_cols; ++j) {
        double s = 0.0;
        for (int i = 0; i < d1; ++i) {
          double th = p.theta1.theta(i, j);
          s += p.w0(k, i) * p.w0(kp, i) * th * th;
        }
        s /= d1;
        rep.cond3_max_residual =
            std::max(rep.cond3_max_residual, std::abs(s - var_theta * target));
      }
    }
  }
  const double third_moment_bound = std::sqrt(8.0 / 3.14159265358979323846);
  rep.pass = rep.cond1_max_residual < tol && rep.cond2_max <= third_moment_bound + tol &&
             rep.cond3_max_residual < tol;
  return rep;
}

namespace {

void write_vec(std::ostream& os, const char* name, const std::vector<double>& v) {
  os << name << ' ' << v.size();
  char buf[40];
  for (double x : v) {
    std::snprintf(buf, sizeof(buf), " %a", x);
    os << buf;
  }
  os << '\n';
}

std::vector<double> read_vec(std::istream& is, const char* name) {
  std::string tag;
  std::size_t n;
  is >> tag >> n;
  if (tag != name) throw std::runtime_error("checkpoint: expected field " + std::string(name));
  std::vector<double> v(n);
  for (auto& x : v) {
    std::string tok;
    is >> tok;
    x = std::strtod(tok.c_str(), nullptr);
  }
  return v;
}

}  // namespace

void save_checkpoint(const ModelParams& p, const std::string& path) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp);
    if (!os) throw std::runtime_error("checkpoint: cannot open " + tmp);
    os << "bwnn-checkpoint v1\n";
    os << "dims " << p.dims.d << ' ' << p.dims.d1 << ' ' << p.dims.d2 << '\n';
    char buf[96];
    std::snprintf(buf, sizeof(buf), "scales %a %a %a\n", p.c, p.beta, p.b2);
    os << buf << "seed " << p.seed << '\n' << "rng " << kRngVersion << '\n';
    write_vec(os, "w0", p.w0.data);
    write_vec(os, "b0", p.b0);
    write_vec(os, "theta1", p.theta1.theta.data);
    write_vec(os, "b1", p.b1);
    write_vec(os, "w2", p.w2);
  }
  std::rename(tmp.c_str(), path.c_str());
}

ModelParams load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("checkpoint: cannot open " + path);
  std::string magic, version;
  is >> magic >> version;
  if (magic != "bwnn-checkpoint" || version != "v1")
    throw std::runtime_error("checkpoint: bad header");
  ModelParams p;
  std::string tag;
  is >> tag >> p.dims.d >> p.dims.d1 >> p.dims.d2;
  std::string c_s, beta_s, b2_s;
  is >> tag >> c_s >> beta_s >> b2_s;
  p.c = std::strtod(c_s.c_str(), nullptr);
  p.beta = std::strtod(beta_s.c_str(), nullptr);
  p.b2 = std::strtod(b2_s.c_str(), nullptr);
  std::string rng_version;
  is >> tag >> p.seed >> tag >> rng_version;
  p.w0 = Matrix(p.dims.d, p.dims.d1);
  p.w0.data = read_vec(is, "w0");
  p.b0 = read_vec(is, "b0");
  p.theta1.theta = Matrix(p.dims.d1, p.dims.d2);
  p.theta1.theta.data = read_vec(is, "theta1");
  p.b1 = read_vec(is, "b1");
  p.w2 = read_vec(is, "w2");
  return p;
}

}  // namespace bwnn
