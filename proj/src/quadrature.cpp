#include "bwnn/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace bwnn {
namespace {

// Implicit-shift QL for a symmetric tridiagonal matrix, accumulating only the
// first row of the eigenvector matrix (all that Golub-Welsch needs).
// d: diagonal, e: subdiagonal (e[0..n-2]), z: first-row accumulator.
void tql_first_row(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z) {
  const int n = static_cast<int>(d.size());
  e.push_back(0.0);
  for (int l = 0; l < n; ++l) {
    int iter = 0;
    int m;
    do {
      for (m = l; m < n - 1; ++m) {
        double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= 1e-300 + 2.3e-16 * dd) break;
      }
      if (m != l) {
        if (++iter > 60) throw std::runtime_error("quadrature: eigensolver failed to converge");
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0, c = 1.0, p = 0.0;
        for (int i = m - 1; i >= l; --i) {
          double f = s * e[i];
          double b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == 0.0) {
            d[i + 1] -= p;
            e[m] = 0.0;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + 2.0 * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          f = z[i + 1];
          z[i + 1] = s * z[i] + c * f;
          z[i] = c * z[i] - s * f;
        }
        if (r == 0.0 && m - 1 >= l) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }
  e.pop_back();
}

}  // namespace

QuadratureRule make_quadrature(QuadKind kind, int n, double alpha, double beta) {
  if (n < 2) throw std::invalid_argument("quadrature: n must be >= 2");
  if (n > 4096) throw std::invalid_argument("quadrature: n > 4096 rejected");
  if (kind == QuadKind::GaussJacobi && (alpha <= -1.0 || beta <= -1.0))
    throw std::invalid_argument("quadrature: Jacobi exponents must be > -1");

  std::vector<double> diag(n, 0.0), off(n - 1, 0.0);
  double mu0 = 0.0;

  switch (kind) {
    case QuadKind::GaussLegendre:
      mu0 = 2.0;
      for (int k = 1; k < n; ++k) off[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
      break;
    case QuadKind::GaussHermite:
      mu0 = std::sqrt(3.14159265358979323846264338327950288);
      for (int k = 1; k < n; ++k) off[k - 1] = std::sqrt(0.5 * k);
      break;
    case QuadKind::GaussJacobi: {
      const double ab = alpha + beta;
      mu0 = std::exp((ab + 1.0) * std::log(2.0) + std::lgamma(alpha + 1.0) +
                     std::lgamma(beta + 1.0) - std::lgamma(ab + 2.0));
      diag[0] = (beta - alpha) / (ab + 2.0);
      for (int k = 1; k < n; ++k) {
        double q = 2.0 * k + ab;
        diag[k] = (beta * beta - alpha * alpha) / (q * (q + 2.0));
        double bk;
        if (k == 1)
          bk = 4.0 * (1.0 + alpha) * (1.0 + beta) / ((ab + 2.0) * (ab + 2.0) * (ab + 3.0));
        else
          bk = 4.0 * k * (k + alpha) * (k + beta) * (k + ab) /
               (q * q * (q + 1.0) * (q - 1.0));
        off[k - 1] = std::sqrt(bk);
      }
      break;
    }
  }

  std::vector<double> z(n, 0.0);
  z[0] = 1.0;
  tql_first_row(diag, off, z);

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) { return diag[a] < diag[b]; });

  QuadratureRule rule;
  rule.kind = kind;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < n; ++i) {
    rule.nodes[i] = diag[order[i]];
    rule.weights[i] = mu0 * z[order[i]] * z[order[i]];
  }
  return rule;
}

}  // namespace bwnn
