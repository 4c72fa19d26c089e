#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace bwnn {

enum class QuadKind { GaussLegendre, GaussHermite, GaussJacobi };

// Nodes/weights in the rule's natural domain. Gauss-Hermite integrates against
// weight exp(-x^2) on the real line; Gauss-Jacobi against (1-t)^a (1+t)^b on [-1,1].
struct QuadratureRule {
  QuadKind kind;
  std::vector<double> nodes;
  std::vector<double> weights;

  double integrate(const auto& f) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(nodes[i]);
    return s;
  }
};

// Golub-Welsch: nodes/weights from the symmetric Jacobi matrix of the
// three-term recurrence. n capped at 4096.
QuadratureRule make_quadrature(QuadKind kind, int n, double alpha = 0.0, double beta = 0.0);

}  // namespace bwnn
