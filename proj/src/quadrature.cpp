#include "netctl/quadrature.hpp"

#include <cmath>
#include <numbers>

#include "netctl/error.hpp"

namespace netctl {

std::vector<double> QuadratureRule::points() const {
  std::vector<double> out(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) out[i] = point(i);
  return out;
}

QuadratureRule gauss_legendre(int order, double t0, double tf) {
  if (order < 1) throw ConfigError("quadrature order must be positive");
  if (!(tf > t0)) throw ConfigError("quadrature interval must have positive length");
  QuadratureRule rule;
  rule.order = order;
  rule.t0 = t0;
  rule.tf = tf;
  rule.nodes.assign(static_cast<std::size_t>(order), 0.0);
  rule.weights.assign(static_cast<std::size_t>(order), 0.0);
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= order; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      // P_L(x) = p1, P_{L-1}(x) = p0.
      dp = order * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[order - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[order - 1 - i] = w;
  }
  return rule;
}

}  // namespace netctl
