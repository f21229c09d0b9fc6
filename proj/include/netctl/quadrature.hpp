#pragma once

#include <vector>

namespace netctl {

/// Gauss-Legendre rule with nodes mapped onto [t0, tf]. Reference weights
/// sum to 2; the rule integrates polynomials of degree <= 2L-1 exactly.
struct QuadratureRule {
  int order = 0;                 // L
  std::vector<double> nodes;     // reference nodes in (-1, 1), ascending
  std::vector<double> weights;   // reference weights
  double t0 = 0.0;
  double tf = 1.0;

  double point(std::size_t i) const { return 0.5 * (tf - t0) * nodes[i] + 0.5 * (tf + t0); }
  std::vector<double> points() const;
  double half_length() const { return 0.5 * (tf - t0); }
};

inline constexpr int kDefaultQuadratureOrder = 50;

/// Newton iteration on the Legendre recurrence from Chebyshev starting points.
QuadratureRule gauss_legendre(int order, double t0, double tf);

}  // namespace netctl
