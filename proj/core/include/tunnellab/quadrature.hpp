#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace tunnellab {

/// Gauss-Legendre rule on the reference interval [-1, 1].
struct QuadratureRule {
  std::vector<double> points;
  std::vector<double> weights;
};

/// Nodes and weights for an n-point Gauss-Legendre rule, computed by Newton
/// iteration on the Legendre recurrence and cached per order. Thread-safe.
const QuadratureRule& gauss_legendre_rule(int order);

/// Map an order-p rule onto [lo, hi] and append the nodes/weights.
void append_gauss_panel(int order, double lo, double hi,
                        std::vector<double>& nodes,
                        std::vector<double>& weights);

/// Integrate pre-sampled values against weights in fixed left-to-right
/// order (bit-reproducible regardless of how the samples were produced).
double weighted_sum(std::span<const double> weights,
                    std::span<const double> values);

}  // namespace tunnellab
