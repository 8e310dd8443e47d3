#include "tunnellab/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace tunnellab {

namespace {

QuadratureRule compute_gauss_legendre(int order) {
  if (order < 1) {
    throw std::invalid_argument("gauss_legendre_rule: order must be >= 1");
  }
  QuadratureRule rule;
  rule.points.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));

  const int n = order;
  for (int i = 0; i < (n + 1) / 2; ++i) {
    // Chebyshev-like initial guess, then Newton on P_n(x) = 0.
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double step = p1 / dp;
      x -= step;
      if (std::abs(step) < 1e-15) break;
    }
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.points[static_cast<std::size_t>(i)] = -x;
    rule.points[static_cast<std::size_t>(n - 1 - i)] = x;
    rule.weights[static_cast<std::size_t>(i)] = w;
    rule.weights[static_cast<std::size_t>(n - 1 - i)] = w;
  }
  if (n % 2 == 1) rule.points[static_cast<std::size_t>(n / 2)] = 0.0;
  return rule;
}

}  // namespace

const QuadratureRule& gauss_legendre_rule(int order) {
  static std::mutex mutex;
  static std::map<int, QuadratureRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) {
    it = cache.emplace(order, compute_gauss_legendre(order)).first;
  }
  return it->second;
}

void append_gauss_panel(int order, double lo, double hi,
                        std::vector<double>& nodes,
                        std::vector<double>& weights) {
  const QuadratureRule& rule = gauss_legendre_rule(order);
  const double mid = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  for (std::size_t i = 0; i < rule.points.size(); ++i) {
    nodes.push_back(mid + half * rule.points[i]);
    weights.push_back(half * rule.weights[i]);
  }
}

double weighted_sum(std::span<const double> weights,
                    std::span<const double> values) {
  if (weights.size() != values.size()) {
    throw std::invalid_argument("weighted_sum: size mismatch");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    acc += weights[i] * values[i];
  }
  return acc;
}

}  // namespace tunnellab
