#pragma once

// Gauss-Legendre rules, internal to the library.

#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

namespace nodal::detail {

/// Nodes and weights of the n-point rule on [-1, 1] (Newton on P_n).
inline std::pair<std::vector<double>, std::vector<double>> gauss_legendre(int n) {
  std::vector<double> nodes(n), weights(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
  }
  return {nodes, weights};
}

/// Integrates f over [a, b] with `panels` composite panels of an `order`-point rule.
template <class F>
double integrate(F&& f, double a, double b, int panels = 1, int order = 20) {
  static thread_local std::pair<std::vector<double>, std::vector<double>> rule;
  if (static_cast<int>(rule.first.size()) != order) rule = gauss_legendre(order);
  const double width = (b - a) / panels;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double lo = a + p * width;
    const double mid = lo + 0.5 * width;
    double sum = 0.0;
    for (int k = 0; k < order; ++k) sum += rule.second[k] * f(mid + 0.5 * width * rule.first[k]);
    total += 0.5 * width * sum;
  }
  return total;
}

}  // namespace nodal::detail
