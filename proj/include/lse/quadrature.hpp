#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <vector>

#include "lse/errors.hpp"

namespace lse::quadrature {

struct Rule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

namespace detail {

inline Rule compute_gauss_legendre(int n) {
  Rule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = 0.0;
      for (int j = 1; j <= n; ++j) {
        const double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
      }
      dp = n * (x * p0 - p1) / (x * x - 1.0);
      const double dx = p0 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // recompute derivative at the converged root
    double p0 = 1.0;
    double p1 = 0.0;
    for (int j = 1; j <= n; ++j) {
      const double p2 = p1;
      p1 = p0;
      p0 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p2) / j;
    }
    dp = n * (x * p0 - p1) / (x * x - 1.0);
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1], ascending nodes. Cached per n.
inline const Rule& gauss_legendre(int n) {
  if (n < 1) throw UsageError("gauss_legendre: need at least one node");
  static std::mutex mutex;
  static std::map<int, Rule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it == cache.end()) it = cache.emplace(n, detail::compute_gauss_legendre(n)).first;
  return it->second;
}

/// The rule affinely mapped to [a, b].
inline Rule gauss_legendre(int n, double a, double b) {
  Rule rule = gauss_legendre(n);
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    rule.nodes[i] = mid + half * rule.nodes[i];
    rule.weights[i] *= half;
  }
  return rule;
}

template <class F>
double apply(const Rule& rule, double a, double b, F&& f) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (b + a);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) sum += rule.weights[i] * f(mid + half * rule.nodes[i]);
  return sum * half;
}

struct Result {
  double value = 0.0;
  double error = 0.0;
  bool converged = false;
};

/// Globally adaptive Gauss-Legendre: each panel is estimated with 10 and 20
/// nodes; the panel with the largest discrepancy is bisected until the total
/// discrepancy is below max(abs_tol, rel_tol * |value|).
template <class F>
Result integrate(F&& f, double a, double b, double rel_tol = 1e-12, double abs_tol = 0.0,
                 int max_panels = 4000) {
  if (!(b > a)) return {0.0, 0.0, true};
  const Rule& coarse = gauss_legendre(10);
  const Rule& fine = gauss_legendre(20);
  struct Panel {
    double a, b, value, error;
  };
  auto evaluate = [&](double lo, double hi) {
    const double v1 = apply(coarse, lo, hi, f);
    const double v2 = apply(fine, lo, hi, f);
    return Panel{lo, hi, v2, std::abs(v2 - v1)};
  };
  std::vector<Panel> panels{evaluate(a, b)};
  auto by_error = [](const Panel& x, const Panel& y) { return x.error < y.error; };
  Result result;
  while (true) {
    double value = 0.0;
    double error = 0.0;
    for (const auto& p : panels) {
      value += p.value;
      error += p.error;
    }
    result.value = value;
    result.error = error;
    if (!std::isfinite(value)) return result;
    if (error <= std::max(abs_tol, rel_tol * std::abs(value))) {
      result.converged = true;
      return result;
    }
    if (static_cast<int>(panels.size()) >= max_panels) return result;
    std::pop_heap(panels.begin(), panels.end(), by_error);
    const Panel worst = panels.back();
    panels.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // panel cannot be split further in floating point
      panels.push_back(Panel{worst.a, worst.b, worst.value, 0.0});
      std::push_heap(panels.begin(), panels.end(), by_error);
      continue;
    }
    panels.push_back(evaluate(worst.a, mid));
    std::push_heap(panels.begin(), panels.end(), by_error);
    panels.push_back(evaluate(mid, worst.b));
    std::push_heap(panels.begin(), panels.end(), by_error);
  }
}

/// Integral over [0, inf) of a nonnegative integrand that is eventually
/// decreasing. The upper limit U starts where the integrand falls below
/// 1e-12 of its sampled peak and is doubled until the value is stable.
template <class F>
Result integrate_half_line(F&& f, double rel_tol = 1e-11) {
  double peak = 0.0;
  for (double x = 1e-3; x < 1e6; x *= 1.25) peak = std::max(peak, std::abs(f(x)));
  if (peak == 0.0 || !std::isfinite(peak)) return {peak == 0.0 ? 0.0 : peak, 0.0, peak == 0.0};
  double upper = 1.0;
  while (upper < 1e12 && std::abs(f(upper)) > 1e-12 * peak) upper *= 2.0;
  Result current = integrate(f, 0.0, upper, rel_tol);
  for (int k = 0; k < 40; ++k) {
    const Result tail = integrate(f, upper, 2.0 * upper, rel_tol);
    const double total = current.value + tail.value;
    current.value = total;
    current.error += tail.error;
    upper *= 2.0;
    if (std::abs(tail.value) <= rel_tol * std::abs(total)) {
      current.converged = current.converged && tail.converged;
      return current;
    }
  }
  current.converged = false;
  return current;
}

}  // namespace lse::quadrature
