#pragma once

// Mixing laws H for the mixing variable Z, the alpha/beta power maps, and
// everything the rest of the library needs from them: quadrature rules,
// closed-form power moments, samplers and the range of beta over the support.

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lse/errors.hpp"
#include "lse/quadrature.hpp"
#include "lse/random.hpp"
#include "lse/special.hpp"

namespace lse {

inline constexpr int kMixingQuadratureNodes = 256;
inline constexpr int kGigTableSize = 4096;

struct Degenerate {
  double z0 = 1.0;
  friend bool operator==(const Degenerate&, const Degenerate&) = default;
};

/// Beta(lambda, 1) on (0, 1): density lambda z^{lambda-1}.
struct BetaLambdaOne {
  double lambda = 1.0;
  friend bool operator==(const BetaLambdaOne&, const BetaLambdaOne&) = default;
};

/// Generalized inverse Gaussian with density proportional to
/// w^{lambda-1} exp(-(chi/w + tau w)/2).
struct GeneralizedInverseGaussian {
  double lambda = 0.0;
  double chi = 1.0;
  double tau = 1.0;
  friend bool operator==(const GeneralizedInverseGaussian&, const GeneralizedInverseGaussian&) = default;
};

struct DiscreteWeighted {
  std::vector<std::pair<double, double>> atoms;  // (point, weight)
  friend bool operator==(const DiscreteWeighted&, const DiscreteWeighted&) = default;
};

using MixingLaw = std::variant<Degenerate, BetaLambdaOne, GeneralizedInverseGaussian, DiscreteWeighted>;

struct QuadratureNode {
  double z;
  double weight;
};

struct Support {
  bool finite = false;           // finite set of atoms
  double lower = 0.0;            // infimum
  double upper = 0.0;            // supremum (may be +inf)
  bool lower_attained = true;
  bool upper_attained = true;
  std::vector<double> points;    // atoms when finite
};

namespace detail {

inline void check_gig_domain(double lambda, double chi, double tau) {
  const bool finite = std::isfinite(lambda) && std::isfinite(chi) && std::isfinite(tau);
  bool ok = false;
  if (finite) {
    if (lambda < 0.0) ok = chi > 0.0 && tau >= 0.0;
    else if (lambda == 0.0) ok = chi > 0.0 && tau > 0.0;
    else ok = chi >= 0.0 && tau > 0.0;
  }
  if (!ok) throw ParameterError("GIG parameters outside the admissible domain (lambda=" + std::to_string(lambda) +
                                ", chi=" + std::to_string(chi) + ", tau=" + std::to_string(tau) + ")");
}

// log of the GIG normalizing constant, covering the gamma (chi = 0) and
// inverse-gamma (tau = 0) boundary cases.
inline double gig_log_norm(double lambda, double chi, double tau) {
  if (chi == 0.0) return lambda * std::log(0.5 * tau) - special::log_gamma(lambda);
  if (tau == 0.0) return -lambda * std::log(0.5 * chi) - special::log_gamma(-lambda);
  const double omega = std::sqrt(chi * tau);
  return 0.5 * lambda * std::log(tau / chi) - std::log(2.0) - special::log_bessel_k(lambda, omega);
}

inline double gig_log_kernel(double lambda, double chi, double tau, double w) {
  return (lambda - 1.0) * std::log(w) - 0.5 * (chi / w + tau * w);
}

}  // namespace detail

/// GIG density at w > 0.
inline double gig_density(double lambda, double chi, double tau, double w) {
  detail::check_gig_domain(lambda, chi, tau);
  if (!(w > 0.0)) throw DomainError("gig_density: w must be positive");
  return std::exp(detail::gig_log_norm(lambda, chi, tau) + detail::gig_log_kernel(lambda, chi, tau, w));
}

class MixingDistribution {
 public:
  static MixingDistribution degenerate(double z0) {
    if (!(z0 > 0.0) || !std::isfinite(z0)) throw ParameterError("degenerate mixing: z0 must be positive and finite");
    return MixingDistribution(Degenerate{z0});
  }

  static MixingDistribution beta_lambda_one(double lambda) {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ParameterError("beta(lambda, 1) mixing: lambda must be positive");
    return MixingDistribution(BetaLambdaOne{lambda});
  }

  static MixingDistribution gig(double lambda, double chi, double tau) {
    detail::check_gig_domain(lambda, chi, tau);
    return MixingDistribution(GeneralizedInverseGaussian{lambda, chi, tau});
  }

  static MixingDistribution discrete(std::vector<std::pair<double, double>> atoms) {
    if (atoms.empty()) throw ParameterError("discrete mixing: no atoms");
    double total = 0.0;
    for (const auto& [z, w] : atoms) {
      if (!(z > 0.0) || !std::isfinite(z)) throw ParameterError("discrete mixing: atoms must be positive and finite");
      if (!(w >= 0.0) || !std::isfinite(w)) throw ParameterError("discrete mixing: weights must be nonnegative");
      total += w;
    }
    if (std::abs(total - 1.0) > 1e-9) throw ParameterError("discrete mixing: weights must sum to 1");
    for (auto& atom : atoms) atom.second /= total;
    return MixingDistribution(DiscreteWeighted{std::move(atoms)});
  }

  const MixingLaw& law() const noexcept { return law_; }

  std::string kind_name() const {
    switch (law_.index()) {
      case 0: return "degenerate";
      case 1: return "beta";
      case 2: return "gig";
      default: return "discrete";
    }
  }

  Support support() const {
    Support s;
    if (auto d = std::get_if<Degenerate>(&law_)) {
      s.finite = true;
      s.lower = s.upper = d->z0;
      s.points = {d->z0};
    } else if (std::holds_alternative<BetaLambdaOne>(law_)) {
      s.lower = 0.0;
      s.upper = 1.0;
      s.lower_attained = s.upper_attained = false;
    } else if (std::holds_alternative<GeneralizedInverseGaussian>(law_)) {
      s.lower = 0.0;
      s.upper = std::numeric_limits<double>::infinity();
      s.lower_attained = s.upper_attained = false;
    } else {
      const auto& atoms = std::get<DiscreteWeighted>(law_).atoms;
      s.finite = true;
      for (const auto& atom : atoms)
        if (atom.second > 0.0) s.points.push_back(atom.first);
      std::sort(s.points.begin(), s.points.end());
      s.points.erase(std::unique(s.points.begin(), s.points.end()), s.points.end());
      s.lower = s.points.front();
      s.upper = s.points.back();
    }
    return s;
  }

  /// Nodes and weights (summing to 1) representing H.
  const std::vector<QuadratureNode>& quadrature() const noexcept { return cache_->nodes; }

  /// E(Z^p), +inf when divergent.
  double power_moment(double p) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (p == 0.0) return 1.0;
    if (auto d = std::get_if<Degenerate>(&law_)) return std::pow(d->z0, p);
    if (auto b = std::get_if<BetaLambdaOne>(&law_)) return b->lambda + p > 0.0 ? b->lambda / (b->lambda + p) : inf;
    if (auto g = std::get_if<GeneralizedInverseGaussian>(&law_)) {
      using special::log_gamma;
      if (g->chi == 0.0) {
        if (!(g->lambda + p > 0.0)) return inf;
        return std::exp(log_gamma(g->lambda + p) - log_gamma(g->lambda) + p * std::log(2.0 / g->tau));
      }
      if (g->tau == 0.0) {
        if (!(-g->lambda - p > 0.0)) return inf;
        return std::exp(p * std::log(0.5 * g->chi) + log_gamma(-g->lambda - p) - log_gamma(-g->lambda));
      }
      const double omega = std::sqrt(g->chi * g->tau);
      return std::exp(0.5 * p * std::log(g->chi / g->tau) + special::log_bessel_k(g->lambda + p, omega) -
                      special::log_bessel_k(g->lambda, omega));
    }
    double sum = 0.0;
    for (const auto& [z, w] : std::get<DiscreteWeighted>(law_).atoms) sum += w * std::pow(z, p);
    return sum;
  }

  double sample(RandomStream& rng) const {
    if (auto d = std::get_if<Degenerate>(&law_)) return d->z0;
    if (auto b = std::get_if<BetaLambdaOne>(&law_)) return std::pow(rng.uniform(), 1.0 / b->lambda);
    if (std::holds_alternative<GeneralizedInverseGaussian>(law_)) {
      const auto& cdf = cache_->table_cdf;
      const auto& x = cache_->table_x;
      const double u = rng.uniform();
      const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
      const std::size_t hi = std::clamp<std::size_t>(it - cdf.begin(), 1, cdf.size() - 1);
      const std::size_t lo = hi - 1;
      const double span = cdf[hi] - cdf[lo];
      const double frac = span > 0.0 ? (u - cdf[lo]) / span : 0.5;
      return std::exp(x[lo] + frac * (x[hi] - x[lo]));
    }
    const auto& cumulative = cache_->discrete_cumulative;
    const double u = rng.uniform();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const std::size_t index = std::min<std::size_t>(it - cumulative.begin(), cumulative.size() - 1);
    return std::get<DiscreteWeighted>(law_).atoms[index].first;
  }

  std::vector<double> sample(RandomStream& rng, std::size_t count) const {
    if (count < 1) throw UsageError("sample_mixing: count must be at least 1");
    std::vector<double> out(count);
    for (auto& z : out) z = sample(rng);
    return out;
  }

  friend bool operator==(const MixingDistribution& a, const MixingDistribution& b) { return a.law_ == b.law_; }

 private:
  struct Cache {
    std::vector<QuadratureNode> nodes;
    std::vector<double> table_x;  // log w grid for the GIG inverse CDF
    std::vector<double> table_cdf;
    std::vector<double> discrete_cumulative;
  };

  explicit MixingDistribution(MixingLaw law) : law_(std::move(law)) {
    auto cache = std::make_shared<Cache>();
    build(*cache);
    cache_ = std::move(cache);
  }

  void build(Cache& cache) const {
    if (auto d = std::get_if<Degenerate>(&law_)) {
      cache.nodes = {{d->z0, 1.0}};
    } else if (auto b = std::get_if<BetaLambdaOne>(&law_)) {
      build_beta(cache, b->lambda);
    } else if (auto g = std::get_if<GeneralizedInverseGaussian>(&law_)) {
      build_gig(cache, *g);
    } else {
      double running = 0.0;
      for (const auto& [z, w] : std::get<DiscreteWeighted>(law_).atoms) {
        cache.nodes.push_back({z, w});
        running += w;
        cache.discrete_cumulative.push_back(running);
      }
      cache.discrete_cumulative.back() = 1.0;
    }
  }

  static void normalize(std::vector<QuadratureNode>& nodes) {
    double total = 0.0;
    for (const auto& node : nodes) total += node.weight;
    for (auto& node : nodes) node.weight /= total;
  }

  static void build_beta(Cache& cache, double lambda) {
    const auto& rule = quadrature::gauss_legendre(kMixingQuadratureNodes);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double v = 0.5 * (rule.nodes[i] + 1.0);
      const double w = 0.5 * rule.weights[i];
      if (lambda >= 1.0) {
        cache.nodes.push_back({v, w * lambda * std::pow(v, lambda - 1.0)});
      } else {
        // z = v^{1/lambda} turns the singular density into the uniform one
        cache.nodes.push_back({std::pow(v, 1.0 / lambda), w});
      }
    }
    normalize(cache.nodes);
  }

  static void build_gig(Cache& cache, const GeneralizedInverseGaussian& g) {
    // In x = log w the log density lambda x - (chi e^{-x} + tau e^x)/2 is concave.
    auto log_density = [&](double x) { return g.lambda * x - 0.5 * (g.chi * std::exp(-x) + g.tau * std::exp(x)); };
    double mode_w;
    if (g.tau > 0.0) mode_w = (g.lambda + std::sqrt(g.lambda * g.lambda + g.chi * g.tau)) / g.tau;
    else mode_w = -g.chi / (2.0 * g.lambda);
    const double mode = std::log(mode_w);
    const double peak = log_density(mode);
    constexpr double drop = 45.0;
    auto find_edge = [&](double direction) {
      double step = 0.5;
      double x = mode;
      while (log_density(x + direction * step) > peak - drop && std::abs(x) < 680.0) {
        x += direction * step;
        step *= 1.5;
      }
      double lo = x, hi = x + direction * step;
      for (int i = 0; i < 80; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (log_density(mid) > peak - drop) lo = mid;
        else hi = mid;
      }
      return std::clamp(hi, -700.0, 700.0);
    };
    const double a = find_edge(-1.0);
    const double b = find_edge(1.0);

    const auto& rule = quadrature::gauss_legendre(kMixingQuadratureNodes);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double x = mid + half * rule.nodes[i];
      cache.nodes.push_back({std::exp(x), half * rule.weights[i] * std::exp(log_density(x) - peak)});
    }
    normalize(cache.nodes);

    // inverse-CDF table: Simpson-refined trapezoid on a uniform grid in x
    cache.table_x.resize(kGigTableSize);
    cache.table_cdf.resize(kGigTableSize);
    const double dx = (b - a) / (kGigTableSize - 1);
    double running = 0.0;
    double previous = std::exp(log_density(a) - peak);
    cache.table_x[0] = a;
    cache.table_cdf[0] = 0.0;
    for (int i = 1; i < kGigTableSize; ++i) {
      const double x = a + i * dx;
      const double current = std::exp(log_density(x) - peak);
      const double middle = std::exp(log_density(x - 0.5 * dx) - peak);
      running += dx * (previous + 4.0 * middle + current) / 6.0;
      cache.table_x[i] = x;
      cache.table_cdf[i] = running;
      previous = current;
    }
    for (auto& c : cache.table_cdf) c /= running;
    cache.table_cdf.back() = 1.0;
  }

  MixingLaw law_;
  std::shared_ptr<const Cache> cache_;
};

inline std::vector<double> sample_mixing(const MixingDistribution& mix, RandomStream& rng, std::size_t count) {
  return mix.sample(rng, count);
}

/// sum_i w_i f(z_i) over the quadrature representation of H.
template <class F>
double expectation(const MixingDistribution& mix, F&& f) {
  double sum = 0.0;
  for (const auto& node : mix.quadrature()) {
    const double value = f(node.z);
    if (!std::isfinite(value)) throw IntegrabilityError("expectation: integrand is not finite at z = " + std::to_string(node.z));
    sum += node.weight * value;
  }
  return sum;
}

enum class AlphaKind { One, SqrtZ, InvSqrtZ, PowerZ };
enum class BetaKind { Zero, Identity, InvZ, PowerZ };

/// alpha(z) and beta(z); every catalog kind is a power of z, so moments of
/// alpha and beta reduce to power moments of Z.
struct AlphaBetaMap {
  AlphaKind alpha_kind = AlphaKind::One;
  double alpha_power = 0.0;  // used by AlphaKind::PowerZ
  BetaKind beta_kind = BetaKind::Zero;
  double beta_power = 0.0;   // used by BetaKind::PowerZ

  static AlphaBetaMap make(AlphaKind a, BetaKind b, double alpha_p = 0.0, double beta_p = 0.0) {
    if (!std::isfinite(alpha_p) || !std::isfinite(beta_p)) throw ParameterError("alpha/beta map: powers must be finite");
    return AlphaBetaMap{a, alpha_p, b, beta_p};
  }

  double alpha_exponent() const noexcept {
    switch (alpha_kind) {
      case AlphaKind::One: return 0.0;
      case AlphaKind::SqrtZ: return 0.5;
      case AlphaKind::InvSqrtZ: return -0.5;
      case AlphaKind::PowerZ: return alpha_power;
    }
    return 0.0;
  }

  /// Exponent b with beta(z) = z^b; empty for BetaKind::Zero.
  std::optional<double> beta_exponent() const noexcept {
    switch (beta_kind) {
      case BetaKind::Zero: return std::nullopt;
      case BetaKind::Identity: return 1.0;
      case BetaKind::InvZ: return -1.0;
      case BetaKind::PowerZ: return beta_power;
    }
    return std::nullopt;
  }

  double alpha(double z) const { return std::pow(z, alpha_exponent()); }

  double beta(double z) const {
    const auto b = beta_exponent();
    return b ? std::pow(z, *b) : 0.0;
  }

  bool operator==(const AlphaBetaMap& other) const noexcept {
    return alpha_exponent() == other.alpha_exponent() && beta_exponent() == other.beta_exponent();
  }
};

inline const char* to_string(AlphaKind kind) {
  switch (kind) {
    case AlphaKind::One: return "one";
    case AlphaKind::SqrtZ: return "sqrt_z";
    case AlphaKind::InvSqrtZ: return "inv_sqrt_z";
    case AlphaKind::PowerZ: return "power_z";
  }
  return "?";
}

inline const char* to_string(BetaKind kind) {
  switch (kind) {
    case BetaKind::Zero: return "zero";
    case BetaKind::Identity: return "identity";
    case BetaKind::InvZ: return "inv_z";
    case BetaKind::PowerZ: return "power_z";
  }
  return "?";
}

struct BetaRange {
  double inf_beta;
  double sup_beta;
};

/// Infimum and supremum of beta over the support of H.
inline BetaRange beta_range(const MixingDistribution& mix, const AlphaBetaMap& map) {
  const auto b = map.beta_exponent();
  if (!b) return {0.0, 0.0};
  const Support s = mix.support();
  if (s.finite) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (double z : s.points) {
      lo = std::min(lo, map.beta(z));
      hi = std::max(hi, map.beta(z));
    }
    return {lo, hi};
  }
  if (*b == 0.0) return {1.0, 1.0};
  const double at_lower = s.lower == 0.0 ? (*b > 0.0 ? 0.0 : std::numeric_limits<double>::infinity()) : map.beta(s.lower);
  const double at_upper = std::isinf(s.upper) ? (*b > 0.0 ? std::numeric_limits<double>::infinity() : 0.0) : map.beta(s.upper);
  return {std::min(at_lower, at_upper), std::max(at_lower, at_upper)};
}

/// E alpha(Z)^k.
inline double alpha_moment(const MixingDistribution& mix, const AlphaBetaMap& map, double k) {
  return mix.power_moment(k * map.alpha_exponent());
}

/// E beta(Z)^k, 0 for BetaKind::Zero.
inline double beta_moment(const MixingDistribution& mix, const AlphaBetaMap& map, double k) {
  const auto b = map.beta_exponent();
  if (!b) return 0.0;
  return mix.power_moment(k * *b);
}

/// Var beta(Z); +inf when E beta^2 diverges.
inline double beta_variance(const MixingDistribution& mix, const AlphaBetaMap& map) {
  const double m1 = beta_moment(mix, map, 1.0);
  const double m2 = beta_moment(mix, map, 2.0);
  if (!std::isfinite(m2)) return std::numeric_limits<double>::infinity();
  return std::max(0.0, m2 - m1 * m1);
}

}  // namespace lse
