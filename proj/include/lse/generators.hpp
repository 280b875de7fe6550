#pragma once

// Catalog of elliptical density generators g_n(u), their normalizing
// constants c_n, radial moments, and the tail limit-ratio classifier used to
// gate the necessary conditions of the st and icx orders.

#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "lse/errors.hpp"
#include "lse/quadrature.hpp"
#include "lse/special.hpp"

namespace lse {

enum class GeneratorFamily { Cauchy, ExponentialPower, Laplace, Normal, Student, Logistic };

inline const char* to_string(GeneratorFamily family) {
  switch (family) {
    case GeneratorFamily::Cauchy: return "cauchy";
    case GeneratorFamily::ExponentialPower: return "exponential_power";
    case GeneratorFamily::Laplace: return "laplace";
    case GeneratorFamily::Normal: return "normal";
    case GeneratorFamily::Student: return "student";
    case GeneratorFamily::Logistic: return "logistic";
  }
  return "?";
}

/// A density generator from the catalog. Cauchy and Student carry the
/// dimension in their exponent, so evaluation always takes the dimension n.
class DensityGenerator {
 public:
  static DensityGenerator normal() { return DensityGenerator(GeneratorFamily::Normal, 0.0); }
  static DensityGenerator cauchy() { return DensityGenerator(GeneratorFamily::Cauchy, 0.0); }
  static DensityGenerator laplace() { return DensityGenerator(GeneratorFamily::Laplace, 0.0); }
  static DensityGenerator logistic() { return DensityGenerator(GeneratorFamily::Logistic, 0.0); }

  static DensityGenerator student(int m) {
    if (m < 1) throw ParameterError("student generator: m must be a positive integer");
    return DensityGenerator(GeneratorFamily::Student, static_cast<double>(m));
  }

  static DensityGenerator exponential_power(double s) {
    if (!(s > 1.0) || !std::isfinite(s)) throw ParameterError("exponential power generator: s must exceed 1");
    return DensityGenerator(GeneratorFamily::ExponentialPower, s);
  }

  GeneratorFamily family() const noexcept { return family_; }

  /// s for ExponentialPower, m for Student, 0 otherwise.
  double parameter() const noexcept { return parameter_; }

  int student_m() const noexcept {
    if (family_ == GeneratorFamily::Cauchy) return 1;
    return static_cast<int>(parameter_);
  }

  /// Families whose k-dimensional marginals are again generated by the same
  /// family (Normal, Student, Cauchy).
  bool is_projection_consistent() const noexcept {
    return family_ == GeneratorFamily::Normal || family_ == GeneratorFamily::Student ||
           family_ == GeneratorFamily::Cauchy;
  }

  std::string name() const {
    std::string out = to_string(family_);
    if (family_ == GeneratorFamily::Student) out += "(m=" + std::to_string(student_m()) + ")";
    if (family_ == GeneratorFamily::ExponentialPower) out += "(s=" + std::to_string(parameter_) + ")";
    return out;
  }

  /// log g_n(u), u >= 0.
  double log_value(double u, int n) const {
    if (!(u >= 0.0)) throw DomainError("density generator: u must be nonnegative");
    if (n < 1) throw UsageError("density generator: dimension must be positive");
    switch (family_) {
      case GeneratorFamily::Normal: return -0.5 * u;
      case GeneratorFamily::Cauchy: return -0.5 * (n + 1.0) * std::log1p(u);
      case GeneratorFamily::Student: return -0.5 * (n + parameter_) * std::log1p(u / parameter_);
      case GeneratorFamily::Laplace: return -std::sqrt(u);
      case GeneratorFamily::ExponentialPower: return -std::pow(u, 0.5 * parameter_) / parameter_;
      case GeneratorFamily::Logistic: return -u - 2.0 * std::log1p(std::exp(-u));
    }
    return 0.0;
  }

  double operator()(double u, int n) const { return std::exp(log_value(u, n)); }

  friend bool operator==(const DensityGenerator&, const DensityGenerator&) = default;

 private:
  DensityGenerator(GeneratorFamily family, double parameter) : family_(family), parameter_(parameter) {}

  GeneratorFamily family_;
  double parameter_;
};

inline double eval_generator(const DensityGenerator& gen, double u, int n = 1) { return gen(u, n); }

namespace detail {

// log of  int_0^inf z^{n/2 - 1 + k/2} g_n(z) dz  for the closed-form families;
// +inf when divergent.
inline double log_radial_integral_closed(const DensityGenerator& gen, int n, double k) {
  using special::log_gamma;
  const double a = 0.5 * n + 0.5 * k;  // exponent shift: z^{a-1}
  switch (gen.family()) {
    case GeneratorFamily::Normal:
      return log_gamma(a) + a * std::log(2.0);
    case GeneratorFamily::Cauchy:
    case GeneratorFamily::Student: {
      const double m = gen.student_m();
      // int z^{a-1} (1 + z/m)^{-(n+m)/2} dz = m^a B(a, (n+m)/2 - a)
      const double b = 0.5 * (n + m) - a;
      if (!(b > 0.0)) return std::numeric_limits<double>::infinity();
      return a * std::log(m) + log_gamma(a) + log_gamma(b) - log_gamma(a + b);
    }
    case GeneratorFamily::Laplace:
      // substitute z = v^2
      return std::log(2.0) + log_gamma(2.0 * a);
    case GeneratorFamily::ExponentialPower: {
      const double s = gen.parameter();
      // substitute z = v^{2/s}: (2/s) s^{2a/s} Gamma(2a/s)
      return std::log(2.0 / s) + (2.0 * a / s) * std::log(s) + log_gamma(2.0 * a / s);
    }
    case GeneratorFamily::Logistic:
      break;
  }
  throw UnsupportedError("no closed form radial integral for " + gen.name());
}

// int_0^inf r^{n-1+k} g_n(r^2) dr = 1/2 int_0^inf z^{(n+k)/2 - 1} g_n(z) dz
inline double radial_integral_numeric(const DensityGenerator& gen, int n, double k) {
  auto integrand = [&](double r) { return r > 0.0 ? std::pow(r, n - 1 + k) * gen(r * r, n) : (n - 1 + k == 0 ? gen(0.0, n) : 0.0); };
  const auto result = quadrature::integrate_half_line(integrand, 1e-12);
  if (!result.converged || !std::isfinite(result.value) || !(result.value > 0.0))
    throw NonIntegrableError("radial integral of " + gen.name() + " did not converge in dimension " + std::to_string(n));
  return 2.0 * result.value;
}

inline bool has_closed_form(const DensityGenerator& gen) { return gen.family() != GeneratorFamily::Logistic; }

}  // namespace detail

/// 0 < int_0^inf z^{n/2-1} g_n(z) dz < inf. Holds for every catalog family and n >= 1.
inline bool is_integrable(const DensityGenerator& gen, int n) {
  if (n < 1) return false;
  if (detail::has_closed_form(gen)) return std::isfinite(detail::log_radial_integral_closed(gen, n, 0.0));
  return true;  // logistic decays like exp(-z)
}

/// int_0^inf z^{n/2-1} g_n(z) dz
inline double radial_integral(const DensityGenerator& gen, int n) {
  if (!is_integrable(gen, n)) throw NonIntegrableError(gen.name() + " is not integrable in dimension " + std::to_string(n));
  if (detail::has_closed_form(gen)) return std::exp(detail::log_radial_integral_closed(gen, n, 0.0));
  return detail::radial_integral_numeric(gen, n, 0.0);
}

/// c_n = Gamma(n/2) pi^{-n/2} / int_0^inf z^{n/2-1} g_n(z) dz
inline double normalizing_constant(const DensityGenerator& gen, int n) {
  if (!is_integrable(gen, n)) throw NonIntegrableError(gen.name() + " is not integrable in dimension " + std::to_string(n));
  const double log_prefactor = special::log_gamma(0.5 * n) - 0.5 * n * std::log(std::numbers::pi);
  if (detail::has_closed_form(gen)) return std::exp(log_prefactor - detail::log_radial_integral_closed(gen, n, 0.0));
  return std::exp(log_prefactor) / detail::radial_integral_numeric(gen, n, 0.0);
}

/// E(R^k) for the generating variate R with density proportional to
/// r^{n-1} g_n(r^2). +inf when the moment diverges.
inline double radial_moment(const DensityGenerator& gen, int n, double k) {
  if (!is_integrable(gen, n)) throw NonIntegrableError(gen.name() + " is not integrable in dimension " + std::to_string(n));
  if (k == 0.0) return 1.0;
  if (detail::has_closed_form(gen)) {
    const double num = detail::log_radial_integral_closed(gen, n, k);
    if (!std::isfinite(num)) return std::numeric_limits<double>::infinity();
    return std::exp(num - detail::log_radial_integral_closed(gen, n, 0.0));
  }
  return detail::radial_integral_numeric(gen, n, k) / detail::radial_integral_numeric(gen, n, 0.0);
}

/// E(R^2); Cov(X) = E(R^2)/n * Sigma for X elliptical with this generator.
inline double radial_second_moment(const DensityGenerator& gen, int n) { return radial_moment(gen, n, 2.0); }

struct LimitRatioResult {
  double c_value = 0.0;  // may be +inf
  bool converged = false;
  bool satisfies_assumption1 = false;
  bool satisfies_assumption2 = false;
  bool assumption2_applicable = false;  // sigma1 > sigma2
  bool closed_form = false;
  double sigma1 = 0.0;
  double sigma2 = 0.0;
};

/// (sigma1/sigma2) g(t2^2)/g(t1^2) with t_i = (t - shift_i)/sigma_i for the
/// univariate generator, evaluated in log space. Returns 0 or +inf on
/// under/overflow.
inline double limit_ratio_at(const DensityGenerator& gen, double sigma1, double sigma2, double shift1, double shift2,
                             double t) {
  const double t1 = (t - shift1) / sigma1;
  const double t2 = (t - shift2) / sigma2;
  const double log_ratio = std::log(sigma1 / sigma2) + gen.log_value(t2 * t2, 1) - gen.log_value(t1 * t1, 1);
  return std::exp(log_ratio);
}

namespace detail {

inline void classify_assumptions(LimitRatioResult& r) {
  const bool distinct = r.sigma1 != r.sigma2;
  r.assumption2_applicable = r.sigma1 > r.sigma2;
  r.satisfies_assumption1 = r.converged && distinct && r.c_value != 1.0;
  r.satisfies_assumption2 = r.converged && r.assumption2_applicable && r.c_value >= 0.0 && r.c_value < 1.0;
}

// Returns true and writes the limit when the last three ladder values settle.
inline bool settle(const std::vector<double>& values, double& limit) {
  const std::size_t n = values.size();
  const double a = values[n - 3], b = values[n - 2], c = values[n - 1];
  if (a > 1e12 && b > 1e12 && c > 1e12) {
    limit = std::numeric_limits<double>::infinity();
    return true;
  }
  if (a < 1e-12 && b < 1e-12 && c < 1e-12) {
    limit = 0.0;
    return true;
  }
  if (!std::isfinite(c)) return false;
  const double scale = std::abs(c);
  if (std::abs(a - c) <= 0.01 * scale && std::abs(b - c) <= 0.01 * scale) {
    limit = c;
    return true;
  }
  return false;
}

inline void check_sigmas(double sigma1, double sigma2) {
  if (!(sigma1 > 0.0) || !(sigma2 > 0.0) || !std::isfinite(sigma1) || !std::isfinite(sigma2))
    throw DomainError("limit_ratio: scales must be positive and finite");
}

}  // namespace detail

/// Numeric limit of the tail ratio on the ladder t = +-10^k, k = 2..6.
inline LimitRatioResult limit_ratio_numeric(const DensityGenerator& gen, double sigma1, double sigma2, double shift1,
                                            double shift2) {
  detail::check_sigmas(sigma1, sigma2);
  LimitRatioResult result;
  result.sigma1 = sigma1;
  result.sigma2 = sigma2;
  double limits[2] = {0.0, 0.0};
  bool settled[2] = {false, false};
  for (int side = 0; side < 2; ++side) {
    const double sign = side == 0 ? 1.0 : -1.0;
    std::vector<double> ladder;
    for (int k = 2; k <= 6; ++k) ladder.push_back(limit_ratio_at(gen, sigma1, sigma2, shift1, shift2, sign * std::pow(10.0, k)));
    settled[side] = detail::settle(ladder, limits[side]);
  }
  if (settled[0] && settled[1]) {
    const double a = limits[0], b = limits[1];
    const bool same = (std::isinf(a) && std::isinf(b)) || (a == 0.0 && b == 0.0) ||
                      (std::isfinite(a) && std::isfinite(b) && std::abs(a - b) <= 0.01 * std::max(std::abs(a), std::abs(b)));
    if (same) {
      result.converged = true;
      result.c_value = a;
    }
  }
  if (!result.converged) result.c_value = std::numeric_limits<double>::quiet_NaN();
  detail::classify_assumptions(result);
  return result;
}

/// Tail limit lim_{t -> +-inf} (sigma1/sigma2) g(t2^2)/g(t1^2) and the two
/// assumption flags. Closed forms for every catalog family when the scales
/// differ; the numeric ladder otherwise.
inline LimitRatioResult limit_ratio(const DensityGenerator& gen, double sigma1, double sigma2, double shift1 = 0.0,
                                    double shift2 = 0.0) {
  detail::check_sigmas(sigma1, sigma2);
  if (sigma1 == sigma2) return limit_ratio_numeric(gen, sigma1, sigma2, shift1, shift2);
  LimitRatioResult result;
  result.sigma1 = sigma1;
  result.sigma2 = sigma2;
  result.closed_form = true;
  result.converged = true;
  switch (gen.family()) {
    case GeneratorFamily::Cauchy:
    case GeneratorFamily::Student:
      result.c_value = std::pow(sigma2 / sigma1, gen.student_m());
      break;
    case GeneratorFamily::Normal:
    case GeneratorFamily::Laplace:
    case GeneratorFamily::ExponentialPower:
    case GeneratorFamily::Logistic:
      result.c_value = sigma1 > sigma2 ? 0.0 : std::numeric_limits<double>::infinity();
      break;
  }
  detail::classify_assumptions(result);
  return result;
}

}  // namespace lse
