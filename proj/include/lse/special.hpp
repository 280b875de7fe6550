#pragma once

// Modified Bessel function of the third kind K_nu(x) for real order and x > 0.
//
// The fractional order mu = nu - round(nu) in [-1/2, 1/2] is evaluated with
// Temme's series for x <= 2 and Steed's continued fraction (CF2) above, then
// raised to the requested order by the stable forward recurrence
//   K_{mu+1}(x) = K_{mu-1}(x) + (2 mu / x) K_mu(x).

#include <cmath>
#include <limits>
#include <numbers>

#include "lse/errors.hpp"

namespace lse::special {

namespace detail {

// 1/Gamma(1+x) = 1 + c1 x + c2 x^2 + ... (Abramowitz & Stegun 6.1.34, shifted).
inline constexpr double kInvGammaSeries[] = {
    1.0,
    0.5772156649015329,
    -0.6558780715202538,
    -0.0420026350340952,
    0.1665386113822915,
    -0.0421977345555443,
    -0.0096219715278770,
    0.0072189432466630,
    -0.0011651675918591,
};

// gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu), gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
inline void temme_gammas(double mu, double& gam1, double& gam2, double& gampl, double& gammi) {
  gampl = 1.0 / std::tgamma(1.0 + mu);
  gammi = 1.0 / std::tgamma(1.0 - mu);
  gam2 = 0.5 * (gammi + gampl);
  if (std::abs(mu) < 1e-3) {
    // odd coefficients only; the subtraction below would cancel
    const double mu2 = mu * mu;
    gam1 = -(kInvGammaSeries[1] + mu2 * (kInvGammaSeries[3] + mu2 * (kInvGammaSeries[5] + mu2 * kInvGammaSeries[7])));
  } else {
    gam1 = (gammi - gampl) / (2.0 * mu);
  }
}

// Returns (K_mu(x), K_{mu+1}(x)) scaled by exp(x), |mu| <= 1/2.
inline void bessel_k_fractional_scaled(double mu, double x, double& k_mu, double& k_mu1) {
  constexpr double eps = 1e-16;
  constexpr int max_iter = 100000;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  const double mu2 = mu * mu;
  if (x <= 2.0) {
    const double x2 = 0.5 * x;
    const double pimu = std::numbers::pi * mu;
    const double fact = std::abs(pimu) < eps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < eps ? 1.0 : std::sinh(e) / e;
    double gam1 = 0.0, gam2 = 0.0, gampl = 0.0, gammi = 0.0;
    temme_gammas(mu, gam1, gam2, gampl, gammi);
    double ff = fact * (gam1 * std::cosh(e) + gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / gampl;
    double q = 0.5 / (e * gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    int i = 1;
    for (; i <= max_iter; ++i) {
      ff = (i * ff + p + q) / (i * static_cast<double>(i) - mu2);
      c *= d / i;
      p /= (i - mu);
      q /= (i + mu);
      const double del = c * ff;
      sum += del;
      const double del1 = c * (p - i * ff);
      sum1 += del1;
      if (std::abs(del) < std::abs(sum) * eps) break;
    }
    if (i > max_iter) throw Error("bessel_k: Temme series did not converge");
    const double scale = std::exp(x);
    k_mu = sum * scale;
    k_mu1 = sum1 * xi2 * scale;
    return;
  }
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25 - mu2;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  int i = 2;
  for (; i <= max_iter; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < eps) break;
  }
  if (i > max_iter) throw Error("bessel_k: continued fraction did not converge");
  h = a1 * h;
  k_mu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
  k_mu1 = k_mu * (mu + x + 0.5 - h) * xi;
}

}  // namespace detail

/// exp(x) * K_nu(x). Finite for all x > 0 until the order overflows the recurrence.
inline double bessel_k_scaled(double nu, double x) {
  if (!(x > 0.0)) throw DomainError("bessel_k: argument must be positive");
  if (!std::isfinite(nu)) throw DomainError("bessel_k: order must be finite");
  nu = std::abs(nu);  // K_{-nu} = K_nu
  const int nl = static_cast<int>(nu + 0.5);
  const double mu = nu - nl;
  double k_mu = 0.0, k_mu1 = 0.0;
  detail::bessel_k_fractional_scaled(mu, x, k_mu, k_mu1);
  const double xi2 = 2.0 / x;
  for (int i = 1; i <= nl; ++i) {
    const double next = (mu + i) * xi2 * k_mu1 + k_mu;
    k_mu = k_mu1;
    k_mu1 = next;
  }
  return k_mu;
}

inline double bessel_k(double nu, double x) { return bessel_k_scaled(nu, x) * std::exp(-x); }

/// log K_nu(x), usable where K itself under/overflows.
inline double log_bessel_k(double nu, double x) { return std::log(bessel_k_scaled(nu, x)) - x; }

inline double log_gamma(double x) { return std::lgamma(x); }

}  // namespace lse::special
