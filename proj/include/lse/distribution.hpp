#pragma once

// The LSE law  Y = mu + alpha(Z) X + beta(Z) delta  with X elliptical
// (location 0, scale Sigma, generator g) and Z ~ H independent of X.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <utility>
#include <vector>

#include "lse/errors.hpp"
#include "lse/generators.hpp"
#include "lse/mixing.hpp"
#include "lse/quadrature.hpp"
#include "lse/random.hpp"

namespace lse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

namespace detail {

// Inverse-CDF table for the generating variate R (density proportional to
// r^{n-1} g(r^2)) of families without an exact transform.
struct RadialTable {
  std::vector<double> r;
  std::vector<double> cdf;

  RadialTable(const DensityGenerator& gen, int n, int size = kGigTableSize) {
    auto log_density = [&](double x) { return x > 0.0 ? (n - 1) * std::log(x) + gen.log_value(x * x, n) : -std::numeric_limits<double>::infinity(); };
    double peak = -std::numeric_limits<double>::infinity();
    for (double x = 1e-3; x < 1e4; x *= 1.05) peak = std::max(peak, log_density(x));
    double upper = 1.0;
    while (log_density(upper) > peak - 40.0 || upper < 1.0) upper *= 1.25;
    r.resize(size);
    cdf.resize(size);
    const double dx = upper / (size - 1);
    auto density = [&](double x) { return std::exp(log_density(x) - peak); };
    double running = 0.0;
    double previous = density(0.0);
    r[0] = 0.0;
    cdf[0] = 0.0;
    for (int i = 1; i < size; ++i) {
      const double x = i * dx;
      const double current = density(x);
      running += dx * (previous + 4.0 * density(x - 0.5 * dx) + current) / 6.0;
      r[i] = x;
      cdf[i] = running;
      previous = current;
    }
    for (auto& c : cdf) c /= running;
    cdf.back() = 1.0;
  }

  double sample(double u) const {
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t hi = std::clamp<std::size_t>(it - cdf.begin(), 1, cdf.size() - 1);
    const std::size_t lo = hi - 1;
    const double span = cdf[hi] - cdf[lo];
    const double frac = span > 0.0 ? (u - cdf[lo]) / span : 0.5;
    return r[lo] + frac * (r[hi] - r[lo]);
  }
};

inline double max_abs(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace detail

struct MomentSummary {
  std::optional<Vector> mean;
  std::optional<Matrix> covariance;
  double e_beta = 0.0;
  double var_beta = 0.0;
  double e_alpha_sq = 0.0;
  double radial_factor = 0.0;  // E(R^2)/n, the covariance scalar of X
};

/// One draw of the latent variables shared by every member of a family:
/// the mixing value z, the radius r, and the direction u on the unit sphere.
struct LatentDraw {
  double z;
  double r;
  Vector u;
};

class LseDistribution {
 public:
  LseDistribution(Vector mu, Matrix sigma, Vector delta, DensityGenerator generator, AlphaBetaMap map,
                  MixingDistribution mixing)
      : mu_(std::move(mu)),
        sigma_(std::move(sigma)),
        delta_(std::move(delta)),
        generator_(generator),
        map_(map),
        mixing_(std::move(mixing)) {
    const Eigen::Index n = mu_.size();
    if (n < 1) throw UsageError("LSE distribution: dimension must be positive");
    if (sigma_.rows() != n || sigma_.cols() != n || delta_.size() != n)
      throw UsageError("LSE distribution: mu, sigma and delta dimensions disagree");
    if (!mu_.allFinite() || !sigma_.allFinite() || !delta_.allFinite())
      throw ParameterError("LSE distribution: parameters must be finite");
    const double asym = detail::max_abs(sigma_ - sigma_.transpose());
    if (asym > 1e-12 * std::max(1.0, detail::max_abs(sigma_)))
      throw ParameterError("LSE distribution: sigma is not symmetric");
    sigma_ = 0.5 * (sigma_ + sigma_.transpose());
    Eigen::LLT<Matrix> llt(sigma_);
    if (llt.info() != Eigen::Success || Eigen::SelfAdjointEigenSolver<Matrix>(sigma_, Eigen::EigenvaluesOnly).eigenvalues()(0) <= 0.0)
      throw ParameterError("LSE distribution: sigma is not positive definite");
    chol_ = llt.matrixL();
    log_det_ = 2.0 * chol_.diagonal().array().log().sum();
    log_c_n_ = std::log(normalizing_constant(generator_, static_cast<int>(n)));
    if (!radial_has_exact_sampler()) radial_table_ = std::make_shared<detail::RadialTable>(generator_, static_cast<int>(n));
  }

  static LseDistribution univariate(double mu, double sigma, double delta, DensityGenerator generator,
                                    AlphaBetaMap map, MixingDistribution mixing) {
    return LseDistribution(Vector::Constant(1, mu), Matrix::Constant(1, 1, sigma), Vector::Constant(1, delta),
                           generator, map, std::move(mixing));
  }

  int dim() const noexcept { return static_cast<int>(mu_.size()); }
  const Vector& mu() const noexcept { return mu_; }
  const Matrix& sigma() const noexcept { return sigma_; }
  const Vector& delta() const noexcept { return delta_; }
  const DensityGenerator& generator() const noexcept { return generator_; }
  const AlphaBetaMap& map() const noexcept { return map_; }
  const MixingDistribution& mixing() const noexcept { return mixing_; }

  /// Lower Cholesky factor L with L L' = Sigma.
  const Matrix& cholesky() const noexcept { return chol_; }
  double log_det_sigma() const noexcept { return log_det_; }

  /// True when the family (generator, map, mixing) matches.
  bool same_family(const LseDistribution& other) const {
    return generator_ == other.generator_ && map_ == other.map_ && mixing_ == other.mixing_;
  }

  /// Draws (z, r, u) in a fixed order so coupled samplers stay aligned.
  LatentDraw draw_latent(RandomStream& rng) const {
    LatentDraw draw{mixing_.sample(rng), sample_radius(rng), Vector(dim())};
    double norm_sq = 0.0;
    do {
      for (int i = 0; i < dim(); ++i) draw.u(i) = rng.normal();
      norm_sq = draw.u.squaredNorm();
    } while (norm_sq == 0.0);
    draw.u /= std::sqrt(norm_sq);
    return draw;
  }

  /// mu + alpha(z) r L u + beta(z) delta
  void realize(const LatentDraw& draw, Eigen::Ref<Vector> out) const {
    out = mu_ + (map_.alpha(draw.z) * draw.r) * (chol_ * draw.u);
    const auto b = map_.beta_exponent();
    if (b) out += map_.beta(draw.z) * delta_;
  }

 private:
  bool radial_has_exact_sampler() const noexcept { return generator_.family() != GeneratorFamily::Logistic; }

  double sample_radius(RandomStream& rng) const {
    const int n = dim();
    switch (generator_.family()) {
      case GeneratorFamily::Normal:
        return std::sqrt(rng.chi_square(n));
      case GeneratorFamily::Cauchy:
      case GeneratorFamily::Student: {
        const double m = generator_.student_m();
        const double num = rng.chi_square(n);
        const double den = rng.chi_square(m);
        return std::sqrt(m * num / den);
      }
      case GeneratorFamily::Laplace:
        return rng.gamma(n);
      case GeneratorFamily::ExponentialPower: {
        const double s = generator_.parameter();
        return std::pow(s * rng.gamma(n / s), 1.0 / s);
      }
      case GeneratorFamily::Logistic:
        break;
    }
    return radial_table_->sample(rng.uniform());
  }

  Vector mu_;
  Matrix sigma_;
  Vector delta_;
  DensityGenerator generator_;
  AlphaBetaMap map_;
  MixingDistribution mixing_;
  Matrix chol_;
  double log_det_ = 0.0;
  double log_c_n_ = 0.0;
  std::shared_ptr<const detail::RadialTable> radial_table_;

  friend double pdf(const LseDistribution&, const Vector&);
};

/// Density: integral over z of c_n alpha(z)^{-n} |Sigma|^{-1/2}
/// g(q(z) / alpha(z)^2), q(z) the Mahalanobis form of y - mu - beta(z) delta.
inline double pdf(const LseDistribution& d, const Vector& y) {
  const int n = d.dim();
  if (y.size() != n) throw UsageError("pdf: dimension mismatch");
  double total = 0.0;
  for (const auto& node : d.mixing().quadrature()) {
    const double a = d.map().alpha(node.z);
    const Vector centered = y - d.mu() - d.map().beta(node.z) * d.delta();
    const Vector whitened = d.cholesky().triangularView<Eigen::Lower>().solve(centered);
    const double u = whitened.squaredNorm() / (a * a);
    const double log_term = d.log_c_n_ - n * std::log(a) - 0.5 * d.log_det_ + d.generator().log_value(u, n);
    total += node.weight * std::exp(log_term);
  }
  return total;
}

inline double pdf(const LseDistribution& d, double y) { return pdf(d, Vector::Constant(1, y)); }

/// Characteristic function; normal generator only.
inline std::complex<double> char_fn(const LseDistribution& d, const Vector& t) {
  if (d.generator().family() != GeneratorFamily::Normal)
    throw UnsupportedError("char_fn: only the normal generator has a closed-form characteristic generator");
  if (t.size() != d.dim()) throw UsageError("char_fn: dimension mismatch");
  const double t_mu = t.dot(d.mu());
  const double t_delta = t.dot(d.delta());
  const double quad = t.dot(d.sigma() * t);
  std::complex<double> sum = 0.0;
  for (const auto& node : d.mixing().quadrature()) {
    const double a = d.map().alpha(node.z);
    const double phase = t_mu + d.map().beta(node.z) * t_delta;
    sum += node.weight * std::exp(-0.5 * a * a * quad) * std::complex<double>(std::cos(phase), std::sin(phase));
  }
  return sum;
}

/// beta(Z) delta vanishes identically.
inline bool is_sme(const LseDistribution& d) {
  return d.map().beta_kind == BetaKind::Zero || (d.delta().array() == 0.0).all();
}

/// Mean and covariance; entries are empty when the needed moments diverge.
inline MomentSummary moments(const LseDistribution& d) {
  MomentSummary s;
  const int n = d.dim();
  const bool skew = !is_sme(d);
  s.e_beta = beta_moment(d.mixing(), d.map(), 1.0);
  s.var_beta = beta_variance(d.mixing(), d.map());
  s.e_alpha_sq = alpha_moment(d.mixing(), d.map(), 2.0);
  s.radial_factor = radial_second_moment(d.generator(), n) / n;

  const double e_alpha = alpha_moment(d.mixing(), d.map(), 1.0);
  const double e_r = radial_moment(d.generator(), n, 1.0);
  const bool mean_ok = std::isfinite(e_alpha) && std::isfinite(e_r) && (!skew || std::isfinite(s.e_beta));
  if (!mean_ok) return s;
  s.mean = d.mu() + (skew ? s.e_beta : 0.0) * d.delta();

  const bool cov_ok = std::isfinite(s.e_alpha_sq) && std::isfinite(s.radial_factor) && (!skew || std::isfinite(s.var_beta));
  if (!cov_ok) return s;
  Matrix cov = (s.radial_factor * s.e_alpha_sq) * d.sigma();
  if (skew) cov += s.var_beta * d.delta() * d.delta().transpose();
  s.covariance = 0.5 * (cov + cov.transpose());
  return s;
}

/// count x n matrix of draws from a caller-owned stream.
inline Matrix sample(const LseDistribution& d, RandomStream& rng, std::size_t count) {
  if (count < 1) throw UsageError("sample: count must be at least 1");
  Matrix out(static_cast<Eigen::Index>(count), d.dim());
  Vector row(d.dim());
  for (std::size_t i = 0; i < count; ++i) {
    d.realize(d.draw_latent(rng), row);
    out.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  return out;
}

/// count x n draws using one derived stream per block of the root seed.
inline Matrix sample(const LseDistribution& d, std::uint64_t seed, std::size_t count) {
  if (count < 1) throw UsageError("sample: count must be at least 1");
  Matrix out(static_cast<Eigen::Index>(count), d.dim());
  for_each_block(count, seed, [&](RandomStream& rng, std::size_t begin, std::size_t end) {
    Vector row(d.dim());
    for (std::size_t i = begin; i < end; ++i) {
      d.realize(d.draw_latent(rng), row);
      out.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
  });
  return out;
}

/// Coupled draws of two members of the same family: every row of both
/// outputs is built from the same (z, r, u).
inline std::pair<Matrix, Matrix> sample_coupled(const LseDistribution& d1, const LseDistribution& d2, std::uint64_t seed,
                                                std::size_t count) {
  if (!d1.same_family(d2) || d1.dim() != d2.dim())
    throw IncomparableFamiliesError("sample_coupled: distributions do not share a family");
  if (count < 1) throw UsageError("sample: count must be at least 1");
  Matrix out1(static_cast<Eigen::Index>(count), d1.dim()), out2(static_cast<Eigen::Index>(count), d2.dim());
  for_each_block(count, seed, [&](RandomStream& rng, std::size_t begin, std::size_t end) {
    Vector row(d1.dim());
    for (std::size_t i = begin; i < end; ++i) {
      const LatentDraw draw = d1.draw_latent(rng);
      d1.realize(draw, row);
      out1.row(static_cast<Eigen::Index>(i)) = row.transpose();
      d2.realize(draw, row);
      out2.row(static_cast<Eigen::Index>(i)) = row.transpose();
    }
  });
  return {std::move(out1), std::move(out2)};
}

/// Law of B Y + b for B (m x n) of full row rank.
inline LseDistribution affine(const LseDistribution& d, const Matrix& B, const Vector& b) {
  if (B.cols() != d.dim() || B.rows() != b.size() || B.rows() < 1)
    throw UsageError("affine: dimension mismatch");
  if (B.rows() > B.cols()) throw SingularTransformError("affine: B must have rank equal to its row count");
  Eigen::JacobiSVD<Matrix> svd(B);
  const auto& sv = svd.singularValues();
  if (!(sv(sv.size() - 1) > 1e-10 * sv(0))) throw SingularTransformError("affine: B is rank deficient");
  Matrix sigma = B * d.sigma() * B.transpose();
  sigma = 0.5 * (sigma + sigma.transpose());
  return LseDistribution(B * d.mu() + b, sigma, B * d.delta(), d.generator(), d.map(), d.mixing());
}

/// Sub-vector law for 0-based component indices.
inline LseDistribution marginal(const LseDistribution& d, const std::vector<int>& indices) {
  if (indices.empty()) throw UsageError("marginal: no indices");
  std::vector<int> sorted = indices;
  std::sort(sorted.begin(), sorted.end());
  if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) throw UsageError("marginal: duplicate index");
  Matrix selector = Matrix::Zero(static_cast<Eigen::Index>(indices.size()), d.dim());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    if (indices[k] < 0 || indices[k] >= d.dim()) throw UsageError("marginal: index out of range");
    selector(static_cast<Eigen::Index>(k), indices[k]) = 1.0;
  }
  return affine(d, selector, Vector::Zero(static_cast<Eigen::Index>(indices.size())));
}

/// Univariate law of a'Y.
inline LseDistribution linear_functional(const LseDistribution& d, const Vector& a) {
  if (a.size() != d.dim()) throw UsageError("linear_functional: dimension mismatch");
  if ((a.array() == 0.0).all()) throw UsageError("linear_functional: zero direction");
  return LseDistribution::univariate(a.dot(d.mu()), a.dot(d.sigma() * a), a.dot(d.delta()), d.generator(), d.map(),
                                     d.mixing());
}

}  // namespace lse
