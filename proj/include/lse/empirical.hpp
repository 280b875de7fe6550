#pragma once

// Monte Carlo dominance checks: survival curves, stop-loss transforms,
// convex test functionals and upper orthant probabilities.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lse/distribution.hpp"
#include "lse/errors.hpp"

namespace lse {

inline constexpr std::size_t kMinDominanceSamples = 10000;
inline constexpr int kDefaultGridPoints = 41;

struct McConfig {
  std::size_t sample_count = 1000000;
  std::uint64_t seed = 0;
  std::vector<double> grid;  // empty: pooled 0.1%-99.9% quantile range
  double confidence_multiplier = 3.0;
  bool coupled = true;       // common random numbers for the two laws
};

struct DominanceResult {
  bool pass = true;
  double max_violation = 0.0;             // largest estimate of E f(Y1) - E f(Y2), clipped at 0
  std::optional<double> violation_point;  // grid point / functional index of the worst failing exceedance
  double standard_error_at_violation = 0.0;
  int exceedances = 0;                    // points beyond the band
  std::string functional;                 // which test function failed (cx, orthant)
};

struct SurvivalPoint {
  double t;
  double survival;
  double standard_error;
};

struct StopLoss {
  double estimate;
  double standard_error;
};

struct CurvePoint {
  double t;
  double survival_1, survival_2;
  double se_1, se_2;
  double stoploss_1, stoploss_2;
};

namespace detail {

inline void check_config(const McConfig& cfg) {
  if (cfg.sample_count < kMinDominanceSamples)
    throw UsageError("Monte Carlo: sample_count must be at least " + std::to_string(kMinDominanceSamples));
  if (!(cfg.confidence_multiplier > 0.0)) throw UsageError("Monte Carlo: confidence_multiplier must be positive");
  if (!std::is_sorted(cfg.grid.begin(), cfg.grid.end())) throw UsageError("Monte Carlo: grid must be sorted");
  for (double t : cfg.grid)
    if (!std::isfinite(t)) throw UsageError("Monte Carlo: grid points must be finite");
}

inline void require_univariate(const LseDistribution& d1, const LseDistribution& d2, const char* who) {
  if (d1.dim() != 1 || d2.dim() != 1) throw UsageError(std::string(who) + ": distributions must be univariate");
}

// Mean and standard error of a per-draw statistic.
struct Running {
  double sum = 0.0, sum_sq = 0.0;
  std::size_t n = 0;
  void add(double v) {
    sum += v;
    sum_sq += v * v;
    ++n;
  }
  double mean() const { return sum / static_cast<double>(n); }
  double se() const {
    const double m = mean();
    const double var = std::max(0.0, sum_sq / static_cast<double>(n) - m * m);
    return std::sqrt(var * static_cast<double>(n) / static_cast<double>(n - 1) / static_cast<double>(n));
  }
};

inline std::pair<Matrix, Matrix> draw_pair(const LseDistribution& d1, const LseDistribution& d2, const McConfig& cfg) {
  if (cfg.coupled) return sample_coupled(d1, d2, cfg.seed, cfg.sample_count);
  if (!d1.same_family(d2) || d1.dim() != d2.dim())
    throw IncomparableFamiliesError("Monte Carlo: distributions do not share a family");
  std::uint64_t s = cfg.seed;
  const std::uint64_t second = splitmix64(s);
  return {sample(d1, cfg.seed, cfg.sample_count), sample(d2, second, cfg.sample_count)};
}

// Per-point exceedance z-scores for differences that should be <= 0.
struct Band {
  std::vector<double> diff, se;
};

// Dominance fails when at least two adjacent points exceed the band.
inline DominanceResult judge(const Band& band, const std::vector<double>& points, double k, bool adjacent) {
  DominanceResult r;
  double worst_z = -std::numeric_limits<double>::infinity();
  std::size_t worst = 0;
  std::vector<bool> over(band.diff.size(), false);
  for (std::size_t i = 0; i < band.diff.size(); ++i) {
    const double d = band.diff[i], s = band.se[i];
    over[i] = d > k * s;
    if (over[i]) ++r.exceedances;
    if (d > r.max_violation) r.max_violation = d;
    const double z = s > 0.0 ? d / s : (d > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
    if (z > worst_z) {
      worst_z = z;
      worst = i;
    }
  }
  bool fail = false;
  if (adjacent) {
    for (std::size_t i = 0; i + 1 < over.size(); ++i) fail |= over[i] && over[i + 1];
    if (over.size() == 1) fail = over[0];
  } else {
    fail = r.exceedances > 0;
  }
  r.pass = !fail;
  if (!band.diff.empty()) {
    r.standard_error_at_violation = band.se[worst];
    if (fail) r.violation_point = points[worst];
  }
  return r;
}

inline double quantile_sorted(const std::vector<double>& sorted, double p) {
  const double pos = p * static_cast<double>(sorted.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace detail

/// Fraction of draws above each t with binomial standard error.
inline std::vector<SurvivalPoint> empirical_survival(const Vector& samples, const std::vector<double>& grid) {
  if (samples.size() == 0) throw UsageError("empirical_survival: no samples");
  const double n = static_cast<double>(samples.size());
  std::vector<SurvivalPoint> out;
  out.reserve(grid.size());
  for (double t : grid) {
    const double p = static_cast<double>((samples.array() > t).count()) / n;
    out.push_back({t, p, std::sqrt(p * (1.0 - p) / n)});
  }
  return out;
}

/// E (X - t)_+ with its sample standard error.
inline StopLoss stop_loss(const Vector& samples, double t) {
  if (samples.size() < 2) throw UsageError("stop_loss: need at least two samples");
  detail::Running acc;
  for (Eigen::Index i = 0; i < samples.size(); ++i) acc.add(std::max(samples(i) - t, 0.0));
  return {acc.mean(), acc.se()};
}

/// 41 equally spaced points over the pooled 0.1%-99.9% quantile range.
inline std::vector<double> default_grid(const Vector& x1, const Vector& x2, int points = kDefaultGridPoints) {
  std::vector<double> pooled(x1.data(), x1.data() + x1.size());
  pooled.insert(pooled.end(), x2.data(), x2.data() + x2.size());
  if (pooled.empty()) throw UsageError("default_grid: no samples");
  std::sort(pooled.begin(), pooled.end());
  const double lo = detail::quantile_sorted(pooled, 0.001), hi = detail::quantile_sorted(pooled, 0.999);
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) grid[static_cast<std::size_t>(i)] = points == 1 ? lo : lo + (hi - lo) * i / (points - 1);
  return grid;
}

/// Survival and stop-loss curves of two samples on a grid.
inline std::vector<CurvePoint> curve_rows(const Vector& x1, const Vector& x2, const std::vector<double>& grid) {
  std::vector<CurvePoint> rows;
  const auto s1 = empirical_survival(x1, grid), s2 = empirical_survival(x2, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    rows.push_back({grid[i], s1[i].survival, s2[i].survival, s1[i].standard_error, s2[i].standard_error,
                    stop_loss(x1, grid[i]).estimate, stop_loss(x2, grid[i]).estimate});
  return rows;
}

namespace detail {

// Paired (or independent) band for the difference of per-draw statistics f1 - f2.
template <class Stat>
Band band_over_grid(const Vector& x1, const Vector& x2, const std::vector<double>& grid, bool coupled, Stat&& stat) {
  Band band;
  for (double t : grid) {
    if (coupled) {
      Running d;
      for (Eigen::Index i = 0; i < x1.size(); ++i) d.add(stat(x1(i), t) - stat(x2(i), t));
      band.diff.push_back(d.mean());
      band.se.push_back(d.se());
    } else {
      Running a, b;
      for (Eigen::Index i = 0; i < x1.size(); ++i) a.add(stat(x1(i), t));
      for (Eigen::Index i = 0; i < x2.size(); ++i) b.add(stat(x2(i), t));
      band.diff.push_back(a.mean() - b.mean());
      band.se.push_back(std::hypot(a.se(), b.se()));
    }
  }
  return band;
}

template <class Stat>
DominanceResult verify_univariate(const LseDistribution& d1, const LseDistribution& d2, const McConfig& cfg,
                                  std::vector<CurvePoint>* curves, Stat&& stat) {
  check_config(cfg);
  auto [m1, m2] = draw_pair(d1, d2, cfg);
  const Vector x1 = m1.col(0), x2 = m2.col(0);
  const std::vector<double> grid = cfg.grid.empty() ? default_grid(x1, x2) : cfg.grid;
  if (curves) *curves = curve_rows(x1, x2, grid);
  return judge(band_over_grid(x1, x2, grid, cfg.coupled, stat), grid, cfg.confidence_multiplier, true);
}

}  // namespace detail

/// Survival dominance: P(Y1 > t) <= P(Y2 > t) within the band at every grid point.
inline DominanceResult verify_st(const LseDistribution& d1, const LseDistribution& d2, const McConfig& cfg,
                                 std::vector<CurvePoint>* curves = nullptr) {
  detail::require_univariate(d1, d2, "verify_st");
  return detail::verify_univariate(d1, d2, cfg, curves, [](double x, double t) { return x > t ? 1.0 : 0.0; });
}

/// Stop-loss dominance: E(Y1 - t)_+ <= E(Y2 - t)_+ within the band.
inline DominanceResult verify_icx(const LseDistribution& d1, const LseDistribution& d2, const McConfig& cfg,
                                  std::vector<CurvePoint>* curves = nullptr) {
  detail::require_univariate(d1, d2, "verify_icx");
  return detail::verify_univariate(d1, d2, cfg, curves, [](double x, double t) { return std::max(x - t, 0.0); });
}

/// Curves only, for plotting.
inline std::vector<CurvePoint> curves(const LseDistribution& d1, const LseDistribution& d2, const McConfig& cfg) {
  detail::require_univariate(d1, d2, "curves");
  detail::check_config(cfg);
  auto [m1, m2] = detail::draw_pair(d1, d2, cfg);
  const Vector x1 = m1.col(0), x2 = m2.col(0);
  return curve_rows(x1, x2, cfg.grid.empty() ? default_grid(x1, x2) : cfg.grid);
}

/// Convex test functionals: (a'x)^2 and |a'x| per direction, max_i x_i,
/// sum_i (x_i - c)_+ over the grid (or c = 0), and both signs of each x_i.
inline DominanceResult verify_cx(const LseDistribution& d1, const LseDistribution& d2, const McConfig& cfg,
                                 const std::vector<Vector>& directions) {
  detail::check_config(cfg);
  for (const auto& a : directions)
    if (a.size() != d1.dim()) throw UsageError("verify_cx: direction dimension mismatch");
  auto [m1, m2] = detail::draw_pair(d1, d2, cfg);
  const int n = d1.dim();

  std::vector<std::pair<std::string, std::function<double(const Eigen::Ref<const Vector>&)>>> fs;
  for (int i = 0; i < n; ++i) {
    fs.emplace_back("x_" + std::to_string(i), [i](const Eigen::Ref<const Vector>& x) { return x(i); });
    fs.emplace_back("-x_" + std::to_string(i), [i](const Eigen::Ref<const Vector>& x) { return -x(i); });
  }
  for (std::size_t k = 0; k < directions.size(); ++k) {
    const Vector a = directions[k];
    fs.emplace_back("square_" + std::to_string(k), [a](const Eigen::Ref<const Vector>& x) {
      const double v = a.dot(x);
      return v * v;
    });
    fs.emplace_back("abs_" + std::to_string(k), [a](const Eigen::Ref<const Vector>& x) { return std::abs(a.dot(x)); });
  }
  fs.emplace_back("max", [](const Eigen::Ref<const Vector>& x) { return x.maxCoeff(); });
  const std::vector<double> cs = cfg.grid.empty() ? std::vector<double>{0.0} : cfg.grid;
  for (double c : cs)
    fs.emplace_back("excess_" + std::to_string(c),
                    [c](const Eigen::Ref<const Vector>& x) { return (x.array() - c).max(0.0).sum(); });

  detail::Band band;
  std::vector<double> index;
  for (std::size_t f = 0; f < fs.size(); ++f) {
    const auto& fn = fs[f].second;
    if (cfg.coupled) {
      detail::Running d;
      for (Eigen::Index i = 0; i < m1.rows(); ++i) d.add(fn(m1.row(i).transpose()) - fn(m2.row(i).transpose()));
      band.diff.push_back(d.mean());
      band.se.push_back(d.se());
    } else {
      detail::Running a, b;
      for (Eigen::Index i = 0; i < m1.rows(); ++i) a.add(fn(m1.row(i).transpose()));
      for (Eigen::Index i = 0; i < m2.rows(); ++i) b.add(fn(m2.row(i).transpose()));
      band.diff.push_back(a.mean() - b.mean());
      band.se.push_back(std::hypot(a.se(), b.se()));
    }
    index.push_back(static_cast<double>(f));
  }
  DominanceResult r = detail::judge(band, index, cfg.confidence_multiplier, false);
  if (r.violation_point) r.functional = fs[static_cast<std::size_t>(*r.violation_point)].first;
  return r;
}

/// Upper orthant probabilities P(Y1 > t) <= P(Y2 > t) at each corner t.
inline DominanceResult verify_orthant(const LseDistribution& d1, const LseDistribution& d2, const McConfig& cfg,
                                      const std::vector<Vector>& corners) {
  detail::check_config(cfg);
  if (corners.empty()) throw UsageError("verify_orthant: no corner points");
  for (const auto& t : corners)
    if (t.size() != d1.dim()) throw UsageError("verify_orthant: corner dimension mismatch");
  auto [m1, m2] = detail::draw_pair(d1, d2, cfg);
  auto above = [](const Matrix& m, Eigen::Index i, const Vector& t) {
    return (m.row(i).transpose().array() > t.array()).all() ? 1.0 : 0.0;
  };
  detail::Band band;
  std::vector<double> index;
  for (std::size_t c = 0; c < corners.size(); ++c) {
    const Vector& t = corners[c];
    if (cfg.coupled) {
      detail::Running d;
      for (Eigen::Index i = 0; i < m1.rows(); ++i) d.add(above(m1, i, t) - above(m2, i, t));
      band.diff.push_back(d.mean());
      band.se.push_back(d.se());
    } else {
      detail::Running a, b;
      for (Eigen::Index i = 0; i < m1.rows(); ++i) a.add(above(m1, i, t));
      for (Eigen::Index i = 0; i < m2.rows(); ++i) b.add(above(m2, i, t));
      band.diff.push_back(a.mean() - b.mean());
      band.se.push_back(std::hypot(a.se(), b.se()));
    }
    index.push_back(static_cast<double>(c));
  }
  DominanceResult r = detail::judge(band, index, cfg.confidence_multiplier, false);
  if (r.violation_point) r.functional = "corner_" + std::to_string(static_cast<std::size_t>(*r.violation_point));
  return r;
}

}  // namespace lse
