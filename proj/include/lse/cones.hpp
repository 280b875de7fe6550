#pragma once

// Membership tests for the positive semidefinite, copositive and completely
// positive cones. Tolerances are relative to the largest absolute entry.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <vector>

#include "lse/errors.hpp"
#include "lse/random.hpp"

namespace lse {

enum class ConeStatus { Inside, Outside, Unknown };
enum class CertificateKind { Eigen, SimplexPoint, Factorization, SufficientRule, ExactSmallN };

inline const char* to_string(ConeStatus status) {
  switch (status) {
    case ConeStatus::Inside: return "inside";
    case ConeStatus::Outside: return "outside";
    case ConeStatus::Unknown: return "unknown";
  }
  return "?";
}

inline const char* to_string(CertificateKind kind) {
  switch (kind) {
    case CertificateKind::Eigen: return "eigen";
    case CertificateKind::SimplexPoint: return "simplex_point";
    case CertificateKind::Factorization: return "factorization";
    case CertificateKind::SufficientRule: return "sufficient_rule";
    case CertificateKind::ExactSmallN: return "exact_small_n";
  }
  return "?";
}

struct ConeVerdict {
  ConeStatus status = ConeStatus::Unknown;
  CertificateKind certificate = CertificateKind::SufficientRule;
  std::optional<Eigen::VectorXd> witness;  // eigenvector or simplex point
  std::optional<Eigen::MatrixXd> factor;   // B >= 0 with B'B = A
  double value = 0.0;                      // smallest eigenvalue or smallest quadratic form found

  bool inside() const noexcept { return status == ConeStatus::Inside; }
  bool outside() const noexcept { return status == ConeStatus::Outside; }
};

inline constexpr double kConeTolerance = 1e-9;
inline constexpr int kCopositiveMaxDim = 10;

namespace detail {

inline double cone_scale(const Eigen::MatrixXd& a) { return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff(); }

inline void require_symmetric(const Eigen::MatrixXd& a, double tol, const char* who) {
  if (a.rows() != a.cols()) throw UsageError(std::string(who) + ": matrix must be square");
  if (a.rows() == 0) throw UsageError(std::string(who) + ": empty matrix");
  if (!a.allFinite()) throw UsageError(std::string(who) + ": matrix has non-finite entries");
  const double scale = std::max(cone_scale(a), 1.0);
  if ((a - a.transpose()).cwiseAbs().maxCoeff() > std::max(tol, 1e-12) * scale)
    throw UsageError(std::string(who) + ": matrix is not symmetric");
}

inline Eigen::VectorXd unit(int n, int i) {
  Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
  e(i) = 1.0;
  return e;
}

// Euclidean projection onto the standard simplex.
inline Eigen::VectorXd project_simplex(const Eigen::VectorXd& v) {
  std::vector<double> sorted(v.data(), v.data() + v.size());
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  double cumulative = 0.0, theta = 0.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    cumulative += sorted[k];
    const double candidate = (cumulative - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] - candidate > 0.0) theta = candidate;
  }
  return (v.array() - theta).max(0.0).matrix();
}

inline double quad_form(const Eigen::MatrixXd& a, const Eigen::VectorXd& x) { return x.dot(a * x); }

inline Eigen::VectorXd simplex_descent(const Eigen::MatrixXd& a, Eigen::VectorXd x, int iterations = 300) {
  const double lipschitz = 2.0 * std::max(a.cwiseAbs().rowwise().sum().maxCoeff(), 1e-300);
  const double step = 1.0 / lipschitz;
  double best = quad_form(a, x);
  for (int it = 0; it < iterations; ++it) {
    const Eigen::VectorXd next = project_simplex(x - step * 2.0 * (a * x));
    const double value = quad_form(a, next);
    if (value > best - 1e-16 * std::abs(best) && (next - x).lpNorm<Eigen::Infinity>() < 1e-13) break;
    x = next;
    best = std::min(best, value);
  }
  return x;
}

// Calls visit(point) for every point of the simplex grid with resolution 1/steps.
template <class Visit>
void for_each_grid_point(int n, int steps, Visit&& visit) {
  std::vector<int> counts(n, 0);
  Eigen::VectorXd x(n);
  auto recurse = [&](auto&& self, int index, int remaining) -> void {
    if (index == n - 1) {
      counts[index] = remaining;
      for (int i = 0; i < n; ++i) x(i) = static_cast<double>(counts[i]) / steps;
      visit(x);
      return;
    }
    for (int c = 0; c <= remaining; ++c) {
      counts[index] = c;
      self(self, index + 1, remaining - c);
    }
  };
  recurse(recurse, 0, steps);
}

inline double binomial(int n, int k) {
  double result = 1.0;
  for (int i = 1; i <= k; ++i) result = result * (n - k + i) / i;
  return result;
}

// Largest resolution <= 24 keeping the grid at about two million points.
inline int copositive_grid_steps(int n) {
  int steps = 24;
  while (steps > 2 && binomial(steps + n - 1, n - 1) > 2.0e6) --steps;
  return steps;
}

}  // namespace detail

/// PSD test: Inside iff the smallest eigenvalue is >= -tol * max|a_ij|.
inline ConeVerdict is_psd(const Eigen::MatrixXd& a, double tol = kConeTolerance) {
  detail::require_symmetric(a, tol, "is_psd");
  ConeVerdict verdict;
  verdict.certificate = CertificateKind::Eigen;
  const double scale = detail::cone_scale(a);
  if (scale == 0.0) {
    verdict.status = ConeStatus::Inside;
    return verdict;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (a + a.transpose()));
  verdict.value = eig.eigenvalues()(0);
  if (verdict.value >= -tol * scale) {
    verdict.status = ConeStatus::Inside;
    return verdict;
  }
  verdict.status = ConeStatus::Outside;
  Eigen::VectorXd v = eig.eigenvectors().col(0);
  Eigen::Index arg;
  v.cwiseAbs().maxCoeff(&arg);
  if (v(arg) < 0.0) v = -v;
  verdict.witness = v;
  return verdict;
}

/// Copositivity: Inside iff min over the standard simplex of x'Ax >= -tol * max|a_ij|.
/// Exact for n <= 2; for 3 <= n <= 10 combines KKT support enumeration, a
/// simplex grid and projected descent.
inline ConeVerdict is_copositive(const Eigen::MatrixXd& a, double tol = kConeTolerance) {
  detail::require_symmetric(a, tol, "is_copositive");
  const int n = static_cast<int>(a.rows());
  if (n > kCopositiveMaxDim)
    throw SizeLimitError("is_copositive: dimension " + std::to_string(n) + " exceeds the supported limit of 10");
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  const double scale = detail::cone_scale(sym);
  const double threshold = -tol * scale;
  ConeVerdict verdict;
  if (scale == 0.0) {
    verdict.status = ConeStatus::Inside;
    return verdict;
  }

  for (int i = 0; i < n; ++i) {
    if (sym(i, i) < threshold) {
      verdict.status = ConeStatus::Outside;
      verdict.certificate = CertificateKind::SimplexPoint;
      verdict.witness = detail::unit(n, i);
      verdict.value = sym(i, i);
      return verdict;
    }
  }
  if (sym.minCoeff() >= threshold) {
    verdict.status = ConeStatus::Inside;
    verdict.certificate = CertificateKind::SufficientRule;
    return verdict;
  }
  if (const auto psd = is_psd(sym, tol); psd.inside()) {
    verdict.status = ConeStatus::Inside;
    verdict.certificate = CertificateKind::Eigen;
    verdict.value = psd.value;
    return verdict;
  }

  if (n == 2) {
    const double a11 = std::max(sym(0, 0), 0.0), a22 = std::max(sym(1, 1), 0.0), a12 = sym(0, 1);
    const double root = std::sqrt(a11 * a22);
    verdict.certificate = CertificateKind::ExactSmallN;
    // minimizer of the quadratic on the segment from e_1 to e_2
    const double curvature = a11 - 2.0 * a12 + a22;
    const double t = curvature > 0.0 ? std::clamp((a11 - a12) / curvature, 0.0, 1.0) : 0.5;
    Eigen::VectorXd x(2);
    x << 1.0 - t, t;
    verdict.value = detail::quad_form(sym, x);
    verdict.status = a12 + root >= threshold ? ConeStatus::Inside : ConeStatus::Outside;
    if (verdict.outside()) verdict.witness = x;
    return verdict;
  }

  Eigen::VectorXd best_x = detail::unit(n, 0);
  double best = sym(0, 0);
  auto offer = [&](const Eigen::VectorXd& x) {
    const double value = detail::quad_form(sym, x);
    if (value < best) {
      best = value;
      best_x = x;
    }
  };

  // KKT points: on a face with support S the interior critical points solve A_SS x = c 1.
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> support;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) support.push_back(i);
    const int k = static_cast<int>(support.size());
    Eigen::MatrixXd sub(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) sub(i, j) = sym(support[i], support[j]);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
    std::vector<Eigen::VectorXd> candidates;
    if (lu.isInvertible()) {
      candidates.push_back(lu.solve(Eigen::VectorXd::Ones(k)));
    } else {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sub);
      for (int c = 0; c < k; ++c) candidates.push_back(eig.eigenvectors().col(c));
    }
    for (auto y : candidates) {
      if (y.sum() < 0.0) y = -y;
      if (!(y.minCoeff() > 0.0)) continue;
      Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
      for (int i = 0; i < k; ++i) x(support[i]) = y(i);
      offer(x / x.sum());
    }
  }

  // grid seeds refined by projected descent
  constexpr std::size_t kSeeds = 24;
  using Seed = std::pair<double, Eigen::VectorXd>;
  auto worse = [](const Seed& l, const Seed& r) { return l.first < r.first; };
  std::priority_queue<Seed, std::vector<Seed>, decltype(worse)> seeds(worse);
  detail::for_each_grid_point(n, detail::copositive_grid_steps(n), [&](const Eigen::VectorXd& x) {
    const double value = detail::quad_form(sym, x);
    if (seeds.size() < kSeeds) seeds.emplace(value, x);
    else if (value < seeds.top().first) {
      seeds.pop();
      seeds.emplace(value, x);
    }
  });
  while (!seeds.empty()) {
    offer(seeds.top().second);
    offer(detail::simplex_descent(sym, seeds.top().second));
    seeds.pop();
  }

  verdict.certificate = CertificateKind::SimplexPoint;
  verdict.value = best;
  verdict.status = best >= threshold ? ConeStatus::Inside : ConeStatus::Outside;
  if (verdict.outside()) verdict.witness = best_x;
  return verdict;
}

namespace detail {

// Gauss-Newton on the positive entries of B for B'B = A, each step the
// minimum-norm solution of the linearized system.
inline bool polish_factor(const Eigen::MatrixXd& a, Eigen::MatrixXd& b, double target) {
  const int n = static_cast<int>(a.rows());
  const int rows = static_cast<int>(b.rows());
  for (int iter = 0; iter < 30; ++iter) {
    const Eigen::MatrixXd residual = b.transpose() * b - a;
    if (residual.cwiseAbs().maxCoeff() <= target) return true;
    std::vector<std::pair<int, int>> free;
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < n; ++c)
        if (b(r, c) > 0.0) free.emplace_back(r, c);
    const int equations = n * (n + 1) / 2;
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(equations, static_cast<Eigen::Index>(free.size()));
    Eigen::VectorXd rhs(equations);
    int eq = 0;
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j, ++eq) {
        rhs(eq) = -residual(i, j);
        for (std::size_t f = 0; f < free.size(); ++f) {
          const auto [r, c] = free[f];
          // d(B'B)_ij / dB_rc = [c == i] B_rj + [c == j] B_ri
          double d = 0.0;
          if (c == i) d += b(r, j);
          if (c == j) d += b(r, i);
          jac(eq, static_cast<Eigen::Index>(f)) = d;
        }
      }
    }
    const Eigen::VectorXd step = jac.completeOrthogonalDecomposition().solve(rhs);
    for (std::size_t f = 0; f < free.size(); ++f) {
      const auto [r, c] = free[f];
      b(r, c) = std::max(0.0, b(r, c) + step(static_cast<Eigen::Index>(f)));
    }
  }
  return (b.transpose() * b - a).cwiseAbs().maxCoeff() <= target;
}

inline bool search_factor(const Eigen::MatrixXd& a, double target, int restarts, Eigen::MatrixXd& out) {
  const int n = static_cast<int>(a.rows());
  const int rows = n * (n + 1) / 2;
  const double scale = std::sqrt(std::max(a.diagonal().maxCoeff(), 1e-300));
  for (int restart = 0; restart < restarts; ++restart) {
    RandomStream rng = RandomStream::derive(0xC0FFEE, static_cast<std::uint64_t>(restart));
    Eigen::MatrixXd b(rows, n);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < n; ++c) b(r, c) = rng.uniform() * scale / std::sqrt(static_cast<double>(rows));
    double step = 0.1 / (scale * scale);
    auto objective = [&](const Eigen::MatrixXd& m) { return (m.transpose() * m - a).squaredNorm(); };
    double current = objective(b);
    for (int iter = 0; iter < 3000; ++iter) {
      const Eigen::MatrixXd grad = 4.0 * b * (b.transpose() * b - a);
      bool accepted = false;
      for (int shrink = 0; shrink < 40; ++shrink) {
        const Eigen::MatrixXd trial = (b - step * grad).cwiseMax(0.0);
        const double value = objective(trial);
        if (value < current) {
          b = trial;
          current = value;
          step *= 1.5;
          accepted = true;
          break;
        }
        step *= 0.5;
      }
      if (!accepted || std::sqrt(current) < 1e-6 * scale * scale) break;
    }
    if ((b.transpose() * b - a).cwiseAbs().maxCoeff() > 1e-2 * scale * scale) continue;
    if (polish_factor(a, b, target)) {
      out = b;
      return true;
    }
  }
  return false;
}

}  // namespace detail

/// Complete positivity ladder: necessary conditions, the n <= 4 doubly
/// nonnegative rule, diagonal dominance, then a nonnegative factorization search.
inline ConeVerdict is_completely_positive(const Eigen::MatrixXd& a, double tol = kConeTolerance, int restarts = 200) {
  detail::require_symmetric(a, tol, "is_completely_positive");
  const int n = static_cast<int>(a.rows());
  const Eigen::MatrixXd sym = 0.5 * (a + a.transpose());
  const double scale = detail::cone_scale(sym);
  ConeVerdict verdict;
  if (scale == 0.0) {
    verdict.status = ConeStatus::Inside;
    verdict.certificate = CertificateKind::Factorization;
    verdict.factor = Eigen::MatrixXd::Zero(1, n);
    return verdict;
  }
  Eigen::Index ri, ci;
  if (sym.minCoeff(&ri, &ci) < -tol * scale) {
    verdict.status = ConeStatus::Outside;
    verdict.certificate = CertificateKind::SufficientRule;
    verdict.value = sym(ri, ci);
    return verdict;
  }
  if (const auto psd = is_psd(sym, tol); psd.outside()) {
    verdict = psd;
    return verdict;
  }
  const Eigen::MatrixXd clipped = sym.cwiseMax(0.0);
  if (n <= 4) {
    verdict.status = ConeStatus::Inside;
    verdict.certificate = CertificateKind::ExactSmallN;
    return verdict;
  }
  bool dominant = true;
  for (int i = 0; i < n && dominant; ++i) dominant = clipped(i, i) >= clipped.row(i).sum() - clipped(i, i);
  if (dominant) {
    // sum_{i<j} a_ij (e_i + e_j)(e_i + e_j)' plus the diagonal remainder
    std::vector<Eigen::VectorXd> rows;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (clipped(i, j) > 0.0) {
          Eigen::VectorXd r = Eigen::VectorXd::Zero(n);
          r(i) = r(j) = std::sqrt(clipped(i, j));
          rows.push_back(r);
        }
    for (int i = 0; i < n; ++i) {
      const double rest = clipped(i, i) - (clipped.row(i).sum() - clipped(i, i));
      if (rest > 0.0) rows.push_back(std::sqrt(rest) * detail::unit(n, i));
    }
    Eigen::MatrixXd factor = Eigen::MatrixXd::Zero(std::max<std::size_t>(rows.size(), 1), n);
    for (std::size_t r = 0; r < rows.size(); ++r) factor.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    verdict.status = ConeStatus::Inside;
    verdict.certificate = CertificateKind::SufficientRule;
    verdict.factor = factor;
    return verdict;
  }
  Eigen::MatrixXd factor;
  if (detail::search_factor(clipped, std::max(tol, 1e-12) * scale, restarts, factor)) {
    verdict.status = ConeStatus::Inside;
    verdict.certificate = CertificateKind::Factorization;
    verdict.factor = factor;
    return verdict;
  }
  verdict.status = ConeStatus::Unknown;
  verdict.certificate = CertificateKind::Factorization;
  return verdict;
}

/// <A, B> = trace(A'B).
inline double dual_pairing(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw UsageError("dual_pairing: dimension mismatch");
  return (a.array() * b.array()).sum();
}

}  // namespace lse
