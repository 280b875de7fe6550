#pragma once

// Sufficient and necessary conditions for integral stochastic orders between
// two LSE distributions sharing (generator, alpha/beta map, mixing law).

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "lse/cones.hpp"
#include "lse/distribution.hpp"
#include "lse/errors.hpp"
#include "lse/generators.hpp"
#include "lse/mixing.hpp"

namespace lse {

enum class OrderKind { ST, PLST, CX, LCX, ILCX, ICX, IPLCX, DCX, CCX, SM, UO, CP, COP };

inline constexpr std::array<OrderKind, 13> kAllOrders = {
    OrderKind::ST,  OrderKind::PLST, OrderKind::CX, OrderKind::LCX, OrderKind::ILCX, OrderKind::ICX, OrderKind::IPLCX,
    OrderKind::DCX, OrderKind::CCX,  OrderKind::SM, OrderKind::UO,  OrderKind::CP,   OrderKind::COP};

inline const char* to_string(OrderKind kind) {
  switch (kind) {
    case OrderKind::ST: return "st";
    case OrderKind::PLST: return "plst";
    case OrderKind::CX: return "cx";
    case OrderKind::LCX: return "lcx";
    case OrderKind::ILCX: return "ilcx";
    case OrderKind::ICX: return "icx";
    case OrderKind::IPLCX: return "iplcx";
    case OrderKind::DCX: return "dcx";
    case OrderKind::CCX: return "ccx";
    case OrderKind::SM: return "sm";
    case OrderKind::UO: return "uo";
    case OrderKind::CP: return "cp";
    case OrderKind::COP: return "cop";
  }
  return "?";
}

inline std::optional<OrderKind> order_from_string(const std::string& name) {
  for (OrderKind k : kAllOrders)
    if (name == to_string(k)) return k;
  return std::nullopt;
}

enum class SufficientStatus { Holds, Fails, NotApplicable };
enum class NecessaryStatus { Holds, Violated, NotApplicable, AssumptionUnmet };
enum class Verdict { Ordered, NotOrdered, Inconclusive };

inline const char* to_string(SufficientStatus s) {
  switch (s) {
    case SufficientStatus::Holds: return "holds";
    case SufficientStatus::Fails: return "fails";
    case SufficientStatus::NotApplicable: return "not_applicable";
  }
  return "?";
}

inline const char* to_string(NecessaryStatus s) {
  switch (s) {
    case NecessaryStatus::Holds: return "holds";
    case NecessaryStatus::Violated: return "violated";
    case NecessaryStatus::NotApplicable: return "not_applicable";
    case NecessaryStatus::AssumptionUnmet: return "assumption_unmet";
  }
  return "?";
}

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::Ordered: return "ordered";
    case Verdict::NotOrdered: return "not_ordered";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct Clause {
  std::string tag;   // "<order>/<sufficient|necessary>/<name>"
  std::string text;
  bool value;
};

struct OrderReport {
  OrderKind order = OrderKind::ST;
  SufficientStatus sufficient = SufficientStatus::Fails;
  NecessaryStatus necessary = NecessaryStatus::NotApplicable;
  Verdict verdict = Verdict::Inconclusive;
  std::vector<Clause> clauses;
  std::vector<LimitRatioResult> assumption_checks;
};

inline constexpr double kOrderRelTol = 1e-9;

namespace detail {

enum class Tri { True, False, Unknown };

inline Tri tri(bool b) { return b ? Tri::True : Tri::False; }

inline Tri tri(const ConeVerdict& v) {
  if (v.inside()) return Tri::True;
  if (v.outside()) return Tri::False;
  return Tri::Unknown;
}

// What a necessary clause needs before its conclusion is valid.
enum class Gate { None, Mean, SecondMoment, Assumption1, Assumption2, Premise };

// Everything the clause checks share for one ordered pair.
class PairContext {
 public:
  PairContext(const LseDistribution& d1, const LseDistribution& d2) : d1_(d1), d2_(d2) {
    if (d1.dim() != d2.dim()) throw IncomparableFamiliesError("order check: dimensions differ");
    if (!d1.same_family(d2))
      throw IncomparableFamiliesError("order check: distributions must share generator, alpha/beta map and mixing law");
    n_ = d1.dim();
    const auto& mix = d1.mixing();
    const auto& map = d1.map();
    mu1_ = d1.mu();
    mu2_ = d2.mu();
    delta1_ = d1.delta();
    delta2_ = d2.delta();
    range_ = beta_range(mix, map);
    if (!map.beta_exponent()) {
      delta1_.setZero();
      delta2_.setZero();
    } else if (range_.inf_beta == range_.sup_beta) {
      // beta(Z) is a constant b: mu + b delta is the location
      mu1_ += range_.inf_beta * delta1_;
      mu2_ += range_.inf_beta * delta2_;
      delta1_.setZero();
      delta2_.setZero();
    }
    skew_ = !(delta1_.array() == 0.0).all() || !(delta2_.array() == 0.0).all();
    e_beta_ = skew_ ? beta_moment(mix, map, 1.0) : 0.0;

    const auto& gen = d1.generator();
    const double e_alpha = alpha_moment(mix, map, 1.0);
    const double e_alpha2 = alpha_moment(mix, map, 2.0);
    mean_exists_ = std::isfinite(e_alpha) && std::isfinite(radial_moment(gen, n_, 1.0)) &&
                   (!skew_ || std::isfinite(e_beta_));
    second_exists_ = mean_exists_ && std::isfinite(e_alpha2) && std::isfinite(radial_moment(gen, n_, 2.0)) &&
                     (!skew_ || std::isfinite(beta_variance(mix, map)));

    mu_scale_ = std::max(mu1_.cwiseAbs().maxCoeff(), mu2_.cwiseAbs().maxCoeff());
    delta_scale_ = std::max(delta1_.cwiseAbs().maxCoeff(), delta2_.cwiseAbs().maxCoeff());
    d_mu_ = mu2_ - mu1_;
    d_delta_ = delta2_ - delta1_;

    sigma_tol_ = kOrderRelTol * std::max(max_abs(d1.sigma()), max_abs(d2.sigma()));
    d_sigma_ = d2.sigma() - d1.sigma();
    d_sigma_ = 0.5 * (d_sigma_ + d_sigma_.transpose());
    for (Eigen::Index i = 0; i < d_sigma_.rows(); ++i)
      for (Eigen::Index j = 0; j < d_sigma_.cols(); ++j)
        if (std::abs(d_sigma_(i, j)) <= sigma_tol_) d_sigma_(i, j) = 0.0;

    // Tail assumptions are properties of the shared generator; probe a canonical scale pair both ways.
    down_ = limit_ratio(gen, 2.0, 1.0);
    up_ = limit_ratio(gen, 1.0, 2.0);
    a1_ = down_.satisfies_assumption1 && up_.satisfies_assumption1;
    a2_ = down_.satisfies_assumption2;
  }

  int dim() const noexcept { return n_; }
  bool skew() const noexcept { return skew_; }
  double e_beta() const noexcept { return e_beta_; }
  const BetaRange& range() const noexcept { return range_; }
  const Vector& d_mu() const noexcept { return d_mu_; }
  const Vector& d_delta() const noexcept { return d_delta_; }
  const Matrix& d_sigma() const noexcept { return d_sigma_; }
  double sigma_tol() const noexcept { return sigma_tol_; }
  bool assumption1() const noexcept { return a1_; }
  bool assumption2() const noexcept { return a2_; }
  const LseDistribution& first() const noexcept { return d1_; }
  const LseDistribution& second() const noexcept { return d2_; }

  // Location tolerance at beta value b >= 0, per unit l1 weight.
  double loc_tol(double b) const { return kOrderRelTol * (mu_scale_ + b * delta_scale_); }

  bool mu_equal() const { return d_mu_.cwiseAbs().maxCoeff() <= kOrderRelTol * mu_scale_; }
  bool delta_equal() const { return d_delta_.cwiseAbs().maxCoeff() <= kOrderRelTol * delta_scale_; }

  // mu2 + beta delta2 >= mu1 + beta delta1 on the whole range of beta; affine in beta.
  bool location_all_z() const {
    const double lo = range_.inf_beta, hi = range_.sup_beta;
    for (int i = 0; i < n_; ++i) {
      if (d_mu_(i) + lo * d_delta_(i) < -loc_tol(lo)) return false;
      if (std::isinf(hi)) {
        if (d_delta_(i) < -kOrderRelTol * delta_scale_) return false;
      } else if (d_mu_(i) + hi * d_delta_(i) < -loc_tol(hi)) {
        return false;
      }
    }
    return true;
  }

  // a'(E Y2 - E Y1) >= -slack, or the symmetric-centre analogue when both are SME.
  bool center_ordered(const Vector& a) const {
    const double diff = a.dot(d_mu_) + e_beta_ * a.dot(d_delta_);
    return diff >= -2.0 * loc_tol(e_beta_) * a.lpNorm<1>();
  }

  bool center_equal(const Vector& a) const {
    const double diff = a.dot(d_mu_) + e_beta_ * a.dot(d_delta_);
    return std::abs(diff) <= 2.0 * loc_tol(e_beta_) * a.lpNorm<1>();
  }

  bool center_ordered() const {
    for (int i = 0; i < n_; ++i)
      if (!center_ordered(unit(n_, i))) return false;
    return true;
  }

  bool center_equal() const {
    for (int i = 0; i < n_; ++i)
      if (!center_equal(unit(n_, i))) return false;
    return true;
  }

  bool sigma_equal() const { return (d_sigma_.array() == 0.0).all(); }
  bool sigma_entrywise_ge() const { return d_sigma_.minCoeff() >= 0.0; }
  bool diag_equal() const { return (d_sigma_.diagonal().array() == 0.0).all(); }
  bool diag_ge() const { return d_sigma_.diagonal().minCoeff() >= 0.0; }

  bool off_diag_equal() const {
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (d_sigma_(i, j) != 0.0) return false;
    return true;
  }

  bool off_diag_ge() const {
    for (int i = 0; i < n_; ++i)
      for (int j = i + 1; j < n_; ++j)
        if (d_sigma_(i, j) < 0.0) return false;
    return true;
  }

  const ConeVerdict& psd() {
    if (!psd_) psd_ = is_psd(d_sigma_);
    return *psd_;
  }

  const ConeVerdict& copositive() {
    if (!cop_) {
      if (psd().inside()) {
        ConeVerdict v;
        v.status = ConeStatus::Inside;
        v.certificate = CertificateKind::Eigen;
        v.value = psd().value;
        cop_ = v;
      } else {
        cop_ = is_copositive(d_sigma_);
      }
    }
    return *cop_;
  }

  const ConeVerdict& completely_positive() {
    if (!cp_) cp_ = is_completely_positive(d_sigma_);
    return *cp_;
  }

  // Gate state: 0 open, 1 assumption unmet, 2 unavailable.
  int gate(Gate g) const {
    switch (g) {
      case Gate::None: return 0;
      case Gate::Mean: return mean_exists_ || !skew_ ? 0 : 2;
      case Gate::SecondMoment: return second_exists_ ? 0 : 2;
      case Gate::Assumption1: return a1_ ? 0 : 1;
      case Gate::Assumption2: return a2_ ? 0 : 1;
      case Gate::Premise: return 2;
    }
    return 2;
  }

  // For non-skewed pairs the centre is the symmetry point, which every order
  // implying marginal st orders without moment conditions.
  Gate center_gate_st() const { return skew_ ? Gate::Mean : Gate::None; }

  // Mean-based clauses of the convex family need integrable components.
  Gate mean_gate() const { return mean_exists_ ? Gate::None : Gate::Premise; }

  std::vector<LimitRatioResult> assumption_checks(bool projections) const {
    std::vector<LimitRatioResult> out{down_, up_};
    if (!projections) return out;
    for (int i = 0; i < n_; ++i) {
      const double s1 = std::sqrt(d1_.sigma()(i, i)), s2 = std::sqrt(d2_.sigma()(i, i));
      if (s1 != s2) out.push_back(limit_ratio(d1_.generator(), s1, s2, mu1_(i), mu2_(i)));
    }
    return out;
  }

 private:
  const LseDistribution& d1_;
  const LseDistribution& d2_;
  int n_ = 0;
  Vector mu1_, mu2_, delta1_, delta2_, d_mu_, d_delta_;
  Matrix d_sigma_;
  BetaRange range_{0.0, 0.0};
  bool skew_ = false;
  double e_beta_ = 0.0;
  bool mean_exists_ = false;
  bool second_exists_ = false;
  double mu_scale_ = 0.0, delta_scale_ = 0.0, sigma_tol_ = 0.0;
  LimitRatioResult down_, up_;
  bool a1_ = false, a2_ = false;
  std::optional<ConeVerdict> psd_, cop_, cp_;
};

class ReportBuilder {
 public:
  explicit ReportBuilder(OrderKind kind) { report_.order = kind; }

  void sufficient(const std::string& name, const std::string& text, Tri value) {
    report_.clauses.push_back({prefix("sufficient", name), text, value == Tri::True});
    if (value == Tri::False) suff_false_ = true;
    if (value == Tri::Unknown) suff_unknown_ = true;
  }

  void necessary(const PairContext& ctx, const std::string& name, const std::string& text, Gate gate, Tri value) {
    const int state = ctx.gate(gate);
    if (state == 1) {
      unmet_ = true;
      return;
    }
    if (state == 2) {
      unavailable_ = true;
      return;
    }
    report_.clauses.push_back({prefix("necessary", name), text, value == Tri::True});
    if (value == Tri::False) violated_ = true;
    if (value == Tri::Unknown) unavailable_ = true;
    ++evaluated_;
  }

  // A necessary clause that does not apply to this pair.
  void necessary_skipped() { unavailable_ = true; }

  void info(const std::string& name, const std::string& text, bool value) {
    report_.clauses.push_back({prefix("info", name), text, value});
  }

  void checks(std::vector<LimitRatioResult> c) { report_.assumption_checks = std::move(c); }

  OrderReport finish() {
    report_.sufficient = suff_false_ ? SufficientStatus::Fails
                         : suff_unknown_ ? SufficientStatus::NotApplicable
                                         : SufficientStatus::Holds;
    if (violated_) report_.necessary = NecessaryStatus::Violated;
    else if (unmet_) report_.necessary = NecessaryStatus::AssumptionUnmet;
    else if (unavailable_ || evaluated_ == 0) report_.necessary = NecessaryStatus::NotApplicable;
    else report_.necessary = NecessaryStatus::Holds;

    if (report_.sufficient == SufficientStatus::Holds && report_.necessary == NecessaryStatus::Violated)
      throw std::logic_error(std::string("order check ") + to_string(report_.order) +
                             ": sufficient condition holds while a necessary condition is violated");
    if (report_.sufficient == SufficientStatus::Holds) report_.verdict = Verdict::Ordered;
    else if (report_.necessary == NecessaryStatus::Violated) report_.verdict = Verdict::NotOrdered;
    else report_.verdict = Verdict::Inconclusive;
    return std::move(report_);
  }

 private:
  std::string prefix(const char* part, const std::string& name) const {
    return std::string(to_string(report_.order)) + "/" + part + "/" + name;
  }

  OrderReport report_;
  bool suff_false_ = false, suff_unknown_ = false;
  bool violated_ = false, unmet_ = false, unavailable_ = false;
  int evaluated_ = 0;
};

inline const char* kLocationAllZ = "mu2 + beta(z) delta2 >= mu1 + beta(z) delta1 for every z in the support";
inline const char* kCenterOrdered = "mu1 + E beta delta1 <= mu2 + E beta delta2";
inline const char* kCenterEqual = "mu1 + E beta delta1 = mu2 + E beta delta2";

// Clause pattern shared by cx, dcx, ccx, cp and cop: location equality plus a
// condition on Sigma2 - Sigma1, with iff semantics once mu or delta agree.
inline OrderReport equality_family(PairContext& ctx, OrderKind kind, const std::string& cone_name,
                                   const std::string& cone_text, Tri cone_value) {
  ReportBuilder b(kind);
  const bool mu_eq = ctx.mu_equal(), delta_eq = ctx.delta_equal();
  b.sufficient("mu_equal", "mu1 = mu2", tri(mu_eq));
  b.sufficient("delta_equal", "delta1 = delta2", tri(delta_eq));
  b.sufficient(cone_name, cone_text, cone_value);

  b.necessary(ctx, "mean_equal", kCenterEqual, ctx.mean_gate(), tri(ctx.center_equal()));
  if (mu_eq || delta_eq) b.necessary(ctx, cone_name, cone_text, Gate::SecondMoment, cone_value);
  else b.necessary_skipped();
  return b.finish();
}

// Halton points in (0,1)^n, the first `count` after skipping the origin.
inline std::vector<Vector> halton(int n, int count) {
  static constexpr int primes[] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
  std::vector<Vector> pts;
  for (int k = 1; k <= count; ++k) {
    Vector p(n);
    for (int d = 0; d < n; ++d) {
      const int base = primes[d % 16];
      double f = 1.0, r = 0.0;
      for (int i = k + d / 16 * 97; i > 0; i /= base) {
        f /= base;
        r += f * (i % base);
      }
      p(d) = r;
    }
    pts.push_back(p);
  }
  return pts;
}

inline constexpr int kLowDiscrepancyDirections = 32;

// e_i, e_i + e_j (and e_i - e_j when signed), then low-discrepancy directions.
inline std::vector<Vector> probe_directions(int n, bool signed_dirs) {
  std::vector<Vector> dirs;
  for (int i = 0; i < n; ++i) dirs.push_back(unit(n, i));
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      dirs.push_back(unit(n, i) + unit(n, j));
      if (signed_dirs) dirs.push_back(unit(n, i) - unit(n, j));
    }
  if (n > 1)
    for (Vector p : halton(n, kLowDiscrepancyDirections)) {
      if (signed_dirs) p = 2.0 * p.array() - 1.0;
      if (p.norm() > 0.0) dirs.push_back(p);
    }
  return dirs;
}

}  // namespace detail

/// Usual stochastic order.
inline OrderReport check_st(const LseDistribution& d1, const LseDistribution& d2) {
  detail::PairContext ctx(d1, d2);
  detail::ReportBuilder b(OrderKind::ST);
  using detail::Gate;
  using detail::tri;
  b.sufficient("location_all_z", detail::kLocationAllZ, tri(ctx.location_all_z()));
  b.sufficient("sigma_equal", "Sigma1 = Sigma2", tri(ctx.sigma_equal()));
  b.necessary(ctx, "mean_ordered", detail::kCenterOrdered, ctx.center_gate_st(), tri(ctx.center_ordered()));
  b.necessary(ctx, "sigma_equal", "Sigma1 = Sigma2", Gate::Assumption1, tri(ctx.sigma_equal()));
  b.checks(ctx.assumption_checks(true));
  return b.finish();
}

/// Convex order.
inline OrderReport check_cx(const LseDistribution& d1, const LseDistribution& d2) {
  detail::PairContext ctx(d1, d2);
  return detail::equality_family(ctx, OrderKind::CX, "difference_psd", "Sigma2 - Sigma1 is positive semidefinite",
                                 detail::tri(ctx.psd()));
}

/// Increasing convex order.
inline OrderReport check_icx(const LseDistribution& d1, const LseDistribution& d2) {
  detail::PairContext ctx(d1, d2);
  detail::ReportBuilder b(OrderKind::ICX);
  using detail::Gate;
  using detail::tri;
  b.sufficient("location_all_z", detail::kLocationAllZ, tri(ctx.location_all_z()));
  b.sufficient("difference_psd", "Sigma2 - Sigma1 is positive semidefinite", tri(ctx.psd()));
  b.necessary(ctx, "mean_ordered", detail::kCenterOrdered, ctx.mean_gate(), tri(ctx.center_ordered()));
  b.necessary(ctx, "difference_copositive", "Sigma2 - Sigma1 is copositive", Gate::Assumption2, tri(ctx.copositive()));
  b.checks(ctx.assumption_checks(true));
  return b.finish();
}

/// Directionally convex order.
inline OrderReport check_dcx(const LseDistribution& d1, const LseDistribution& d2) {
  detail::PairContext ctx(d1, d2);
  return detail::equality_family(ctx, OrderKind::DCX, "sigma_entrywise_ge", "Sigma2 >= Sigma1 entrywise",
                                 detail::tri(ctx.sigma_entrywise_ge()));
}

/// Componentwise convex order.
inline OrderReport check_ccx(const LseDistribution& d1, const LseDistribution& d2) {
  detail::PairContext ctx(d1, d2);
  return detail::equality_family(ctx, OrderKind::CCX, "diag_ge_offdiag_equal",
                                 "sigma1_ii <= sigma2_ii and sigma1_ij = sigma2_ij for i != j",
                                 detail::tri(ctx.diag_ge() && ctx.off_diag_equal()));
}

/// Supermodular order.
inline OrderReport check_sm(const LseDistribution& d1, const LseDistribution& d2) {
  detail::PairContext ctx(d1, d2);
  detail::ReportBuilder b(OrderKind::SM);
  using detail::Gate;
  using detail::tri;
  const bool mu_eq = ctx.mu_equal(), delta_eq = ctx.delta_equal(), diag_eq = ctx.diag_equal();
  const bool off_le = ctx.off_diag_ge();
  b.sufficient("mu_equal", "mu1 = mu2", tri(mu_eq));
  b.sufficient("delta_equal", "delta1 = delta2", tri(delta_eq));
  b.sufficient("diag_equal", "sigma1_ii = sigma2_ii", tri(diag_eq));
  b.sufficient("offdiag_le", "sigma1_ij <= sigma2_ij for i != j", tri(off_le));
  // equal marginals identify mu, delta and the diagonal
  b.necessary(ctx, "mu_equal", "mu1 = mu2", Gate::None, tri(mu_eq));
  b.necessary(ctx, "delta_equal", "delta1 = delta2", Gate::None, tri(delta_eq));
  b.necessary(ctx, "diag_equal", "sigma1_ii = sigma2_ii", Gate::None, tri(diag_eq));
  b.necessary(ctx, "offdiag_le", "sigma1_ij <= sigma2_ij for i != j", Gate::SecondMoment, tri(off_le));
  return b.finish();
}

/// Correlations rho_ij = sigma_ij / sqrt(sigma_ii sigma_jj) ordered off the diagonal.
inline bool correlations_ordered(const LseDistribution& d1, const LseDistribution& d2) {
  if (d1.dim() != d2.dim()) throw UsageError("correlations_ordered: dimensions differ");
  const int n = d1.dim();
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      const double r1 = d1.sigma()(i, j) / std::sqrt(d1.sigma()(i, i) * d1.sigma()(j, j));
      const double r2 = d2.sigma()(i, j) / std::sqrt(d2.sigma()(i, i) * d2.sigma()(j, j));
      if (r1 > r2 + kOrderRelTol) return false;
    }
  return true;
}

/// Upper orthant order.
inline OrderReport check_uo(const LseDistribution& d1, const LseDistribution& d2) {
  detail::PairContext ctx(d1, d2);
  detail::ReportBuilder b(OrderKind::UO);
  using detail::Gate;
  using detail::tri;
  const bool diag_eq = ctx.diag_equal(), off_le = ctx.off_diag_ge();
  b.sufficient("location_all_z", detail::kLocationAllZ, tri(ctx.location_all_z()));
  b.sufficient("diag_equal", "sigma1_ii = sigma2_ii", tri(diag_eq));
  b.sufficient("offdiag_le", "sigma1_ij <= sigma2_ij for i != j", tri(off_le));
  b.necessary(ctx, "mean_ordered", detail::kCenterOrdered, ctx.center_gate_st(), tri(ctx.center_ordered()));
  b.necessary(ctx, "diag_equal", "sigma1_ii = sigma2_ii", Gate::Assumption1, tri(diag_eq));
  if (ctx.mu_equal() && ctx.delta_equal() && diag_eq)
    b.necessary(ctx, "offdiag_le", "sigma1_ij <= sigma2_ij for i != j (equal marginals)", Gate::SecondMoment,
                tri(off_le));
  b.checks(ctx.assumption_checks(true));
  return b.finish();
}

/// Order generated by functions with completely positive Hessian.
inline OrderReport check_cp(const LseDistribution& d1, const LseDistribution& d2) {
  detail::PairContext ctx(d1, d2);
  return detail::equality_family(ctx, OrderKind::CP, "difference_copositive", "Sigma2 - Sigma1 is copositive",
                                 detail::tri(ctx.copositive()));
}

/// Order generated by functions with copositive Hessian.
inline OrderReport check_cop(const LseDistribution& d1, const LseDistribution& d2) {
  detail::PairContext ctx(d1, d2);
  return detail::equality_family(ctx, OrderKind::COP, "difference_completely_positive",
                                 "Sigma2 - Sigma1 is completely positive", detail::tri(ctx.completely_positive()));
}

/// Orders defined through univariate projections: PLST (parent st), LCX and
/// ILCX (parent cx), IPLCX (parent icx). Ordered is inherited from the
/// parent; otherwise the univariate necessary conditions are probed along
/// a fixed direction set plus any cone witness of the parent.
inline OrderReport check_derived(const LseDistribution& d1, const LseDistribution& d2, OrderKind kind) {
  using detail::Gate;
  using detail::tri;
  OrderReport parent;
  switch (kind) {
    case OrderKind::PLST: parent = check_st(d1, d2); break;
    case OrderKind::LCX:
    case OrderKind::ILCX: parent = check_cx(d1, d2); break;
    case OrderKind::IPLCX: parent = check_icx(d1, d2); break;
    default: throw UsageError("check_derived: order must be plst, lcx, ilcx or iplcx");
  }
  detail::PairContext ctx(d1, d2);
  detail::ReportBuilder b(kind);
  const std::string parent_name = to_string(parent.order);
  b.sufficient("parent_" + parent_name, parent_name + " sufficient condition holds",
               parent.sufficient == SufficientStatus::Holds         ? detail::Tri::True
               : parent.sufficient == SufficientStatus::NotApplicable ? detail::Tri::Unknown
                                                                      : detail::Tri::False);
  b.checks(parent.assumption_checks);
  if (parent.sufficient == SufficientStatus::Holds) return b.finish();

  const bool signed_dirs = kind == OrderKind::LCX || kind == OrderKind::ILCX;
  std::vector<Vector> dirs = detail::probe_directions(ctx.dim(), signed_dirs);
  // A parent cone witness is a certified bad direction.
  std::optional<Vector> witness;
  if (signed_dirs && ctx.psd().outside()) witness = *ctx.psd().witness;
  if (kind == OrderKind::IPLCX && ctx.copositive().outside()) witness = *ctx.copositive().witness;

  const Matrix& ds = ctx.d_sigma();
  const double cone_tol = kConeTolerance * detail::max_abs(ds);
  bool center_bad = false, var_bad = false, premise_missing = false;
  auto probe = [&](const Vector& a, bool certified) {
    const double q = a.dot(ds * a);
    switch (kind) {
      case OrderKind::PLST:
        center_bad |= !ctx.center_ordered(a);
        var_bad |= std::abs(q) > 0.5 * ctx.sigma_tol() * a.lpNorm<1>() * a.lpNorm<1>();
        break;
      case OrderKind::IPLCX:
        center_bad |= !ctx.center_ordered(a);
        var_bad |= certified || q < -2.0 * cone_tol * a.lpNorm<1>() * a.lpNorm<1>();
        break;
      default: {
        center_bad |= !ctx.center_equal(a);
        const double scale = a.lpNorm<1>();
        const bool premise = std::abs(a.dot(ctx.d_mu())) <= ctx.loc_tol(0.0) * scale ||
                             std::abs(a.dot(ctx.d_delta())) <= (ctx.loc_tol(1.0) - ctx.loc_tol(0.0)) * scale;
        if (!premise) premise_missing = true;
        else var_bad |= certified || q < -2.0 * cone_tol * a.squaredNorm();
      }
    }
  };
  for (const auto& a : dirs) probe(a, false);
  if (witness) probe(*witness, true);

  const std::string what = signed_dirs ? "a in R^n" : "a >= 0";
  switch (kind) {
    case OrderKind::PLST:
      b.necessary(ctx, "projected_mean_ordered", "a'(mu1 + E beta delta1) <= a'(mu2 + E beta delta2) for probed " + what,
                  ctx.center_gate_st(), tri(!center_bad));
      b.necessary(ctx, "projected_scale_equal", "a'Sigma1 a = a'Sigma2 a for probed " + what, Gate::Assumption1,
                  tri(!var_bad));
      break;
    case OrderKind::IPLCX:
      b.necessary(ctx, "projected_mean_ordered", "a'(mu1 + E beta delta1) <= a'(mu2 + E beta delta2) for probed " + what,
                  ctx.mean_gate(), tri(!center_bad));
      b.necessary(ctx, "projected_scale_le", "a'Sigma1 a <= a'Sigma2 a for probed " + what, Gate::Assumption2,
                  tri(!var_bad));
      break;
    default:
      b.necessary(ctx, "projected_mean_equal", "a'(mu1 + E beta delta1) = a'(mu2 + E beta delta2) for probed " + what,
                  ctx.mean_gate(), tri(!center_bad));
      b.necessary(ctx, "projected_scale_le", "a'Sigma1 a <= a'Sigma2 a for probed " + what + " with equal a'mu or a'delta",
                  Gate::SecondMoment, tri(!var_bad));
      if (premise_missing) b.necessary_skipped();
  }
  return b.finish();
}

/// Dispatch over every order kind.
inline OrderReport check(const LseDistribution& d1, const LseDistribution& d2, OrderKind kind) {
  switch (kind) {
    case OrderKind::ST: return check_st(d1, d2);
    case OrderKind::CX: return check_cx(d1, d2);
    case OrderKind::ICX: return check_icx(d1, d2);
    case OrderKind::DCX: return check_dcx(d1, d2);
    case OrderKind::CCX: return check_ccx(d1, d2);
    case OrderKind::SM: return check_sm(d1, d2);
    case OrderKind::UO: return check_uo(d1, d2);
    case OrderKind::CP: return check_cp(d1, d2);
    case OrderKind::COP: return check_cop(d1, d2);
    case OrderKind::PLST:
    case OrderKind::LCX:
    case OrderKind::ILCX:
    case OrderKind::IPLCX: return check_derived(d1, d2, kind);
  }
  throw UsageError("check: unknown order");
}

/// Weighted sums S_i = w'Y_i compared under st or icx.
inline OrderReport check_collective_risk(const LseDistribution& d1, const LseDistribution& d2, const Vector& weights,
                                         OrderKind kind) {
  if (kind != OrderKind::ST && kind != OrderKind::ICX)
    throw UsageError("check_collective_risk: order must be st or icx");
  if (weights.size() != d1.dim()) throw UsageError("check_collective_risk: weight dimension mismatch");
  if ((weights.array() < 0.0).any()) throw UsageError("check_collective_risk: weights must be nonnegative");
  if ((weights.array() == 0.0).all()) throw UsageError("check_collective_risk: weights are all zero");
  const OrderReport parent = kind == OrderKind::ST ? check_st(d1, d2) : check_icx(d1, d2);
  if (parent.sufficient == SufficientStatus::Holds) {
    detail::ReportBuilder b(kind);
    b.sufficient("parent_multivariate", std::string("multivariate ") + to_string(kind) + " sufficient condition holds",
                 detail::Tri::True);
    b.checks(parent.assumption_checks);
    return b.finish();
  }
  const LseDistribution s1 = linear_functional(d1, weights), s2 = linear_functional(d2, weights);
  return kind == OrderKind::ST ? check_st(s1, s2) : check_icx(s1, s2);
}

/// Simplified criteria for pairs without skewness (delta effectively zero).
inline OrderReport check_sme_table(const LseDistribution& d1, const LseDistribution& d2, OrderKind kind) {
  using detail::Gate;
  using detail::tri;
  detail::PairContext ctx(d1, d2);
  if (ctx.skew()) throw UsageError("check_sme_table: both distributions must be SME");
  detail::ReportBuilder b(kind);
  const bool mu_le = ctx.location_all_z(), mu_eq = ctx.mu_equal();
  const bool sig_eq = ctx.sigma_equal();
  const char* le_text = "mu1 <= mu2";
  const char* eq_text = "mu1 = mu2";
  switch (kind) {
    case OrderKind::ST:
    case OrderKind::PLST:
      b.sufficient("mu_ordered", le_text, tri(mu_le));
      b.sufficient("sigma_equal", "Sigma1 = Sigma2", tri(sig_eq));
      b.necessary(ctx, "mu_ordered", le_text, Gate::None, tri(ctx.center_ordered()));
      b.necessary(ctx, "sigma_equal", "Sigma1 = Sigma2", Gate::Assumption1, tri(sig_eq));
      b.checks(ctx.assumption_checks(true));
      break;
    case OrderKind::CX:
    case OrderKind::LCX:
    case OrderKind::ILCX:
      b.sufficient("mu_equal", eq_text, tri(mu_eq));
      b.sufficient("difference_psd", "Sigma2 - Sigma1 is positive semidefinite", tri(ctx.psd()));
      b.necessary(ctx, "mu_equal", eq_text, ctx.mean_gate(), tri(ctx.center_equal()));
      b.necessary(ctx, "difference_psd", "Sigma2 - Sigma1 is positive semidefinite", Gate::SecondMoment, tri(ctx.psd()));
      break;
    case OrderKind::ICX:
    case OrderKind::IPLCX:
      b.sufficient("mu_ordered", le_text, tri(mu_le));
      b.sufficient("difference_psd", "Sigma2 - Sigma1 is positive semidefinite", tri(ctx.psd()));
      b.necessary(ctx, "mu_ordered", le_text, ctx.mean_gate(), tri(ctx.center_ordered()));
      b.necessary(ctx, "difference_copositive", "Sigma2 - Sigma1 is copositive", Gate::Assumption2,
                  tri(ctx.copositive()));
      b.checks(ctx.assumption_checks(true));
      break;
    case OrderKind::DCX:
    case OrderKind::CCX:
    case OrderKind::CP:
    case OrderKind::COP: {
      std::string name, text;
      detail::Tri value;
      if (kind == OrderKind::DCX) {
        name = "sigma_entrywise_ge", text = "sigma1_ij <= sigma2_ij", value = tri(ctx.sigma_entrywise_ge());
      } else if (kind == OrderKind::CCX) {
        name = "diag_ge_offdiag_equal", text = "sigma1_ii <= sigma2_ii and sigma1_ij = sigma2_ij for i != j";
        value = tri(ctx.diag_ge() && ctx.off_diag_equal());
      } else if (kind == OrderKind::CP) {
        name = "difference_copositive", text = "Sigma2 - Sigma1 is copositive", value = tri(ctx.copositive());
      } else {
        name = "difference_completely_positive", text = "Sigma2 - Sigma1 is completely positive";
        value = tri(ctx.completely_positive());
      }
      b.sufficient("mu_equal", eq_text, tri(mu_eq));
      b.sufficient(name, text, value);
      b.necessary(ctx, "mu_equal", eq_text, ctx.mean_gate(), tri(ctx.center_equal()));
      b.necessary(ctx, name, text, Gate::SecondMoment, value);
      break;
    }
    case OrderKind::SM:
      b.sufficient("mu_equal", eq_text, tri(mu_eq));
      b.sufficient("diag_equal", "sigma1_ii = sigma2_ii", tri(ctx.diag_equal()));
      b.sufficient("offdiag_le", "sigma1_ij <= sigma2_ij for i != j", tri(ctx.off_diag_ge()));
      b.necessary(ctx, "mu_equal", eq_text, Gate::None, tri(mu_eq));
      b.necessary(ctx, "diag_equal", "sigma1_ii = sigma2_ii", Gate::None, tri(ctx.diag_equal()));
      b.necessary(ctx, "offdiag_le", "sigma1_ij <= sigma2_ij for i != j", Gate::SecondMoment, tri(ctx.off_diag_ge()));
      break;
    case OrderKind::UO:
      // The table lists only the sufficient direction; the necessary side is the general one.
      b.sufficient("mu_ordered", le_text, tri(mu_le));
      b.sufficient("diag_equal", "sigma1_ii = sigma2_ii", tri(ctx.diag_equal()));
      b.sufficient("offdiag_le", "sigma1_ij <= sigma2_ij for i != j", tri(ctx.off_diag_ge()));
      b.necessary(ctx, "mu_ordered", le_text, Gate::None, tri(ctx.center_ordered()));
      b.necessary(ctx, "diag_equal", "sigma1_ii = sigma2_ii", Gate::Assumption1, tri(ctx.diag_equal()));
      if (mu_eq && ctx.diag_equal())
        b.necessary(ctx, "offdiag_le", "sigma1_ij <= sigma2_ij for i != j (equal marginals)", Gate::SecondMoment,
                    tri(ctx.off_diag_ge()));
      b.checks(ctx.assumption_checks(true));
      break;
  }
  return b.finish();
}

}  // namespace lse
