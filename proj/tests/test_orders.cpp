#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "lse/orders.hpp"
#include "test_support.hpp"

using lse::AlphaBetaMap;
using lse::AlphaKind;
using lse::BetaKind;
using lse::DensityGenerator;
using lse::LseDistribution;
using lse::Matrix;
using lse::MixingDistribution;
using lse::NecessaryStatus;
using lse::OrderKind;
using lse::SufficientStatus;
using lse::Vector;
using lse::Verdict;

namespace {

const AlphaBetaMap kGhssMap = AlphaBetaMap::make(AlphaKind::InvSqrtZ, BetaKind::InvZ);
const AlphaBetaMap kPlain = AlphaBetaMap::make(AlphaKind::One, BetaKind::Zero);

LseDistribution ghss(double mu, double sigma, double delta, double lambda = 3.0) {
  return LseDistribution::univariate(mu, sigma, delta, DensityGenerator::normal(), kGhssMap,
                                     MixingDistribution::beta_lambda_one(lambda));
}

LseDistribution normal(const Vector& mu, const Matrix& sigma) {
  return LseDistribution(mu, sigma, Vector::Zero(mu.size()), DensityGenerator::normal(), kPlain,
                         MixingDistribution::degenerate(1.0));
}

LseDistribution skewed(const Vector& mu, const Matrix& sigma, const Vector& delta) {
  return LseDistribution(mu, sigma, delta, DensityGenerator::normal(), kGhssMap, MixingDistribution::beta_lambda_one(3.0));
}

Matrix mat2(double a, double b, double c) {
  Matrix m(2, 2);
  m << a, b, b, c;
  return m;
}

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

Matrix horn() {
  Matrix h(5, 5);
  h << 1, -1, 1, 1, -1,  //
      -1, 1, -1, 1, 1,   //
      1, -1, 1, -1, 1,   //
      1, 1, -1, 1, -1,   //
      -1, 1, 1, -1, 1;
  return h;
}

bool has_clause(const lse::OrderReport& r, const std::string& tag, bool value) {
  for (const auto& c : r.clauses)
    if (c.tag == tag) return c.value == value;
  return false;
}

}  // namespace

TEST_CASE("order names round trip") {
  for (OrderKind k : lse::kAllOrders) CHECK(lse::order_from_string(lse::to_string(k)) == k);
  CHECK_FALSE(lse::order_from_string("xyz"));
}

TEST_CASE("family mismatch is rejected") {
  const auto a = ghss(0.0, 1.0, 0.2, 3.0);
  const auto b = ghss(0.0, 1.0, 0.2, 2.0);
  for (OrderKind k : lse::kAllOrders) CHECK_THROWS_AS(lse::check(a, b, k), lse::IncomparableFamiliesError);
  const auto c = normal(Vector::Zero(2), Matrix::Identity(2, 2));
  const auto d = normal(Vector::Zero(1), Matrix::Identity(1, 1));
  CHECK_THROWS_AS(lse::check_st(c, d), lse::IncomparableFamiliesError);
}

TEST_CASE("reflexivity on fixed examples") {
  Matrix s(3, 3);
  s << 2, 0.3, -0.2, 0.3, 1, 0.1, -0.2, 0.1, 1.5;
  Vector mu(3), delta(3);
  mu << 0.1, -1, 2;
  delta << 0.5, 0, -0.3;
  const std::vector<LseDistribution> ds = {ghss(0.0, 1.0, 0.2), normal(mu, s), skewed(mu, s, delta)};
  for (const auto& d : ds)
    for (OrderKind k : lse::kAllOrders) {
      const auto r = lse::check(d, d, k);
      INFO(lse::to_string(k));
      CHECK(r.verdict == Verdict::Ordered);
      CHECK(r.sufficient == SufficientStatus::Holds);
    }
}

TEST_CASE("st: GHSS pair with ordered location and skewness") {
  const auto r = lse::check_st(ghss(0.0, 1.0, 0.2), ghss(0.3, 1.0, 0.5));
  CHECK(r.verdict == Verdict::Ordered);
  CHECK(has_clause(r, "st/sufficient/location_all_z", true));
  // reversed pair violates the mean ordering
  const auto back = lse::check_st(ghss(0.3, 1.0, 0.5), ghss(0.0, 1.0, 0.2));
  CHECK(back.verdict == Verdict::NotOrdered);
}

TEST_CASE("st: unequal scale matrices are not ordered") {
  const auto r = lse::check_st(normal(Vector::Zero(2), Matrix::Identity(2, 2)), normal(Vector::Zero(2), 2.0 * Matrix::Identity(2, 2)));
  CHECK(r.necessary == NecessaryStatus::Violated);
  CHECK(r.verdict == Verdict::NotOrdered);
  CHECK(has_clause(r, "st/necessary/sigma_equal", false));
  CHECK_FALSE(r.assumption_checks.empty());
}

TEST_CASE("st: delta ordering fails at unbounded beta") {
  // mu favours Y2 but delta favours Y1 and beta(z) = 1/z is unbounded
  const auto r = lse::check_st(ghss(0.0, 1.0, 0.5), ghss(1.0, 1.0, 0.2));
  CHECK(r.sufficient == SufficientStatus::Fails);
  CHECK(has_clause(r, "st/sufficient/location_all_z", false));
}

TEST_CASE("st: constant beta folds delta into the location") {
  const auto map = AlphaBetaMap::make(AlphaKind::One, BetaKind::Identity);
  const auto mix = MixingDistribution::degenerate(2.0);
  const auto gen = DensityGenerator::normal();
  // mu + 2 delta: 1 for both laws
  const auto a = LseDistribution::univariate(1.0, 1.0, 0.0, gen, map, mix);
  const auto b = LseDistribution::univariate(0.0, 1.0, 0.5, gen, map, mix);
  for (OrderKind k : lse::kAllOrders) CHECK(lse::check(a, b, k).verdict == Verdict::Ordered);
}

TEST_CASE("cx examples") {
  const Vector mu = vec2(0.5, -0.5);
  const Matrix s = mat2(1.0, 0.2, 1.0);
  CHECK(lse::check_cx(normal(mu, s), normal(mu, s + mat2(1.0, 0.0, 0.0))).verdict == Verdict::Ordered);
  const auto r = lse::check_cx(skewed(mu, s, vec2(0.1, 0.1)), skewed(mu, s, vec2(0.3, 0.1)));
  CHECK(r.verdict == Verdict::NotOrdered);
  CHECK(has_clause(r, "cx/necessary/mean_equal", false));
  const auto shrink = lse::check_cx(normal(mu, s + mat2(1.0, 0.0, 0.0)), normal(mu, s));
  CHECK(shrink.verdict == Verdict::NotOrdered);
  CHECK(has_clause(shrink, "cx/necessary/difference_psd", false));
}

TEST_CASE("cx: neither equality premise gives no variance verdict") {
  // means agree (E beta = 1.5) but mu and delta both differ
  const Vector mu1 = vec2(0.0, 0.0), mu2 = vec2(0.3, 0.3);
  const Vector d1 = vec2(0.2, 0.2), d2 = vec2(0.0, 0.0);
  const Matrix s = mat2(1.0, 0.0, 1.0);
  const auto r = lse::check_cx(skewed(mu1, s + mat2(1, 0, 0), d1), skewed(mu2, s, d2));
  CHECK(r.necessary == NecessaryStatus::NotApplicable);
  CHECK(r.verdict == Verdict::Inconclusive);
}

TEST_CASE("icx univariate and the copositive gap") {
  CHECK(lse::check_icx(ghss(0.0, 1.0, 0.2), ghss(0.1, 2.0, 0.2)).verdict == Verdict::Ordered);
  const auto down = lse::check_icx(ghss(0.0, 2.0, 0.2), ghss(0.1, 1.0, 0.2));
  CHECK(down.verdict == Verdict::NotOrdered);
  CHECK(has_clause(down, "icx/necessary/difference_copositive", false));

  const Matrix s1 = 5.0 * Matrix::Identity(5, 5);
  const auto r = lse::check_icx(normal(Vector::Zero(5), s1), normal(Vector::Constant(5, 0.1), s1 + horn()));
  CHECK(r.sufficient == SufficientStatus::Fails);
  CHECK(r.necessary == NecessaryStatus::Holds);
  CHECK(r.verdict == Verdict::Inconclusive);
}

TEST_CASE("dcx and ccx examples") {
  const Vector mu = vec2(0.0, 1.0);
  const Matrix s = mat2(1.0, 0.3, 2.0);
  CHECK(lse::check_dcx(normal(mu, s), normal(mu, s + Matrix::Ones(2, 2))).verdict == Verdict::Ordered);
  CHECK(lse::check_dcx(normal(mu, s), normal(mu, mat2(1.0, 0.1, 2.0))).verdict == Verdict::NotOrdered);
  CHECK(lse::check_ccx(normal(mu, s), normal(mu, mat2(1.5, 0.3, 2.5))).verdict == Verdict::Ordered);
  CHECK(lse::check_ccx(normal(mu, s), normal(mu, mat2(1.5, 0.4, 2.5))).verdict == Verdict::NotOrdered);
}

TEST_CASE("sm and uo examples") {
  const Vector mu = vec2(0.0, 0.0);
  const auto low = normal(mu, mat2(1.0, 0.2, 1.0));
  const auto high = normal(mu, mat2(1.0, 0.5, 1.0));
  CHECK(lse::check_sm(low, high).verdict == Verdict::Ordered);
  CHECK(lse::check_sm(high, low).verdict == Verdict::NotOrdered);
  CHECK(lse::correlations_ordered(low, high));
  CHECK_FALSE(lse::correlations_ordered(high, low));
  CHECK(lse::check_sm(low, normal(mu, mat2(2.0, 0.5, 1.0))).verdict == Verdict::NotOrdered);

  CHECK(lse::check_uo(low, high).verdict == Verdict::Ordered);
  const auto r = lse::check_uo(low, normal(mu, mat2(2.0, 0.2, 1.0)));
  CHECK(r.verdict == Verdict::NotOrdered);
  CHECK(has_clause(r, "uo/necessary/diag_equal", false));
  // equal marginals, lower dependence
  CHECK(lse::check_uo(high, low).verdict == Verdict::NotOrdered);
}

TEST_CASE("cp and cop examples") {
  const Vector mu = vec2(0.0, 0.0);
  const Matrix s = mat2(1.0, 0.0, 1.0);
  CHECK(lse::check_cp(normal(mu, s), normal(mu, s + mat2(0.1, 0.4, 0.1))).verdict == Verdict::Ordered);
  Matrix b(2, 2);
  b << 1.0, 0.5, 0.0, 0.7;
  CHECK(lse::check_cop(normal(mu, s), normal(mu, s + b.transpose() * b)).verdict == Verdict::Ordered);
  // nonnegative but indefinite: copositive, not completely positive
  const Matrix indefinite = mat2(0.1, 0.4, 0.1);
  CHECK(lse::check_cop(normal(mu, s), normal(mu, s + indefinite)).verdict == Verdict::NotOrdered);
  const auto shifted = normal(vec2(0.5, 0.0), s + b.transpose() * b);
  CHECK(lse::check_cp(normal(mu, s), shifted).verdict == Verdict::NotOrdered);
  CHECK(lse::check_cop(normal(mu, s), shifted).verdict == Verdict::NotOrdered);
}

TEST_CASE("derived orders") {
  CHECK(lse::check_derived(ghss(0.0, 1.0, 0.2), ghss(0.3, 1.0, 0.5), OrderKind::PLST).verdict == Verdict::Ordered);
  const Vector mu = vec2(0.0, 0.0);
  const auto a = normal(mu, mat2(1.0, 0.2, 1.0));
  const auto b = normal(mu, mat2(2.0, 0.2, 1.0));
  CHECK(lse::check_derived(a, b, OrderKind::ILCX).verdict == Verdict::Ordered);
  CHECK(lse::check_derived(a, b, OrderKind::LCX).verdict == Verdict::Ordered);
  CHECK(lse::check_derived(b, a, OrderKind::LCX).verdict == Verdict::NotOrdered);

  // a = (1,1) gives a'(S2 - S1)a = -2
  const auto c = normal(mu, 3.0 * Matrix::Identity(2, 2));
  const auto d = normal(mu, mat2(4.0, -2.0, 4.0));
  const auto r = lse::check_derived(c, d, OrderKind::IPLCX);
  CHECK(r.verdict == Verdict::NotOrdered);
  CHECK(has_clause(r, "iplcx/necessary/projected_scale_le", false));
  CHECK_THROWS_AS(lse::check_derived(c, d, OrderKind::ST), lse::UsageError);
}

TEST_CASE("collective risk") {
  const Vector mu = vec2(0.0, 0.0);
  const Matrix s = mat2(1.0, 0.3, 1.0);
  const auto a = skewed(mu, s, vec2(0.1, 0.2));
  const auto b = skewed(vec2(0.2, 0.1), s, vec2(0.3, 0.2));
  CHECK(lse::check_collective_risk(a, b, vec2(1.0, 2.0), OrderKind::ST).verdict == Verdict::Ordered);
  const auto c = skewed(mu, s + mat2(0.5, 0.1, 0.5), vec2(0.1, 0.2));
  CHECK(lse::check_collective_risk(a, c, vec2(1.0, 1.0), OrderKind::ICX).verdict == Verdict::Ordered);
  CHECK_THROWS_AS(lse::check_collective_risk(a, b, vec2(-1.0, 1.0), OrderKind::ST), lse::UsageError);
  CHECK_THROWS_AS(lse::check_collective_risk(a, b, vec2(1.0, 1.0), OrderKind::CX), lse::UsageError);

  // unit weight reproduces the component check
  const auto m1 = skewed(mu, s, vec2(0.1, 0.2));
  const auto m2 = skewed(vec2(0.0, -0.3), mat2(1.0, 0.3, 2.0), vec2(0.1, 0.2));
  const auto whole = lse::check_collective_risk(m1, m2, vec2(1.0, 0.0), OrderKind::ST);
  const auto part = lse::check_st(lse::marginal(m1, {0}), lse::marginal(m2, {0}));
  CHECK(whole.verdict == part.verdict);
}

TEST_CASE("SME table rows") {
  const Vector mu = vec2(0.0, 0.0);
  const Matrix s = mat2(1.0, 0.2, 1.0);
  CHECK(lse::check_sme_table(normal(mu, s), normal(vec2(0.1, 0.2), s), OrderKind::ST).verdict == Verdict::Ordered);
  CHECK(lse::check_sme_table(normal(mu, s), normal(mu, s + mat2(1, 0, 0)), OrderKind::CX).verdict == Verdict::Ordered);
  const Matrix s1 = 5.0 * Matrix::Identity(5, 5);
  const auto r = lse::check_sme_table(normal(Vector::Zero(5), s1), normal(Vector::Constant(5, 0.1), s1 + horn()), OrderKind::ICX);
  CHECK(r.verdict == Verdict::Inconclusive);
  CHECK_THROWS_AS(lse::check_sme_table(skewed(mu, s, vec2(0.1, 0.0)), skewed(mu, s, vec2(0.1, 0.0)), OrderKind::ST),
                  lse::UsageError);
}

TEST_CASE("infinite-variance generator leaves covariance clauses open") {
  const auto gen = DensityGenerator::cauchy();
  const auto mix = MixingDistribution::degenerate(1.0);
  const Vector mu = vec2(0.0, 0.0);
  const auto a = LseDistribution(mu, mat2(2.0, 0.0, 1.0), Vector::Zero(2), gen, kPlain, mix);
  const auto b = LseDistribution(mu, mat2(1.0, 0.0, 1.0), Vector::Zero(2), gen, kPlain, mix);
  const auto cx = lse::check_cx(a, b);
  CHECK(cx.verdict == Verdict::Inconclusive);
  // the tail argument still applies to st and icx
  CHECK(lse::check_st(a, b).verdict == Verdict::NotOrdered);
  CHECK(lse::check_icx(a, b).verdict == Verdict::NotOrdered);
}

TEST_CASE("random pairs: soundness, lattice and exchange") {
  lse::RandomStream rng(7001);
  for (int trial = 0; trial < 150; ++trial) {
    const int n = 1 + trial % 3;
    const auto fam = lse_test::random_family(rng, false);
    const auto [d1, d2] = lse_test::random_pair(rng, n, fam);
    std::vector<lse::OrderReport> reports;
    for (OrderKind k : lse::kAllOrders) REQUIRE_NOTHROW(reports.push_back(lse::check(d1, d2, k)));
    auto verdict = [&](OrderKind k) { return reports[static_cast<int>(k)].verdict; };
    if (reports[0].sufficient == SufficientStatus::Holds) {
      CHECK(verdict(OrderKind::ICX) == Verdict::Ordered);
      CHECK(verdict(OrderKind::PLST) == Verdict::Ordered);
    }
    if (verdict(OrderKind::CX) == Verdict::Ordered) {
      CHECK(verdict(OrderKind::LCX) == Verdict::Ordered);
      CHECK(verdict(OrderKind::ILCX) == Verdict::Ordered);
    }
    if (verdict(OrderKind::SM) == Verdict::Ordered && lse::check_sm(d2, d1).verdict == Verdict::Ordered)
      CHECK((d1.sigma() - d2.sigma()).cwiseAbs().maxCoeff() <= 1e-9 * d1.sigma().cwiseAbs().maxCoeff());
  }
}

TEST_CASE("random SME pairs: general checker matches the table router") {
  lse::RandomStream rng(7002);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 1 + trial % 3;
    const auto fam = lse_test::random_family(rng, true);
    const auto [d1, d2] = lse_test::random_pair(rng, n, fam, true);
    for (OrderKind k : lse::kAllOrders) {
      INFO("trial " << trial << " order " << lse::to_string(k));
      CHECK(lse::check(d1, d2, k).verdict == lse::check_sme_table(d1, d2, k).verdict);
    }
  }
}
