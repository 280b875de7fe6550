#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "lse/empirical.hpp"
#include "lse/random.hpp"

using lse::AlphaBetaMap;
using lse::AlphaKind;
using lse::BetaKind;
using lse::DensityGenerator;
using lse::LseDistribution;
using lse::Matrix;
using lse::McConfig;
using lse::MixingDistribution;
using lse::Vector;

namespace {

const AlphaBetaMap kGhssMap = AlphaBetaMap::make(AlphaKind::InvSqrtZ, BetaKind::InvZ);
const AlphaBetaMap kPlain = AlphaBetaMap::make(AlphaKind::One, BetaKind::Zero);

LseDistribution ghss(double mu, double sigma, double delta, double lambda = 3.0) {
  return LseDistribution::univariate(mu, sigma, delta, DensityGenerator::normal(), kGhssMap,
                                     MixingDistribution::beta_lambda_one(lambda));
}

LseDistribution bivariate_normal(double rho) {
  Matrix s(2, 2);
  s << 1.0, rho, rho, 1.0;
  return LseDistribution(Vector::Zero(2), s, Vector::Zero(2), DensityGenerator::normal(), kPlain,
                         MixingDistribution::degenerate(1.0));
}

Vector normal_draws(std::uint64_t seed, int n) {
  lse::RandomStream rng(seed);
  Vector v(n);
  for (int i = 0; i < n; ++i) v(i) = rng.normal();
  return v;
}

McConfig config(std::uint64_t seed, std::size_t count = 200000) {
  McConfig cfg;
  cfg.seed = seed;
  cfg.sample_count = count;
  return cfg;
}

}  // namespace

TEST_CASE("empirical survival basics") {
  const Vector fives = Vector::Constant(10, 5.0);
  CHECK(lse::empirical_survival(fives, {0.0})[0].survival == 1.0);
  const Vector x = normal_draws(1, 1000);
  const auto s = lse::empirical_survival(x, {x.minCoeff() - 1.0, x.maxCoeff() + 1.0});
  CHECK(s[0].survival == 1.0);
  CHECK(s[1].survival == 0.0);
  CHECK(s[0].standard_error == 0.0);
  const auto half = lse::empirical_survival(normal_draws(2, 100000), {0.0})[0];
  CHECK(std::abs(half.survival - 0.5) <= 3.0 * half.standard_error);
}

TEST_CASE("stop-loss basics") {
  const Vector x = normal_draws(3, 1000);
  const double t = x.minCoeff() - 10.0;
  CHECK_THAT(lse::stop_loss(x, t).estimate, Catch::Matchers::WithinRel(x.mean() - t, 1e-12));
  CHECK(lse::stop_loss(x, x.maxCoeff() + 1.0).estimate == 0.0);
  const auto sl = lse::stop_loss(normal_draws(4, 1000000), 0.0);
  CHECK(std::abs(sl.estimate - 1.0 / std::sqrt(2.0 * std::numbers::pi)) <= 3.0 * sl.standard_error);
}

TEST_CASE("configuration validation") {
  const auto d = ghss(0.0, 1.0, 0.2);
  McConfig small = config(1, 9999);
  CHECK_THROWS_AS(lse::verify_st(d, d, small), lse::UsageError);
  McConfig unsorted = config(1, 10000);
  unsorted.grid = {1.0, 0.0};
  CHECK_THROWS_AS(lse::verify_st(d, d, unsorted), lse::UsageError);
  const auto b = bivariate_normal(0.1);
  CHECK_THROWS_AS(lse::verify_st(b, b, config(1, 10000)), lse::UsageError);
  CHECK_THROWS_AS(lse::verify_st(d, ghss(0.0, 1.0, 0.2, 2.0), config(1, 10000)), lse::IncomparableFamiliesError);
}

TEST_CASE("default grid spans pooled quantiles") {
  const Vector x = normal_draws(5, 100000);
  const auto g = lse::default_grid(x, x);
  REQUIRE(g.size() == 41);
  CHECK(std::is_sorted(g.begin(), g.end()));
  CHECK_THAT(g.front(), Catch::Matchers::WithinAbs(-3.09, 0.05));
  CHECK_THAT(g.back(), Catch::Matchers::WithinAbs(3.09, 0.05));
}

TEST_CASE("verify_st") {
  const auto d = ghss(0.0, 1.0, 0.2);
  CHECK(lse::verify_st(d, d, config(11)).pass);
  std::vector<lse::CurvePoint> rows;
  const auto ordered = lse::verify_st(ghss(0.0, 1.0, 0.2), ghss(0.3, 1.0, 0.5), config(12), &rows);
  CHECK(ordered.pass);
  REQUIRE(rows.size() == 41);
  for (std::size_t i = 1; i < rows.size(); ++i) {
    CHECK(rows[i].survival_1 <= rows[i - 1].survival_1);
    CHECK(rows[i].stoploss_2 <= rows[i - 1].stoploss_2);
  }
  const auto crossing = lse::verify_st(ghss(0.0, 1.0, 0.2), ghss(0.0, 4.0, 0.2), config(13));
  CHECK_FALSE(crossing.pass);
  CHECK(crossing.violation_point.has_value());
  CHECK(crossing.exceedances >= 2);
}

TEST_CASE("verify_icx") {
  const auto d = ghss(0.0, 1.0, 0.2);
  CHECK(lse::verify_icx(d, d, config(21)).pass);
  CHECK(lse::verify_icx(ghss(0.0, 1.0, 0.2), ghss(0.2, 2.0, 0.3), config(22)).pass);
  const auto wide = ghss(0.0, 3.0, 0.2), narrow = ghss(0.0, 1.0, 0.2);
  McConfig cfg = config(23);
  const auto r = lse::verify_icx(wide, narrow, cfg);
  CHECK_FALSE(r.pass);
  REQUIRE(r.violation_point.has_value());
  CHECK(*r.violation_point > 0.0);
}

TEST_CASE("verify_cx") {
  Matrix s(2, 2);
  s << 1.0, 0.2, 0.2, 1.0;
  const auto gen = DensityGenerator::normal();
  const auto mix = MixingDistribution::gig(-0.5, 1.0, 1.0);
  const auto map = AlphaBetaMap::make(AlphaKind::SqrtZ, BetaKind::Identity);
  const Vector mu = Vector::Zero(2), delta = Vector::Constant(2, 0.3);
  const LseDistribution a(mu, s, delta, gen, map, mix);
  Matrix bigger = s;
  bigger(0, 0) += 0.8;
  const LseDistribution b(mu, bigger, delta, gen, map, mix);
  const std::vector<Vector> dirs = {Vector::Unit(2, 0), Vector::Unit(2, 1), Vector::Ones(2)};
  CHECK(lse::verify_cx(a, a, config(31), dirs).pass);
  CHECK(lse::verify_cx(a, b, config(32), dirs).pass);
  const LseDistribution shifted(Vector::Constant(2, 0.2), s, delta, gen, map, mix);
  const auto r = lse::verify_cx(a, shifted, config(33), dirs);
  CHECK_FALSE(r.pass);
  CHECK(r.functional.rfind("-x_", 0) == 0);
}

TEST_CASE("verify_orthant") {
  Vector origin = Vector::Zero(2);
  const std::vector<Vector> corners = {origin, Vector::Constant(2, 1.0), Vector::Constant(2, -1.0)};
  const auto low = bivariate_normal(0.2), high = bivariate_normal(0.6);
  CHECK(lse::verify_orthant(low, low, config(41), corners).pass);
  CHECK(lse::verify_orthant(low, high, config(42, 1000000), corners).pass);
  const auto r = lse::verify_orthant(high, low, config(43, 1000000), {origin});
  CHECK_FALSE(r.pass);
  CHECK(r.functional == "corner_0");
}

TEST_CASE("estimates are reproducible") {
  const auto a = ghss(0.0, 1.0, 0.2), b = ghss(0.1, 2.0, 0.3);
  McConfig cfg = config(51, 100000);
  const auto r1 = lse::curves(a, b, cfg), r2 = lse::curves(a, b, cfg);
  REQUIRE(r1.size() == r2.size());
  for (std::size_t i = 0; i < r1.size(); ++i) {
    CHECK(r1[i].t == r2[i].t);
    CHECK(r1[i].survival_2 == r2[i].survival_2);
    CHECK(r1[i].stoploss_1 == r2[i].stoploss_1);
  }
  cfg.coupled = false;
  const auto u1 = lse::verify_icx(a, b, cfg), u2 = lse::verify_icx(a, b, cfg);
  CHECK(u1.max_violation == u2.max_violation);
  CHECK(u1.standard_error_at_violation == u2.standard_error_at_violation);
}

TEST_CASE("false failure rate for identical laws") {
  // independent streams, so the band is actually exercised
  const auto d = ghss(0.0, 1.0, 0.2);
  int failures = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    McConfig cfg = config(9000 + seed, 20000);
    cfg.coupled = false;
    if (!lse::verify_st(d, d, cfg).pass) ++failures;
  }
  CHECK(failures < 5);
}
