#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "lse/errors.hpp"
#include "lse/generators.hpp"
#include "lse/quadrature.hpp"

using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;
using lse::DensityGenerator;

namespace {

struct Reference {
  DensityGenerator gen;
  int n;
  double c_n;
  double second_moment;  // NaN when not tabulated
};

const double kNaN = std::numeric_limits<double>::quiet_NaN();

// mpmath reference values (tests/oracles/derive_values.py)
std::vector<Reference> references() {
  using G = DensityGenerator;
  return {
      {G::normal(), 1, 0.39894228040143268, 1.0},
      {G::normal(), 2, 0.15915494309189534, 2.0},
      {G::normal(), 3, 0.06349363593424097, 3.0},
      {G::normal(), 5, 0.010105326013811642, 5.0},
      {G::cauchy(), 1, 0.31830988618379067, kNaN},
      {G::cauchy(), 2, 0.15915494309189534, kNaN},
      {G::cauchy(), 3, 0.10132118364233777, kNaN},
      {G::cauchy(), 5, 0.064503068866398979, kNaN},
      {G::student(3), 1, 0.36755259694786137, 3.0},
      {G::student(3), 2, 0.15915494309189534, 6.0},
      {G::student(3), 3, 0.077997083534020292, 9.0},
      {G::student(3), 5, 0.024827242782381613, 15.0},
      {G::student(5), 1, 0.37960668982249443, 5.0 / 3.0},
      {G::student(5), 2, 0.15915494309189534, 10.0 / 3.0},
      {G::student(5), 3, 0.072499537339202239, 5.0},
      {G::student(5), 5, 0.018461855583055157, 25.0 / 3.0},
      {G::laplace(), 1, 0.5, 2.0},
      {G::laplace(), 2, 0.15915494309189534, 6.0},
      {G::laplace(), 3, 0.039788735772973834, 12.0},
      {G::laplace(), 5, 0.0015831434944115277, 30.0},
      {G::exponential_power(3.0), 1, 0.3882291056892102, 0.7764582113784204},
      {G::exponential_power(3.0), 2, 0.16951340913762571, 1.3717211641984483},
      {G::exponential_power(3.0), 3, 0.079577471545947668, 1.8777858802034891},
      {G::exponential_power(3.0), 5, 0.020234172738458993, 2.7434423283968967},
      {G::exponential_power(1.5), 1, 0.42267892966480778, 1.2680367889944233},
      {G::exponential_power(1.5), 2, 0.15569746825094452, 2.8930825983423926},
      {G::exponential_power(1.5), 3, 0.053051647697298445, 4.7702963709409744},
      {G::exponential_power(1.5), 5, 0.0053100046497924121, 9.092545309076091},
      {G::logistic(), 1, 1.4843000268115582, 0.79569979562818515},
      {G::logistic(), 2, 0.63661977236758134, 1.3862943611198906},
      {G::logistic(), 3, 0.29688795648362792, 1.8973766091555281},
      {G::logistic(), 5, 0.07471029039382616, 2.8334420088633883},
  };
}

std::vector<DensityGenerator> catalog() {
  return {DensityGenerator::cauchy(),  DensityGenerator::exponential_power(3.0), DensityGenerator::laplace(),
          DensityGenerator::normal(),  DensityGenerator::student(3),             DensityGenerator::logistic()};
}

}  // namespace

TEST_CASE("generator values") {
  CHECK(lse::eval_generator(DensityGenerator::normal(), 0.0) == 1.0);
  CHECK_THAT(lse::eval_generator(DensityGenerator::cauchy(), 1.0, 1), WithinRel(0.5, 1e-15));
  CHECK_THAT(lse::eval_generator(DensityGenerator::logistic(), 0.0), WithinRel(0.25, 1e-15));
  CHECK_THAT(DensityGenerator::student(4)(2.0, 3), WithinRel(std::pow(1.5, -3.5), 1e-14));
  CHECK_THAT(DensityGenerator::exponential_power(2.0)(3.0, 1), WithinRel(std::exp(-1.5), 1e-14));
  CHECK_THAT(DensityGenerator::laplace()(4.0, 2), WithinRel(std::exp(-2.0), 1e-15));
}

TEST_CASE("invalid generator inputs") {
  CHECK_THROWS_AS(DensityGenerator::normal()(-1.0, 1), lse::DomainError);
  CHECK_THROWS_AS(DensityGenerator::student(0), lse::ParameterError);
  CHECK_THROWS_AS(DensityGenerator::exponential_power(1.0), lse::ParameterError);
  CHECK_THROWS_AS(lse::normalizing_constant(DensityGenerator::normal(), 0), lse::NonIntegrableError);
}

TEST_CASE("generators are positive and nonincreasing") {
  for (const auto& gen : catalog()) {
    for (int n : {1, 3}) {
      double previous = gen(0.0, n);
      CHECK(previous > 0.0);
      for (double u = 0.01; u < 200.0; u *= 1.3) {
        const double value = gen(u, n);
        CHECK(value > 0.0);
        CHECK(value <= previous);
        previous = value;
      }
    }
  }
}

TEST_CASE("normalizing constants and radial second moments match references") {
  for (const auto& ref : references()) {
    INFO(ref.gen.name() << " n=" << ref.n);
    CHECK_THAT(lse::normalizing_constant(ref.gen, ref.n), WithinRel(ref.c_n, 1e-10));
    if (!std::isnan(ref.second_moment))
      CHECK_THAT(lse::radial_second_moment(ref.gen, ref.n), WithinRel(ref.second_moment, 1e-9));
  }
}

TEST_CASE("Student-t(3) constant") {
  const double closed = std::tgamma(2.0) / (std::sqrt(3.0 * M_PI) * std::tgamma(1.5));
  CHECK_THAT(lse::normalizing_constant(DensityGenerator::student(3), 1), WithinRel(closed, 1e-13));
}

TEST_CASE("divergent radial moments are infinite") {
  CHECK(std::isinf(lse::radial_second_moment(DensityGenerator::cauchy(), 1)));
  CHECK(std::isinf(lse::radial_second_moment(DensityGenerator::student(2), 3)));
  CHECK(std::isfinite(lse::radial_moment(DensityGenerator::student(2), 3, 1.0)));
}

TEST_CASE("normal radial second moment equals the dimension") {
  for (int n = 1; n <= 10; ++n) CHECK_THAT(lse::radial_second_moment(DensityGenerator::normal(), n), WithinAbs(n, 1e-8));
}

TEST_CASE("elliptical densities integrate to one") {
  // integral over R^n of c_n g(|x|^2) = c_n * surface(S^{n-1}) * int r^{n-1} g(r^2) dr
  for (const auto& gen : catalog()) {
    for (int n : {1, 2, 3, 5}) {
      const double surface = 2.0 * std::pow(M_PI, 0.5 * n) / std::tgamma(0.5 * n);
      auto radial = [&](double r) { return std::pow(r, n - 1) * gen(r * r, n); };
      const auto integral = lse::quadrature::integrate_half_line(radial, 1e-10);
      INFO(gen.name() << " n=" << n);
      CHECK_THAT(lse::normalizing_constant(gen, n) * surface * integral.value, WithinAbs(1.0, 1e-6));
    }
  }
}

TEST_CASE("limit ratio examples") {
  const auto student = lse::limit_ratio(DensityGenerator::student(2), 2.0, 1.0);
  CHECK_THAT(student.c_value, WithinRel(0.25, 1e-14));
  CHECK(student.satisfies_assumption1);
  CHECK(student.satisfies_assumption2);

  const auto normal_like = lse::limit_ratio(DensityGenerator::exponential_power(2.0), 2.0, 1.0);
  CHECK(normal_like.c_value == 0.0);
  CHECK(normal_like.satisfies_assumption1);
  CHECK(normal_like.satisfies_assumption2);

  const auto reversed = lse::limit_ratio(DensityGenerator::normal(), 1.0, 2.0);
  CHECK(std::isinf(reversed.c_value));
  CHECK(reversed.satisfies_assumption1);
  CHECK_FALSE(reversed.assumption2_applicable);
  CHECK_FALSE(reversed.satisfies_assumption2);
}

TEST_CASE("every catalog family satisfies both assumptions when sigma1 > sigma2") {
  for (const auto& gen : catalog()) {
    for (auto [s1, s2] : {std::pair{2.0, 1.0}, std::pair{1.2, 1.0}, std::pair{5.0, 0.3}}) {
      INFO(gen.name() << " " << s1 << "/" << s2);
      const auto closed = lse::limit_ratio(gen, s1, s2);
      CHECK(closed.satisfies_assumption1);
      CHECK(closed.satisfies_assumption2);
      const auto numeric = lse::limit_ratio_numeric(gen, s1, s2, 0.0, 0.0);
      CHECK(numeric.converged);
      CHECK(numeric.satisfies_assumption1);
      CHECK(numeric.satisfies_assumption2);
    }
  }
}

TEST_CASE("Student closed form agrees with the ratio far in the tail") {
  for (int m : {1, 2, 3, 7}) {
    for (auto [s1, s2] : {std::pair{2.0, 1.0}, std::pair{1.0, 3.0}, std::pair{1.5, 1.4}}) {
      const auto closed = lse::limit_ratio(DensityGenerator::student(m), s1, s2);
      const double t = 1e4 * std::max(s1, s2);
      for (double sign : {1.0, -1.0}) {
        const double far = lse::limit_ratio_at(DensityGenerator::student(m), s1, s2, 0.0, 0.0, sign * t);
        CHECK_THAT(far, WithinRel(closed.c_value, 0.05));
      }
    }
  }
}

TEST_CASE("limit classification is shift invariant") {
  for (const auto& gen : catalog()) {
    for (auto [s1, s2] : {std::pair{2.0, 1.0}, std::pair{0.5, 1.5}}) {
      const auto closed = lse::limit_ratio(gen, s1, s2);
      const auto shifted = lse::limit_ratio_numeric(gen, s1, s2, 3.0, -1.5);
      INFO(gen.name());
      REQUIRE(shifted.converged);
      if (std::isfinite(closed.c_value)) CHECK_THAT(shifted.c_value, WithinRel(closed.c_value, 0.01));
      else CHECK(std::isinf(shifted.c_value));
      CHECK(shifted.satisfies_assumption1 == closed.satisfies_assumption1);
      CHECK(shifted.satisfies_assumption2 == closed.satisfies_assumption2);
    }
  }
}

TEST_CASE("equal scales never satisfy the assumptions") {
  const auto same = lse::limit_ratio(DensityGenerator::student(3), 1.0, 1.0);
  CHECK(same.converged);
  CHECK(same.c_value == 1.0);
  CHECK_FALSE(same.satisfies_assumption1);
  const auto shifted = lse::limit_ratio(DensityGenerator::normal(), 1.0, 1.0, 0.0, 1.0);
  CHECK_FALSE(shifted.converged);
  CHECK_FALSE(shifted.satisfies_assumption1);
  CHECK_FALSE(shifted.satisfies_assumption2);
}
