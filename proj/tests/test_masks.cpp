#include <doctest.h>

#include <cmath>
#include <numbers>

#include "cpr/masks.hpp"

using cpr::Complex;

TEST_CASE("mask constants take their closed-form values") {
  const cpr::MaskConstants& c = cpr::mask_constants();

  // alpha = sqrt((1 - 1/sqrt(3)) / 2), real; beta on the -135 degree ray with
  // |beta| = sqrt((1 + 1/sqrt(3)) / 2).
  CHECK(c.alpha == doctest::Approx(0.45970084338098305).epsilon(1e-15));
  CHECK(std::abs(c.beta) == doctest::Approx(0.8880738339771153).epsilon(1e-15));
  const double diag = std::abs(c.beta) / std::numbers::sqrt2;
  CHECK(c.beta.real() == doctest::Approx(-diag).epsilon(1e-14));
  CHECK(c.beta.imag() == doctest::Approx(diag).epsilon(1e-14));
}

TEST_CASE("mask constants satisfy the inversion identities") {
  const cpr::MaskConstants& c = cpr::mask_constants();
  const double a2 = c.alpha * c.alpha;
  const double b2 = std::norm(c.beta);
  CHECK(std::abs(a2 + b2 - 1.0) <= 1e-15);
  CHECK(std::abs((a2 - b2) - (-1.0 / std::sqrt(3.0))) <= 1e-15);
  CHECK(std::abs(c.alpha * std::abs(c.beta) - 1.0 / std::sqrt(6.0)) <= 1e-15);
}

TEST_CASE("the four masks pair alpha and beta with alternating signs") {
  const cpr::MaskConstants& c = cpr::mask_constants();
  const Complex alpha(c.alpha, 0.0);
  const Complex beta = c.beta;

  CHECK(c.a[0] == alpha);
  CHECK(c.b[0] == beta);
  CHECK(c.a[1] == beta);
  CHECK(c.b[1] == alpha);
  CHECK(c.a[2] == alpha);
  CHECK(c.b[2] == -beta);
  CHECK(c.a[3] == -beta);
  CHECK(c.b[3] == alpha);

  // Every pair keeps unit total power.
  for (int s = 0; s < 4; ++s) {
    CHECK(std::abs(std::norm(c.a[s]) + std::norm(c.b[s]) - 1.0) <= 1e-15);
  }
}

TEST_CASE("mask vectors are flat except for the boosted first entry") {
  const cpr::MaskSet masks = cpr::build_masks(6);
  const cpr::MaskConstants& c = cpr::mask_constants();
  REQUIRE(masks.n == 6);
  for (int s = 0; s < 4; ++s) {
    REQUIRE(masks.p[s].size() == 6);
    CHECK(std::abs(masks.p[s][0] - (c.a[s] + c.b[s])) <= 1e-15);
    for (std::size_t j = 1; j < 6; ++j) CHECK(masks.p[s][j] == c.b[s]);
  }
  CHECK_THROWS_AS(cpr::build_masks(0), std::invalid_argument);
}
