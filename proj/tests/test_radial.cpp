#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qlgs/error.hpp"
#include "qlgs/quadrature.hpp"
#include "qlgs/radial.hpp"

using namespace qlgs;

namespace {

constexpr double kPi = std::numbers::pi;

Profile gaussian(std::size_t cells = 4096, double r_max = 12.0, double width = 1.0) {
  auto grid = RadialGrid::graded(cells, r_max, 3);
  return Profile::sample(
      grid, [=](double r) { return std::exp(-r * r / (width * width)); },
      [=](double r) { return -2.0 * r / (width * width) * std::exp(-r * r / (width * width)); });
}

// u = (3 - r^2)/2 on [0, 1], 1/r beyond: C^1 with an exact harmonic tail.
Profile capped_harmonic(double r_max = 20.0) {
  auto grid = RadialGrid::graded(4096, r_max, 3);
  return Profile::sample(
      grid, [](double r) { return r <= 1.0 ? 0.5 * (3.0 - r * r) : 1.0 / r; },
      [](double r) { return r <= 1.0 ? -r : -1.0 / (r * r); }, PowerTail{r_max, 1.0, 1.0});
}

}  // namespace

TEST_CASE("sphere area") {
  CHECK(sphere_area(2) == doctest::Approx(2.0 * kPi).epsilon(1e-14));
  CHECK(sphere_area(3) == doctest::Approx(4.0 * kPi).epsilon(1e-14));
  CHECK(sphere_area(4) == doctest::Approx(2.0 * kPi * kPi).epsilon(1e-14));
}

TEST_CASE("graded grid") {
  const auto g = RadialGrid::graded(4096, 50.0, 3);
  const auto r = g->nodes();
  REQUIRE(r.size() == 4097);
  CHECK(r.front() == 0.0);
  CHECK(r.back() == 50.0);
  CHECK(r[1024] == 1.0);
  double worst = 1.0;
  for (std::size_t i = 2; i < r.size(); ++i) {
    const double ratio = (r[i] - r[i - 1]) / (r[i - 1] - r[i - 2]);
    worst = std::max(worst, std::max(ratio, 1.0 / ratio));
  }
  CHECK(worst < 1.02);

  // Weights integrate r^{N-1} polynomials exactly up to rounding.
  double vol = 0.0;
  for (double w : g->weights()) vol += w;
  CHECK(vol == doctest::Approx(4.0 * kPi / 3.0 * std::pow(50.0, 3)).epsilon(1e-12));

  CHECK_THROWS_AS(RadialGrid::graded(32, 50.0, 3), InvalidArgument);
  CHECK_THROWS_AS(RadialGrid::graded(4096, 1e6, 3), InvalidArgument);
  CHECK_THROWS_AS(RadialGrid::from_nodes({0.0, 1.0}, 3), InvalidArgument);
}

TEST_CASE("gaussian norms") {
  const auto u = gaussian();
  const double grad2 = 1.5 * std::pow(kPi, 1.5) / std::sqrt(2.0);
  const double l2 = std::pow(kPi, 1.5) / (2.0 * std::sqrt(2.0));
  CHECK(u.grad_power(2.0) == doctest::Approx(grad2).epsilon(1e-9));
  CHECK(u.lebesgue_power(2.0) == doctest::Approx(l2).epsilon(1e-9));
  CHECK(grad_norm(u, 2.0) == doctest::Approx(std::sqrt(grad2)).epsilon(1e-9));
  CHECK(integral_of(u, [](double v) { return v * v; }) == doctest::Approx(l2).epsilon(1e-9));
}

TEST_CASE("harmonic tail contributions") {
  const auto u = capped_harmonic();
  // ||grad u||_2^2 = 4 pi (1/5 + 1); ||grad u||_4^4 = 4 pi (1/7 + 1/5).
  CHECK(u.grad_power(2.0) == doctest::Approx(4.0 * kPi * 1.2).epsilon(1e-9));
  CHECK(u.grad_power(4.0) == doctest::Approx(4.0 * kPi * (1.0 / 7.0 + 0.2)).epsilon(1e-7));

  // ||u||_6^6: inner part by adaptive quadrature, tail 4 pi int_1^inf r^{-4} = 4 pi / 3.
  const double inner = quad::adaptive(
      [](double r) { return r * r * std::pow(0.5 * (3.0 - r * r), 6); }, 0.0, 1.0);
  CHECK(u.lebesgue_power(6.0) == doctest::Approx(4.0 * kPi * (inner + 1.0 / 3.0)).epsilon(1e-8));

  // ||u||_2 diverges for a 1/r tail in three dimensions.
  CHECK(std::isinf(u.lebesgue_power(2.0)));
  CHECK(std::isinf(u.grad_power(1.5)));

  const auto [v, dv] = u.evaluate(40.0);
  CHECK(v == doctest::Approx(1.0 / 40.0));
  CHECK(dv == doctest::Approx(-1.0 / 1600.0));
}

TEST_CASE("hermite evaluation") {
  const auto u = gaussian();
  for (double r : {0.0, 0.013, 0.5, 1.7, 3.3, 11.9}) {
    const auto [v, dv] = u.evaluate(r);
    CHECK(v == doctest::Approx(std::exp(-r * r)).epsilon(1e-8));
    CHECK(dv == doctest::Approx(-2.0 * r * std::exp(-r * r)).epsilon(1e-6).scale(1.0));
  }
  CHECK(u.evaluate(20.0).first == 0.0);
}

TEST_CASE("dilation laws") {
  const auto u = gaussian(4096, 40.0);
  const int n = 3;
  for (double t : {0.5, 2.0, 5.0}) {
    const auto ut = dilated(u, t);
    for (double e : {2.0, 4.0}) {
      CHECK(ut.grad_power(e) ==
            doctest::Approx(std::pow(t, n - e) * u.grad_power(e)).epsilon(1e-6));
    }
    CHECK(ut.lebesgue_power(3.0) == doctest::Approx(std::pow(t, n) * u.lebesgue_power(3.0)).epsilon(1e-6));
  }

  const auto h = capped_harmonic();
  const auto h2 = dilated(h, 2.0);
  REQUIRE(h2.tail().has_value());
  CHECK(h2.grad_power(2.0) == doctest::Approx(2.0 * h.grad_power(2.0)).epsilon(1e-5));
  CHECK_THROWS_AS(dilated(h, 0.0), InvalidArgument);
}

TEST_CASE("interpolation inequality") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> width(0.3, 3.0), amp(0.1, 5.0);
  const auto grid = RadialGrid::graded(2048, 30.0, 3);
  for (int trial = 0; trial < 20; ++trial) {
    const double w = width(rng), a = amp(rng), w2 = width(rng), a2 = amp(rng);
    const auto u = Profile::sample(
        grid,
        [&](double r) { return a * std::exp(-r * r / (w * w)) + a2 / std::pow(1.0 + r * r / (w2 * w2), 2); },
        [&](double r) {
          return -2.0 * a * r / (w * w) * std::exp(-r * r / (w * w)) -
                 4.0 * a2 * r / (w2 * w2) / std::pow(1.0 + r * r / (w2 * w2), 3);
        });
    for (double r_exp : {6.5, 7.0, 7.5}) CHECK(interpolation_check(u, 6.0, 8.0, r_exp) <= 1.0 + 1e-8);
  }
  CHECK_THROWS_AS(interpolation_check(gaussian(), 6.0, 8.0, 9.0), InvalidArgument);
}

TEST_CASE("decay statistic") {
  const auto h = capped_harmonic(100.0);
  const auto st = decay_statistic(h, 2.0);
  // r^{1/2} / r peaks at r = 1 where it equals 1.
  const double scale = std::sqrt(h.grad_power(2.0));
  CHECK(st.finite);
  CHECK(st.sup_full == doctest::Approx(1.0 / scale).epsilon(1e-12));
  CHECK(st.relative_change == doctest::Approx(0.0));
  CHECK(st.outer_half_sup == doctest::Approx(1.0 / std::sqrt(h.grid().nodes()[2048]) / scale).epsilon(1e-9));
}

TEST_CASE("profile validation") {
  const auto grid = RadialGrid::graded(128, 10.0, 3);
  CHECK_THROWS_AS(Profile(grid, {1.0}, {0.0}), InvalidArgument);
  std::vector<double> u(129, 1.0), du(129, 0.0);
  u[3] = std::nan("");
  CHECK_THROWS_AS(Profile(grid, u, du), InvalidArgument);
}
