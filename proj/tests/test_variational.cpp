#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qlgs/error.hpp"
#include "qlgs/quadrature.hpp"
#include "qlgs/shooting.hpp"
#include "qlgs/variational.hpp"

using namespace qlgs;

namespace {

constexpr double kPi = std::numbers::pi;

const OperatorSpec kPQ = OperatorSpec::pq(2.0, 4.0, 1.0, 3);
const OperatorSpec kClassical = OperatorSpec::pq(2.0, 4.0, 0.0, 3);

NonlinearitySpec sixth_power() {
  return NonlinearitySpec(builtin::pure_power(7.0), 1.0, ZeroMass{}, kPQ, 8.0, 7.0);
}

NonlinearitySpec classical() {
  return NonlinearitySpec(builtin::cubic_minus_linear(), 2.0, PositiveMass{2.0, 1.0}, kClassical);
}

Profile gaussian(double r_max = 40.0) {
  return Profile::sample(
      RadialGrid::graded(4096, r_max, 3), [](double r) { return std::exp(-r * r); },
      [](double r) { return -2.0 * r * std::exp(-r * r); });
}

Profile zero_profile() {
  const auto grid = RadialGrid::graded(256, 10.0, 3);
  return Profile(grid, std::vector<double>(257, 0.0), std::vector<double>(257, 0.0));
}

}  // namespace

TEST_CASE("action values") {
  const auto spec = sixth_power();
  CHECK(action(zero_profile(), spec, kPQ) == 0.0);

  // I = A2/2 + A4/4 - int u^7 / 7 for u = exp(-r^2), by independent quadrature.
  const double a2 = 1.5 * std::pow(kPi, 1.5) / std::sqrt(2.0);
  const double a4 = 4.0 * kPi *
                    quad::adaptive([](double r) { return r * r * std::pow(2.0 * r * std::exp(-r * r), 4); },
                                   0.0, 12.0);
  const double u7 = std::pow(kPi / 7.0, 1.5);
  const double expected = a2 / 2.0 + a4 / 4.0 - u7 / 7.0;
  CHECK(action(gaussian(), spec, kPQ) == doctest::Approx(expected).epsilon(1e-8));
  CHECK(gradient_energy(gaussian(), kPQ) == doctest::Approx(a2 / 2.0 + a4 / 4.0).epsilon(1e-8));
}

TEST_CASE("perturbed functional") {
  const auto spec = classical();
  const auto z = default_seed(spec, kClassical);
  const double l0 = lambda0_for_seed(z, spec);
  CHECK(l0 > 0.0);
  CHECK(l0 < 1.0);
  const FunctionalParams p(spec, kClassical, 1.0, l0);
  const auto d = decompose(spec);
  const double g1 = z.integral([&](double v) { return d.G1(v); });
  const double g2 = z.integral([&](double v) { return d.G2(v); });
  CHECK(l0 * g1 - g2 > 0.0);

  for (const auto& u : {z, gaussian()}) {
    const double I = action(u, spec, kClassical);
    CHECK(std::abs(action_lambda(u, p) - I) <= 1e-9 * (1.0 + std::abs(I)));
    // Affine in lambda with slope -int G1(u) <= 0.
    const double G1u = u.integral([&](double v) { return d.G1(v); });
    const double a = action_lambda(u, p.with_lambda(l0));
    const double b = action_lambda(u, p.with_lambda(0.5 * (l0 + 1.0)));
    CHECK(b - a == doctest::Approx(-G1u * 0.5 * (1.0 - l0)).epsilon(1e-9).scale(1.0));
    CHECK(b <= a);
  }
  CHECK(action_lambda(zero_profile(), p) == 0.0);

  CHECK_THROWS_AS(FunctionalParams(spec, kClassical, 0.5, 0.7), InvalidArgument);
  CHECK_THROWS_AS(FunctionalParams(spec, kClassical, 1.5, 0.7), InvalidArgument);
  CHECK_THROWS_AS(FunctionalParams(spec, kClassical, 1.0, 0.0), InvalidArgument);
  CHECK_THROWS_AS(p.with_lambda(0.5 * l0), InvalidArgument);
}

TEST_CASE("dilation curve") {
  const auto spec = classical();
  const auto z = default_seed(spec, kClassical);
  const FunctionalParams p(spec, kClassical, 1.0, lambda0_for_seed(z, spec));
  const auto data = dilation_data(z, p);

  CHECK(dilation_value(data, 1.0, 1.0) == doctest::Approx(action_lambda(z, p)).epsilon(1e-12));

  for (double t : {0.3, 1.0, 2.5, 7.0}) {
    const double h = 1e-5 * t;
    const double fd = (dilation_value(data, 1.0, t + h) - dilation_value(data, 1.0, t - h)) / (2.0 * h);
    CHECK(fd == doctest::Approx(dilation_derivative(data, 1.0, t)).epsilon(1e-6));
  }

  for (double lambda : {p.lambda0(), 0.5 * (p.lambda0() + 1.0), 1.0}) {
    const auto rep = dilation_curve(z, p.with_lambda(lambda));
    REQUIRE(rep.tau.has_value());
    CHECK(dilation_value(data, lambda, *rep.tau) < 0.0);
    CHECK(rep.endpoint_value < 0.0);
    CHECK(rep.level > 0.0);
    CHECK(rep.t.size() == rep.value.size());
  }

  const auto custom = dilation_curve(z, p, {2.0, 0.5, 1.0});
  CHECK(custom.t == std::vector<double>{0.5, 1.0, 2.0});
  CHECK_THROWS_AS(dilation_curve(z, p, {0.0, 1.0}), InvalidArgument);
  CHECK_THROWS_AS(dilation_curve(zero_profile(), p), SeedRejected);
  CHECK_THROWS_AS(lambda0_for_seed(zero_profile(), spec), SeedRejected);
}

TEST_CASE("closed-form dilation matches resampling") {
  const auto spec = sixth_power();
  const auto u = Profile::sample(
      RadialGrid::graded(4096, 40.0, 3), [](double r) { return 1.2 * std::exp(-r * r); },
      [](double r) { return -2.4 * r * std::exp(-r * r); });
  const FunctionalParams p(spec, kPQ, 1.0, lambda0_for_seed(u, spec));
  const auto data = dilation_data(u, p);
  for (double t : {0.5, 2.0, 5.0}) {
    const double closed = dilation_value(data, 1.0, t);
    const double resampled = action_lambda(dilated(u, t), p);
    CHECK(resampled == doctest::Approx(closed).epsilon(1e-6));
  }
}

TEST_CASE("mountain pass level") {
  const auto spec = classical();
  const auto z = default_seed(spec, kClassical);
  const FunctionalParams p(spec, kClassical, 1.0, lambda0_for_seed(z, spec));
  const auto gs = find_ground_state(spec, kClassical, ShootingConfig{});
  const double I = action(gs.profile, spec, kClassical);

  double previous = std::numeric_limits<double>::infinity();
  for (double lambda : {p.lambda0(), 0.5 * (p.lambda0() + 1.0), 1.0}) {
    const auto rep = mountain_pass_level(z, p.with_lambda(lambda));
    CHECK(rep.level > 0.0);
    CHECK(rep.level <= previous);
    CHECK(rep.level >= I * (1.0 - 1e-6));
    CHECK(rep.probe_positive);
    previous = rep.level;
  }

  // Seeded with the ground state, the best path passes through it.
  const FunctionalParams pg(spec, kClassical, 1.0, lambda0_for_seed(gs.profile, spec));
  const auto tight = mountain_pass_level(gs.profile, pg);
  CHECK(tight.level == doctest::Approx(I).epsilon(1e-6));
  CHECK(tight.best_dilation == doctest::Approx(1.0).epsilon(1e-3));

  CHECK_THROWS_AS(mountain_pass_level(zero_profile(), p), SeedRejected);
}

TEST_CASE("seed construction") {
  const auto spec = classical();
  const auto z = default_seed(spec, kClassical);
  CHECK(z.center_value() == spec.zeta());
  CHECK(z.evaluate(0.5).first == spec.zeta());
  CHECK(z.integral([&](double v) { return spec.G(v); }) > 0.0);
  CHECK(z.u().back() == 0.0);

  // G(zeta) <= 0 cannot seed the construction.
  const NonlinearitySpec bad(builtin::minus_plus_power(2.5, 3.0), 1.0, ZeroMass{}, kPQ, 8.0);
  CHECK_THROWS_AS(default_seed(bad, kPQ), SeedRejected);
}
