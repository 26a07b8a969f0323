#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "qlgs/certificates.hpp"
#include "qlgs/error.hpp"
#include "qlgs/shooting.hpp"
#include "qlgs/variational.hpp"

using namespace qlgs;

namespace {

const OperatorSpec kClassical = OperatorSpec::pq(2.0, 4.0, 0.0, 3);
const OperatorSpec kBI = OperatorSpec::bi_chain(2, 1.0, 3);

NonlinearitySpec classical() {
  return NonlinearitySpec(builtin::cubic_minus_linear(), 2.0, PositiveMass{2.0, 1.0}, kClassical);
}

NonlinearitySpec bi_power(double alpha) {
  return NonlinearitySpec(builtin::pure_power(alpha), 1.0, ZeroMass{}, kBI, 8.0, alpha);
}

Profile scaled(const Profile& u, double c) {
  std::vector<double> v(u.u().begin(), u.u().end()), dv(u.du().begin(), u.du().end());
  for (auto& x : v) x *= c;
  for (auto& x : dv) x *= c;
  auto tail = u.tail();
  if (tail) tail->amplitude *= c;
  return Profile(u.grid_ptr(), std::move(v), std::move(dv), tail);
}

// u + 0.05 u(0) exp(-(r - 1)^2).
Profile bumped(const Profile& u) {
  const auto r = u.grid().nodes();
  const double h = 0.05 * u.center_value();
  std::vector<double> v(u.u().begin(), u.u().end()), dv(u.du().begin(), u.du().end());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double e = std::exp(-(r[i] - 1.0) * (r[i] - 1.0));
    v[i] += h * e;
    dv[i] += -2.0 * (r[i] - 1.0) * h * e;
  }
  return Profile(u.grid_ptr(), std::move(v), std::move(dv), u.tail());
}

Profile zero_profile() {
  const auto grid = RadialGrid::graded(256, 10.0, 3);
  return Profile(grid, std::vector<double>(257, 0.0), std::vector<double>(257, 0.0));
}

}  // namespace

TEST_CASE("nonexistence certificate coefficients") {
  const auto six = nonexistence_certificate(6.0, 3, 2, 1.0);
  REQUIRE(six.coefficients.size() == 2);
  CHECK(six.coefficients[0] == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
  CHECK(six.coefficients[1] == doctest::Approx(-0.75).epsilon(1e-15));
  CHECK(six.certified);
  CHECK(six.verdict.rfind("nonexistence certified", 0) == 0);

  const auto seven = nonexistence_certificate(7.0, 3, 2, 1.0);
  CHECK(seven.coefficients[0] == doctest::Approx(1.0 / 14.0).epsilon(1e-14));
  CHECK_FALSE(seven.certified);
  CHECK(seven.verdict.rfind("no certificate", 0) == 0);

  const auto two = nonexistence_certificate(2.0, 3, 1, 1.0);
  REQUIRE(two.coefficients.size() == 1);
  CHECK(two.coefficients[0] == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(two.certified);

  // Higher orders add -(j - 1) N / (2j) to c_1, never making the table positive.
  const auto deep = nonexistence_certificate(6.0, 3, 6, 1.0);
  for (int j = 1; j <= 6; ++j)
    CHECK(deep.coefficients[j - 1] ==
          doctest::Approx(-(j - 1.0) * 3.0 / (2.0 * j)).scale(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(nonexistence_certificate(1.0, 3, 2, 1.0), InvalidArgument);
}

TEST_CASE("trivial profile") {
  const auto spec = classical();
  const auto z = zero_profile();
  CHECK(pohozaev_residual(z, spec, kClassical) == 0.0);
  CHECK(nehari_residual(z, spec, kClassical) == 0.0);
  CHECK(action_relation_residual(z, spec, kClassical) == 0.0);
}

TEST_CASE("classical soliton") {
  const auto spec = classical();
  const auto gs = find_ground_state(spec, kClassical, ShootingConfig{});
  const auto rep = certify(gs.profile, spec, kClassical);
  CHECK(rep.pohozaev_residual < 1e-4);
  CHECK(rep.nehari_residual < 1e-4);
  CHECK(rep.action_relation_residual < 1e-4);
  CHECK(rep.positive);
  CHECK(rep.monotone);
  CHECK(rep.decay_pass);
  CHECK(rep.passed);

  // Nehari is not scale invariant: 2u gives 4A2 against 16 int u^4 - 4 int u^2.
  CHECK(nehari_residual(scaled(gs.profile, 2.0), spec, kClassical) > 0.1);

  const auto off = certify(bumped(gs.profile), spec, kClassical);
  CHECK_FALSE(off.passed);
  CHECK(std::max(off.pohozaev_residual, off.nehari_residual) > 1e-2);

  // A random smooth non-solution.
  const auto bump = Profile::sample(
      RadialGrid::graded(4096, 40.0, 3), [](double r) { return 3.0 * std::exp(-r * r / 2.0); },
      [](double r) { return -3.0 * r * std::exp(-r * r / 2.0); });
  CHECK(pohozaev_residual(bump, spec, kClassical) > 0.1);
  CHECK_FALSE(certify(bump, spec, kClassical).passed);
}

TEST_CASE("crossing shot fails positivity") {
  const auto spec = classical();
  const auto shot = integrate_shot(10.0, spec, kClassical, ShootingConfig{});
  REQUIRE(std::holds_alternative<Crossing>(shot.outcome));
  const auto rep = certify(shot.profile, spec, kClassical);
  CHECK_FALSE(rep.positive);
  REQUIRE(rep.positivity_violation.has_value());
  CHECK(*rep.positivity_violation >= event_radius(shot.outcome));
  CHECK_FALSE(rep.passed);
}

TEST_CASE("residuals converge under refinement") {
  const auto spec = classical();
  ShootingConfig coarse;
  coarse.cells = 128;
  const auto c = certify(find_ground_state(spec, kClassical, coarse).profile, spec, kClassical);
  CHECK_FALSE(c.passed);
  CHECK(c.pohozaev_residual > 1e-3);

  double previous = c.pohozaev_residual;
  for (std::size_t cells : {1024u, 4096u}) {
    ShootingConfig cfg;
    cfg.cells = cells;
    const auto rep = certify(find_ground_state(spec, kClassical, cfg).profile, spec, kClassical);
    CHECK(rep.passed);
    CHECK(rep.pohozaev_residual < previous / 4.0);
    previous = rep.pohozaev_residual;
  }
}

TEST_CASE("Born-Infeld chain solution") {
  const auto spec = bi_power(7.0);
  const auto gs = find_ground_state(spec, kBI, ShootingConfig{});
  const auto rep = certify(gs.profile, spec, kBI);
  CHECK(rep.passed);
  CHECK(rep.pohozaev_residual < 1e-3);
  CHECK(rep.nehari_residual < 1e-3);
  CHECK(rep.action_relation_residual < 1e-3);

  // The derived relation against brute-force I_k = sum_j a_j/(2j) A_2j - int G.
  double chain = 0.0, direct = 0.0;
  for (const auto& t : kBI.terms()) {
    chain += t.coefficient * gs.profile.grad_power(t.exponent) / 3.0;
    direct += t.coefficient / t.exponent * gs.profile.grad_power(t.exponent);
  }
  direct -= gs.profile.integral([](double v) { return std::pow(std::max(v, 0.0), 7.0) / 7.0; });
  CHECK(direct == doctest::Approx(chain).epsilon(1e-3));
  CHECK(rep.action == doctest::Approx(direct).epsilon(1e-9));

  REQUIRE(rep.chain_identity_residual.has_value());
  CHECK(*rep.chain_identity_residual < 2e-3);

  CHECK_FALSE(certify(bumped(gs.profile), spec, kBI).passed);
}
