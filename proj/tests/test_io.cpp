#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "qlgs/io.hpp"

using namespace qlgs;
namespace fs = std::filesystem;

namespace {

const char* kBI7 = R"({
  // comment lines are allowed
  "operator": {"kind": "bi", "k": 2, "beta": 1.0, "N": 3},
  "nonlinearity": {"builtin": "pure_power", "alpha": 7},
  "shooting": {"cells": 1024, "scan": {"lo": 0.5, "hi": 5, "count": 12}},
  "certificate": {"nehari": 1e-4}
})";

std::string error_of(const std::string& text) {
  try {
    parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return {};
}

fs::path scratch_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("qlgs_test_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

}  // namespace

TEST_CASE("config parsing") {
  const auto cfg = parse_config(kBI7);
  CHECK(cfg.op.kind() == OperatorKind::BIChain);
  CHECK(cfg.op.order() == 2);
  CHECK(cfg.op.dimension() == 3);
  CHECK(cfg.spec.pure_power_alpha() == 7.0);
  CHECK(cfg.spec.zeta() == 1.0);
  // q = 4 >= N: the automatic q* is 2q.
  CHECK(cfg.spec.q_star() == 8.0);
  CHECK(cfg.shooting.cells == 1024);
  CHECK(cfg.shooting.scan_lo == 0.5);
  CHECK(cfg.shooting.scan_count == 12);
  CHECK(cfg.shooting.rtol == ShootingConfig{}.rtol);
  CHECK(cfg.tolerances.nehari == 1e-4);
  CHECK(cfg.tolerances.pohozaev == 1e-3);
  CHECK_FALSE(cfg.sweep.has_value());

  const auto classical = parse_config(R"({"operator": {"p": 2, "q": 4, "beta": 0, "N": 3},
                                          "nonlinearity": {"builtin": "cubic_minus_linear"}})");
  CHECK(classical.op.degenerate());
  CHECK(is_positive_mass(classical.spec.regime()));
  CHECK(classical.spec.zeta() == 2.0);

  const auto poly = parse_config(R"({"operator": {"kind": "pq", "p": 2, "q": 4, "beta": 0},
      "nonlinearity": {"coefficients": [0, -1, 0, 1], "zeta": 2, "mass": {"ell": 2, "m": 1}}})");
  CHECK(poly.spec.g(2.0) == doctest::Approx(6.0));
  CHECK(poly.spec.G(2.0) == doctest::Approx(2.0));

  const auto sweep = parse_config(R"({"operator": {"kind": "bi", "k": 2},
      "nonlinearity": {"builtin": "pure_power", "alpha": 7},
      "sweep": {"k": [2, 3, 4], "alpha": []}})");
  REQUIRE(sweep.sweep.has_value());
  CHECK(sweep.sweep->k->size() == 3);
  CHECK(sweep.sweep->alpha->empty());
  CHECK_FALSE(sweep.sweep->beta.has_value());
  CHECK(sweep.sweep->cell_count() == 0);
}

TEST_CASE("config diagnostics") {
  CHECK(error_of("{\n  \"operator\": {\n    \"kind\": \"bi\",,\n").find("line 3") == 0);
  CHECK(error_of(R"({"operator": {"kind": "bi"}, "nonlinearity": {"builtin": "pure_power", "alpha": 7}})")
            .find("/operator/k") != std::string::npos);
  CHECK(error_of(R"({"operator": {"kind": "bi", "k": 2, "p": 3}, "nonlinearity": {"builtin": "pure_power", "alpha": 7}})")
            .find("/operator/p") != std::string::npos);
  CHECK(error_of(R"({"operator": {"kind": "bi", "k": 2}, "nonlinearity": {"builtin": "pure_power"}})")
            .find("/nonlinearity/alpha") != std::string::npos);
  CHECK(error_of(R"({"operator": {"kind": "bi", "k": 2}, "nonlinearity": {"builtin": "nope"}})")
            .find("/nonlinearity/builtin") != std::string::npos);
  CHECK(error_of(R"({"operator": {"kind": "bi", "k": 2}, "nonlinearity": {"builtin": "pure_power", "alpha": "7"}})")
            .find("/nonlinearity/alpha") != std::string::npos);
  CHECK(error_of(R"({"operator": {"kind": "bi", "k": 2}, "nonlinearity": {"builtin": "pure_power", "alpha": 7}, "shooting": {"cels": 9}})")
            .find("/shooting/cels") != std::string::npos);
  CHECK(error_of(R"({"operator": {"kind": "bi", "k": 65}, "nonlinearity": {"builtin": "pure_power", "alpha": 7}})")
            .find("/operator/k") != std::string::npos);
  // Library validation errors carry the block name.
  CHECK(error_of(R"({"operator": {"kind": "bi", "k": 2}, "nonlinearity": {"builtin": "pure_power", "alpha": 0.5}})")
            .find("/nonlinearity") != std::string::npos);
  CHECK(error_of(R"({"nonlinearity": {"builtin": "pure_power", "alpha": 7}})").find("/operator") !=
        std::string::npos);
  CHECK_THROWS_AS(load_config("/nonexistent/config.json"), ConfigError);
}

TEST_CASE("overrides and hashes") {
  const auto base = parse_config(kBI7);
  const auto k4 = with_overrides(base, 6.0, 4, std::nullopt, std::nullopt);
  CHECK(k4.op.order() == 4);
  CHECK(k4.spec.pure_power_alpha() == 6.0);
  CHECK(k4.spec.q_star() == 16.0);
  CHECK(k4.shooting.cells == 1024);
  CHECK(meta_of(k4).operator_hash != meta_of(base).operator_hash);
  CHECK(meta_of(k4).nonlinearity_hash != meta_of(base).nonlinearity_hash);
  CHECK(meta_of(parse_config(kBI7)).operator_hash == meta_of(base).operator_hash);

  // Reference values of 64-bit FNV-1a.
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
  CHECK(fnv1a_hex("foobar") == "85944171f73967e8");
}

TEST_CASE("output directory override") {
  auto cfg = parse_config(kBI7);
  cfg.out_dir = "configured";
  ::unsetenv("QLGS_OUT");
  CHECK(resolve_out_dir(cfg) == fs::path("configured"));
  ::setenv("QLGS_OUT", "/tmp/from_env", 1);
  CHECK(resolve_out_dir(cfg) == fs::path("/tmp/from_env"));
  ::unsetenv("QLGS_OUT");
}

TEST_CASE("profile round trip") {
  const auto cfg = parse_config(kBI7);
  const auto gs = find_ground_state(cfg.spec, cfg.op, cfg.shooting);
  const auto dir = scratch_dir("roundtrip");

  std::ostringstream first;
  write_profile_json(first, gs.profile, meta_of(cfg), cfg.op);
  write_file(dir / "profile.json", first.str());
  const auto stored = read_profile_json(dir / "profile.json");
  CHECK(stored.meta.operator_hash == meta_of(cfg).operator_hash);
  CHECK(stored.profile.grid().cells() == gs.profile.grid().cells());
  REQUIRE(stored.profile.tail().has_value());

  const auto a = certify(gs.profile, cfg.spec, cfg.op);
  const auto b = certify(stored.profile, cfg.spec, cfg.op);
  CHECK(std::abs(a.pohozaev_residual - b.pohozaev_residual) <= 1e-12);
  CHECK(std::abs(a.nehari_residual - b.nehari_residual) <= 1e-12);
  CHECK(std::abs(a.action_relation_residual - b.action_relation_residual) <= 1e-12);

  // Re-serialising the stored profile is byte-identical.
  std::ostringstream second;
  write_profile_json(second, stored.profile, stored.meta, cfg.op);
  CHECK(second.str() == first.str());

  std::ostringstream csv;
  write_profile_csv(csv, gs.profile);
  CHECK(csv.str().rfind("r,u,du\n0,", 0) == 0);

  write_file(dir / "broken.json", "{\"r\": [0, 1]}");
  CHECK_THROWS_AS(read_profile_json(dir / "broken.json"), Error);
  CHECK_THROWS_AS(read_profile_json(dir / "missing.json"), Error);
  fs::remove_all(dir);
}

TEST_CASE("report serialisation") {
  const auto cert = nonexistence_certificate(6.0, 3, 2, 1.0);
  const auto text = nonexistence_json(cert);
  CHECK(text.find("\"certified\": true") != std::string::npos);

  std::vector<ScanRow> rows{{0.5, "crossing", 2.5, Side::High}, {0.1, "decay", std::nan(""), Side::Low}};
  std::ostringstream csv, js;
  write_scan(csv, rows, OutputFormat::Csv);
  write_scan(js, rows, OutputFormat::Json);
  CHECK(csv.str() == "u0,outcome,event_radius,side\n0.5,\"crossing\",2.5,high\n0.10000000000000001,\"decay\",,low\n");
  CHECK(js.str().find("\"event_radius\": null") != std::string::npos);
}
