#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef QLGS_CLI
#error "QLGS_CLI must name the command-line binary"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "qlgs_test_cli";

int run(const std::string& args) {
  const std::string cmd = std::string(QLGS_CLI) + " " + args + " > " + (kRoot / "stdout.txt").string() +
                          " 2> " + (kRoot / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const auto p = kRoot / name;
  std::ofstream(p) << text;
  return p;
}

const char* kBI7 = R"({"operator": {"kind": "bi", "k": 2, "beta": 1, "N": 3},
                       "nonlinearity": {"builtin": "pure_power", "alpha": 7}})";
const char* kBI6 = R"({"operator": {"kind": "bi", "k": 2, "beta": 1, "N": 3},
                       "nonlinearity": {"builtin": "pure_power", "alpha": 6}})";

struct Setup {
  Setup() {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
    ::unsetenv("QLGS_OUT");
  }
};
const Setup setup;

}  // namespace

TEST_CASE("solve, certify and determinism") {
  const auto cfg = write_config("bi7.json", kBI7);
  REQUIRE(run("solve --config " + cfg.string() + " --out " + (kRoot / "a").string()) == 0);
  for (const char* f : {"profile.json", "certificate.json", "scan.json", "path.json", "nonexistence.json"})
    CHECK(fs::exists(kRoot / "a" / f));
  const auto cert = json::parse(slurp(kRoot / "a" / "certificate.json"));
  CHECK(cert["passed"] == true);
  CHECK(cert["pohozaev_residual"].get<double>() < 1e-3);
  const auto profile = json::parse(slurp(kRoot / "a" / "profile.json"));
  CHECK(profile["M"].get<int>() > 4096);
  CHECK(profile["u0"].get<double>() == doctest::Approx(1.52944).epsilon(1e-5));
  CHECK(profile["r"].size() == profile["u"].size());

  // Same config, same bytes.
  REQUIRE(run("solve --config " + cfg.string() + " --out " + (kRoot / "b").string()) == 0);
  for (const char* f : {"profile.json", "certificate.json", "scan.json"})
    CHECK(slurp(kRoot / "a" / f) == slurp(kRoot / "b" / f));

  CHECK(run("certify --config " + cfg.string() + " " + (kRoot / "a" / "profile.json").string()) == 0);

  // Perturb u by 5% of u(0) near r = 1.
  auto bumped = profile;
  for (std::size_t i = 0; i < bumped["r"].size(); ++i) {
    const double r = bumped["r"][i];
    const double h = 0.05 * profile["u0"].get<double>() * std::exp(-(r - 1.0) * (r - 1.0));
    bumped["u"][i] = bumped["u"][i].get<double>() + h;
    bumped["du"][i] = bumped["du"][i].get<double>() - 2.0 * (r - 1.0) * h;
  }
  std::ofstream(kRoot / "bumped.json") << bumped.dump();
  CHECK(run("certify --config " + cfg.string() + " " + (kRoot / "bumped.json").string()) == 3);
  CHECK(run("certify --config " + cfg.string() + " " + (kRoot / "missing.json").string()) == 1);

  // A profile from a different problem is refused.
  const auto other = write_config("bi7k3.json", R"({"operator": {"kind": "bi", "k": 3},
      "nonlinearity": {"builtin": "pure_power", "alpha": 7}})");
  CHECK(run("certify --config " + other.string() + " " + (kRoot / "a" / "profile.json").string()) == 1);
}

TEST_CASE("nonexistence exits with the scan table") {
  const auto cfg = write_config("bi6.json", kBI6);
  CHECK(run("solve --config " + cfg.string() + " --format csv --out " + (kRoot / "six").string()) == 2);
  const auto scan = slurp(kRoot / "six" / "scan.csv");
  CHECK(scan.rfind("u0,outcome,event_radius,side\n", 0) == 0);
  CHECK(std::count(scan.begin(), scan.end(), '\n') == 61);
  CHECK(scan.find("\"decay\"") == std::string::npos);
  CHECK(json::parse(slurp(kRoot / "six" / "nonexistence.json"))["certified"] == true);
  CHECK_FALSE(fs::exists(kRoot / "six" / "profile.json"));
}

TEST_CASE("flags and environment") {
  const auto cfg = write_config("bi7_env.json", kBI7);
  const auto env_dir = kRoot / "env";
  ::setenv("QLGS_OUT", env_dir.c_str(), 1);
  CHECK(run("solve --config " + cfg.string() + " --resolution 1024 --rtol 1e-9 --scan 0.5:5:12 --format csv") == 0);
  ::unsetenv("QLGS_OUT");
  CHECK(fs::exists(env_dir / "profile.csv"));
  const auto scan = slurp(env_dir / "scan.csv");
  CHECK(std::count(scan.begin(), scan.end(), '\n') == 13);

  CHECK(run("solve --config " + cfg.string() + " --scan 5:1:3") == 1);
  CHECK(run("solve --config " + cfg.string() + " --format xml") == 1);
  CHECK(run("solve") == 1);
  CHECK(run("frobnicate") == 1);
}

TEST_CASE("malformed config") {
  const auto cfg = write_config("bad.json", "{\n  \"operator\": {\"kind\": \"bi\", \"k\": 2},\n  \"nonlinearity\": {\"builtin\": \"pure_power\" \"alpha\": 7}\n}\n");
  CHECK(run("solve --config " + cfg.string()) == 1);
  CHECK(slurp(kRoot / "stderr.txt").find("line 3") != std::string::npos);

  const auto field = write_config("field.json", R"({"operator": {"kind": "bi", "k": 2},
      "nonlinearity": {"builtin": "pure_power", "alpha": 7}, "shooting": {"cells": "many"}})");
  CHECK(run("solve --config " + field.string()) == 1);
  CHECK(slurp(kRoot / "stderr.txt").find("/shooting/cells") != std::string::npos);
}

TEST_CASE("sweep") {
  const auto cfg = write_config("sweep.json", R"({"operator": {"kind": "bi", "k": 2},
      "nonlinearity": {"builtin": "pure_power", "alpha": 7},
      "sweep": {"k": [2, 3, 4]}})");
  REQUIRE(run("sweep --config " + cfg.string() + " --workers 3 --out " + (kRoot / "sw").string()) == 0);
  const auto table = slurp(kRoot / "sw" / "sweep.csv");
  CHECK(std::count(table.begin(), table.end(), '\n') == 4);
  CHECK(table.find("certified") != std::string::npos);
  std::size_t certified = 0;
  for (std::size_t pos = 0; (pos = table.find(",certified,", pos)) != std::string::npos; ++pos) ++certified;
  CHECK(certified == 3);

  const auto mixed = write_config("mixed.json", R"({"operator": {"kind": "bi", "k": 2},
      "nonlinearity": {"builtin": "pure_power", "alpha": 7},
      "sweep": {"alpha": [6, 7]}})");
  CHECK(run("sweep --config " + mixed.string() + " --out " + (kRoot / "mx").string()) == 2);
  const auto mt = slurp(kRoot / "mx" / "sweep.csv");
  CHECK(mt.find("6,2,1,3,4096,nonexistent") != std::string::npos);
  CHECK(mt.find("7,2,1,3,4096,certified") != std::string::npos);

  const auto empty = write_config("empty.json", R"({"operator": {"kind": "bi", "k": 2},
      "nonlinearity": {"builtin": "pure_power", "alpha": 7}, "sweep": {"k": []}})");
  CHECK(run("sweep --config " + empty.string() + " --out " + (kRoot / "em").string()) == 0);
  CHECK(slurp(kRoot / "em" / "sweep.csv") == "alpha,k,beta,N,M,status,u0,action,pohozaev,nehari,action_relation\n");

  CHECK(run("sweep --config " + write_config("nosweep.json", kBI7).string()) == 1);
}

TEST_CASE("coefficient table") {
  CHECK(run("coeffs --k 3 --beta 1") == 0);
  const auto out = slurp(kRoot / "stdout.txt");
  CHECK(out.find("   3                      1.5") != std::string::npos);
  CHECK(run("coeffs --k 1 --beta 7") == 0);
  CHECK(run("coeffs --k 65") == 1);
}
