// io.cpp
#include "qlgs/io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

namespace qlgs {

using nlohmann::json;

namespace {

[[noreturn]] void field_error(const std::string& path, const std::string& what) {
  throw ConfigError("field " + path + ": " + what);
}

void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) field_error(path, "expected an object");
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) field_error(path + "/" + key, "unknown key");
}

std::optional<double> opt_number(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_number()) field_error(path + "/" + key, "expected a number");
  return j[key].get<double>();
}

double number(const json& j, const std::string& key, const std::string& path, double fallback) {
  return opt_number(j, key, path).value_or(fallback);
}

double required_number(const json& j, const std::string& key, const std::string& path) {
  const auto v = opt_number(j, key, path);
  if (!v) field_error(path + "/" + key, "required");
  return *v;
}

template <class Int>
Int integer(const json& j, const std::string& key, const std::string& path, Int fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  const auto& v = j[key];
  if (!v.is_number_integer() || (std::is_unsigned_v<Int> && v.get<long long>() < 0))
    field_error(path + "/" + key, std::is_unsigned_v<Int> ? "expected a non-negative integer"
                                                           : "expected an integer");
  return v.get<Int>();
}

std::string string_field(const json& j, const std::string& key, const std::string& path,
                         const std::string& fallback) {
  if (!j.contains(key) || j[key].is_null()) return fallback;
  if (!j[key].is_string()) field_error(path + "/" + key, "expected a string");
  return j[key].get<std::string>();
}

template <class T>
std::optional<std::vector<T>> opt_list(const json& j, const std::string& key, const std::string& path) {
  if (!j.contains(key)) return std::nullopt;
  std::vector<T> out;
  const auto& v = j[key];
  if (!v.is_array()) field_error(path + "/" + key, "expected an array");
  for (std::size_t i = 0; i < v.size(); ++i) {
    const bool ok = std::is_integral_v<T> ? v[i].is_number_integer() && v[i].get<long long>() > 0
                                          : v[i].is_number();
    if (!ok)
      field_error(path + "/" + key + "/" + std::to_string(i),
                  std::is_integral_v<T> ? "expected a positive integer" : "expected a number");
    out.push_back(v[i].get<T>());
  }
  return out;
}

template <class T>
std::vector<T> list(const json& j, const std::string& key, const std::string& path) {
  return opt_list<T>(j, key, path).value_or(std::vector<T>{});
}

// Fills operator defaults; the result is the canonical block that is hashed.
json normalise_operator(const json& in) {
  const std::string path = "/operator";
  check_keys(in, path, {"kind", "p", "q", "beta", "N", "k", "qstar"});
  json out;
  const std::string kind = string_field(in, "kind", path, "pq");
  out["kind"] = kind;
  out["N"] = integer<int>(in, "N", path, 3);
  if (kind == "pq") {
    if (in.contains("k")) field_error(path + "/k", "only used by kind \"bi\"");
    out["p"] = number(in, "p", path, 2.0);
    out["q"] = number(in, "q", path, 4.0);
    out["beta"] = number(in, "beta", path, 1.0);
  } else if (kind == "bi") {
    for (const char* key : {"p", "q"})
      if (in.contains(key)) field_error(path + "/" + key, "only used by kind \"pq\"");
    const int k = integer<int>(in, "k", path, 0);
    if (k < 1 || k > 64) field_error(path + "/k", "chain order must be in 1..64");
    out["k"] = k;
    out["beta"] = number(in, "beta", path, 1.0);
  } else {
    field_error(path + "/kind", "expected \"pq\" or \"bi\"");
  }
  out["qstar"] = in.contains("qstar") && !in["qstar"].is_null() ? json(required_number(in, "qstar", path))
                                                                : json(nullptr);
  return out;
}

OperatorSpec build_operator(json& block) {
  try {
    const int n = block["N"].get<int>();
    OperatorSpec op = block["kind"] == "bi"
                          ? OperatorSpec::bi_chain(block["k"].get<int>(), block["beta"].get<double>(), n)
                          : OperatorSpec::pq(block["p"].get<double>(), block["q"].get<double>(),
                                             block["beta"].get<double>(), n);
    // q >= N has no Sobolev exponent; default to q* = 2q.
    if (block["qstar"].is_null() && !op.degenerate() && op.q() >= n) block["qstar"] = 2.0 * op.q();
    return op;
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    field_error("/operator", e.what());
  }
}

json normalise_nonlinearity(const json& in) {
  const std::string path = "/nonlinearity";
  check_keys(in, path, {"builtin", "alpha", "l", "qstar", "l1", "l2", "K", "coefficients", "zeta",
                        "mass", "truncate"});
  json out;
  const std::string name = string_field(in, "builtin", path, in.contains("coefficients") ? "polynomial" : "");
  out["builtin"] = name;
  double zeta = 1.0;
  json mass = "zero";
  if (name == "pure_power") {
    out["alpha"] = required_number(in, "alpha", path);
  } else if (name == "cubic_minus_linear") {
    zeta = 2.0;
    mass = json{{"ell", 2.0}, {"m", 1.0}};
  } else if (name == "min_power") {
    out["l"] = required_number(in, "l", path);
    out["qstar"] = required_number(in, "qstar", path);
  } else if (name == "two_power") {
    const double l1 = required_number(in, "l1", path), l2 = required_number(in, "l2", path);
    const double K = number(in, "K", path, 1.0);
    out["l1"] = l1;
    out["l2"] = l2;
    out["K"] = K;
    // Half the positive zero of G.
    if (l2 > l1 && K > 0.0) zeta = 0.5 * std::pow(K * l2 / l1, 1.0 / (l2 - l1));
  } else if (name == "polynomial") {
    out["coefficients"] = list<double>(in, "coefficients", path);
    if (out["coefficients"].empty()) field_error(path + "/coefficients", "required");
    if (!in.contains("zeta")) field_error(path + "/zeta", "required for polynomial nonlinearities");
  } else if (name.empty()) {
    field_error(path + "/builtin", "required");
  } else {
    field_error(path + "/builtin", "unknown builtin \"" + name + "\"");
  }
  out["zeta"] = number(in, "zeta", path, zeta);
  if (in.contains("mass")) {
    const auto& m = in["mass"];
    if (m.is_string()) {
      if (m != "zero") field_error(path + "/mass", "expected \"zero\" or {ell, m}");
      mass = "zero";
    } else {
      check_keys(m, path + "/mass", {"ell", "m"});
      mass = json{{"ell", required_number(m, "ell", path + "/mass")},
                  {"m", required_number(m, "m", path + "/mass")}};
    }
  }
  out["mass"] = mass;
  if (in.contains("truncate") && !in["truncate"].is_boolean())
    field_error(path + "/truncate", "expected a boolean");
  out["truncate"] = in.value("truncate", false);
  return out;
}

NonlinearitySpec build_nonlinearity(const json& b, const json& op_block, const OperatorSpec& op) {
  try {
    const std::string name = b["builtin"];
    ScalarFunction g = ScalarFunction::zero();
    std::optional<double> alpha;
    if (name == "pure_power") {
      alpha = b["alpha"].get<double>();
      g = builtin::pure_power(*alpha);
    } else if (name == "cubic_minus_linear") {
      g = builtin::cubic_minus_linear();
    } else if (name == "min_power") {
      g = builtin::min_power(b["l"].get<double>(), b["qstar"].get<double>());
    } else if (name == "two_power") {
      g = builtin::two_power(b["l1"].get<double>(), b["l2"].get<double>(), b["K"].get<double>());
    } else {
      const auto c = b["coefficients"].get<std::vector<double>>();
      g = builtin::polynomial(c);
    }
    MassRegime regime = ZeroMass{};
    if (b["mass"].is_object())
      regime = PositiveMass{b["mass"]["ell"].get<double>(), b["mass"]["m"].get<double>()};
    std::optional<double> qstar;
    if (!op_block["qstar"].is_null()) qstar = op_block["qstar"].get<double>();
    NonlinearitySpec spec(std::move(g), b["zeta"].get<double>(), regime, op, qstar, alpha, name);
    return b["truncate"].get<bool>() ? truncate(spec) : spec;
  } catch (const Error& e) {
    field_error("/nonlinearity", e.what());
  }
}

ShootingConfig parse_shooting(const json& in) {
  const std::string path = "/shooting";
  ShootingConfig c;
  if (in.is_null()) return c;
  check_keys(in, path, {"rtol", "atol", "r_max", "cells", "decay_u_rel", "decay_du",
                        "decay_asymptote_rel", "decay_exponent_tol", "bisection_rel_tol",
                        "event_tol", "max_steps", "workers", "scan"});
  c.rtol = number(in, "rtol", path, c.rtol);
  c.atol = number(in, "atol", path, c.atol);
  c.r_max = number(in, "r_max", path, c.r_max);
  c.cells = integer<std::size_t>(in, "cells", path, c.cells);
  c.decay_u_rel = number(in, "decay_u_rel", path, c.decay_u_rel);
  c.decay_du = number(in, "decay_du", path, c.decay_du);
  c.decay_asymptote_rel = number(in, "decay_asymptote_rel", path, c.decay_asymptote_rel);
  c.decay_exponent_tol = number(in, "decay_exponent_tol", path, c.decay_exponent_tol);
  c.bisection_rel_tol = number(in, "bisection_rel_tol", path, c.bisection_rel_tol);
  c.event_tol = number(in, "event_tol", path, c.event_tol);
  c.max_steps = integer<long>(in, "max_steps", path, c.max_steps);
  c.workers = integer<unsigned>(in, "workers", path, c.workers);
  if (in.contains("scan")) {
    const auto& s = in["scan"];
    check_keys(s, path + "/scan", {"lo", "hi", "count"});
    c.scan_lo = opt_number(s, "lo", path + "/scan");
    c.scan_hi = opt_number(s, "hi", path + "/scan");
    c.scan_count = integer<int>(s, "count", path + "/scan", c.scan_count);
  }
  for (double v : {c.rtol, c.atol, c.r_max})
    if (!(v > 0.0)) field_error(path, "rtol, atol and r_max must be positive");
  if (c.cells < 64) field_error(path + "/cells", "at least 64 cells are required");
  return c;
}

CertificateTolerances parse_tolerances(const json& in) {
  const std::string path = "/certificate";
  CertificateTolerances t;
  if (in.is_null()) return t;
  check_keys(in, path, {"pohozaev", "nehari", "action_relation", "tail_threshold", "decay_change"});
  t.pohozaev = number(in, "pohozaev", path, t.pohozaev);
  t.nehari = number(in, "nehari", path, t.nehari);
  t.action_relation = number(in, "action_relation", path, t.action_relation);
  t.tail_threshold = number(in, "tail_threshold", path, t.tail_threshold);
  t.decay_change = number(in, "decay_change", path, t.decay_change);
  return t;
}

Config build(json op_block, json nl_block) {
  const OperatorSpec op = build_operator(op_block);
  NonlinearitySpec spec = build_nonlinearity(nl_block, op_block, op);
  Config c{op, std::move(spec), {}, {}, "qlgs_out", OutputFormat::Json, std::nullopt,
           {op_block.dump(), nl_block.dump()}};
  return c;
}

std::size_t line_of(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

}  // namespace

std::size_t SweepRanges::cell_count() const {
  const auto size = [](const auto& v) { return v ? v->size() : std::size_t{1}; };
  return size(alpha) * size(k) * size(beta) * size(dimension) * size(resolution);
}

Config parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text, nullptr, true, true);
  } catch (const json::parse_error& e) {
    std::string msg = e.what();
    if (const auto pos = msg.find("syntax error"); pos != std::string::npos) msg = msg.substr(pos);
    throw ConfigError("line " + std::to_string(line_of(text, e.byte)) + ": " + msg);
  }
  check_keys(root, "", {"operator", "nonlinearity", "shooting", "certificate", "output", "sweep"});
  if (!root.contains("operator")) field_error("/operator", "required");
  if (!root.contains("nonlinearity")) field_error("/nonlinearity", "required");

  Config cfg = build(normalise_operator(root["operator"]), normalise_nonlinearity(root["nonlinearity"]));
  cfg.shooting = parse_shooting(root.value("shooting", json(nullptr)));
  cfg.tolerances = parse_tolerances(root.value("certificate", json(nullptr)));
  if (root.contains("output")) {
    const auto& o = root["output"];
    check_keys(o, "/output", {"dir", "format"});
    cfg.out_dir = string_field(o, "dir", "/output", cfg.out_dir.string());
    const std::string f = string_field(o, "format", "/output", "json");
    if (f != "json" && f != "csv") field_error("/output/format", "expected \"json\" or \"csv\"");
    cfg.format = f == "csv" ? OutputFormat::Csv : OutputFormat::Json;
  }
  if (root.contains("sweep")) {
    const auto& s = root["sweep"];
    check_keys(s, "/sweep", {"alpha", "k", "beta", "N", "resolution"});
    SweepRanges r;
    r.alpha = opt_list<double>(s, "alpha", "/sweep");
    r.k = opt_list<int>(s, "k", "/sweep");
    r.beta = opt_list<double>(s, "beta", "/sweep");
    r.dimension = opt_list<int>(s, "N", "/sweep");
    r.resolution = opt_list<std::size_t>(s, "resolution", "/sweep");
    cfg.sweep = std::move(r);
  }
  return cfg;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

Config with_overrides(const Config& base, std::optional<double> alpha, std::optional<int> k,
                      std::optional<double> beta, std::optional<int> dimension) {
  json op = json::parse(base.blocks.operator_json);
  json nl = json::parse(base.blocks.nonlinearity_json);
  if (k) {
    if (op["kind"] != "bi") field_error("/sweep/k", "needs an operator of kind \"bi\"");
    op["k"] = *k;
  }
  if (beta) op["beta"] = *beta;
  if (dimension) op["N"] = *dimension;
  // The automatic q* follows the new operator.
  if (k || dimension) op["qstar"] = nullptr;
  if (alpha) {
    if (nl["builtin"] != "pure_power") field_error("/sweep/alpha", "needs a pure_power nonlinearity");
    nl["alpha"] = *alpha;
  }
  Config out = build(std::move(op), std::move(nl));
  out.shooting = base.shooting;
  out.tolerances = base.tolerances;
  out.out_dir = base.out_dir;
  out.format = base.format;
  return out;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::filesystem::path resolve_out_dir(const Config& cfg) {
  if (const char* env = std::getenv("QLGS_OUT"); env && *env) return env;
  return cfg.out_dir;
}

ProfileMeta meta_of(const Config& cfg) {
  return {fnv1a_hex(cfg.blocks.operator_json), fnv1a_hex(cfg.blocks.nonlinearity_json)};
}

void write_profile_json(std::ostream& os, const Profile& profile, const ProfileMeta& meta,
                        const OperatorSpec& op) {
  const auto r = profile.grid().nodes();
  json j;
  j["meta"] = {{"operator_hash", meta.operator_hash},
               {"nonlinearity_hash", meta.nonlinearity_hash},
               {"operator", op.describe()}};
  j["N"] = profile.grid().dimension();
  j["R_max"] = profile.grid().r_max();
  j["M"] = profile.grid().cells();
  j["u0"] = profile.center_value();
  j["r"] = std::vector<double>(r.begin(), r.end());
  j["u"] = std::vector<double>(profile.u().begin(), profile.u().end());
  j["du"] = std::vector<double>(profile.du().begin(), profile.du().end());
  if (const auto& t = profile.tail())
    j["tail"] = {{"start", t->start}, {"amplitude", t->amplitude}, {"exponent", t->exponent}};
  else
    j["tail"] = nullptr;
  json norms = json::object();
  for (const auto& t : op.terms())
    norms["grad_" + json(t.exponent).dump()] = grad_norm(profile, t.exponent);
  norms["L_2"] = lebesgue_norm(profile, 2.0);
  j["norms"] = norms;
  os << j.dump() << '\n';
}

void write_profile_csv(std::ostream& os, const Profile& profile) {
  const auto r = profile.grid().nodes();
  os << "r,u,du\n";
  char buf[96];
  for (std::size_t i = 0; i < r.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", r[i], profile.u()[i], profile.du()[i]);
    os << buf;
  }
}

StoredProfile read_profile_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read profile file " + path.string());
  json j;
  try {
    j = json::parse(in);
    auto r = j.at("r").get<std::vector<double>>();
    auto u = j.at("u").get<std::vector<double>>();
    auto du = j.at("du").get<std::vector<double>>();
    if (u.size() != r.size() || du.size() != r.size())
      throw Error("profile arrays r, u, du differ in length");
    std::optional<PowerTail> tail;
    if (j.contains("tail") && !j["tail"].is_null())
      tail = PowerTail{j["tail"].at("start").get<double>(), j["tail"].at("amplitude").get<double>(),
                       j["tail"].at("exponent").get<double>()};
    auto grid = RadialGrid::from_nodes(std::move(r), j.at("N").get<int>());
    ProfileMeta meta{j.at("meta").at("operator_hash").get<std::string>(),
                     j.at("meta").at("nonlinearity_hash").get<std::string>()};
    return {meta, Profile(grid, std::move(u), std::move(du), tail)};
  } catch (const json::exception& e) {
    throw Error(path.string() + ": malformed profile: " + e.what());
  }
}

std::string certificate_json(const CertificateReport& rep, const CertificateTolerances& tol) {
  json j;
  j["pohozaev_residual"] = rep.pohozaev_residual;
  j["nehari_residual"] = rep.nehari_residual;
  j["action_relation_residual"] = rep.action_relation_residual;
  j["action"] = rep.action;
  j["positive"] = rep.positive;
  j["positivity_violation"] = rep.positivity_violation ? json(*rep.positivity_violation) : json(nullptr);
  j["monotone"] = rep.monotone;
  j["decay_statistic"] = {{"outer_half_sup", rep.decay.outer_half_sup},
                          {"sup_to_penultimate_decade", rep.decay.sup_to_penultimate_decade},
                          {"sup_full", rep.decay.sup_full},
                          {"relative_change", rep.decay.relative_change},
                          {"finite", rep.decay.finite}};
  j["chain_identity_residual"] =
      rep.chain_identity_residual ? json(*rep.chain_identity_residual) : json(nullptr);
  j["pass"] = {{"pohozaev", rep.pohozaev_pass},
               {"nehari", rep.nehari_pass},
               {"action_relation", rep.action_relation_pass},
               {"positivity", rep.positive},
               {"decay", rep.decay_pass}};
  j["passed"] = rep.passed;
  j["tolerances"] = {{"pohozaev", tol.pohozaev},
                     {"nehari", tol.nehari},
                     {"action_relation", tol.action_relation},
                     {"tail_threshold", tol.tail_threshold},
                     {"decay_change", tol.decay_change}};
  return j.dump(2) + "\n";
}

std::string path_report_json(const PathReport& rep) {
  json j;
  j["t"] = rep.t;
  j["value"] = rep.value;
  j["tau"] = rep.tau ? json(*rep.tau) : json(nullptr);
  j["level"] = rep.level;
  j["t_at_max"] = rep.t_at_max;
  j["endpoint_value"] = rep.endpoint_value;
  return j.dump() + "\n";
}

std::string nonexistence_json(const NonexistenceCertificate& cert) {
  json j;
  j["alpha"] = cert.alpha;
  j["N"] = cert.dimension;
  j["k"] = cert.order;
  j["beta"] = cert.beta;
  j["coefficients"] = cert.coefficients;
  j["certified"] = cert.certified;
  j["verdict"] = cert.verdict;
  return j.dump(2) + "\n";
}

std::string side_name(Side side) {
  switch (side) {
    case Side::Low: return "low";
    case Side::High: return "high";
    default: return "unknown";
  }
}

void write_scan(std::ostream& os, const std::vector<ScanRow>& rows, OutputFormat format) {
  if (format == OutputFormat::Json) {
    json a = json::array();
    for (const auto& row : rows)
      a.push_back({{"u0", row.u0},
                   {"outcome", row.outcome},
                   {"event_radius", std::isnan(row.event_radius) ? json(nullptr) : json(row.event_radius)},
                   {"side", side_name(row.side)}});
    os << a.dump(2) << '\n';
    return;
  }
  os << "u0,outcome,event_radius,side\n";
  char buf[64];
  for (const auto& row : rows) {
    std::snprintf(buf, sizeof buf, "%.17g", row.u0);
    os << buf << ",\"" << row.outcome << "\",";
    if (!std::isnan(row.event_radius)) {
      std::snprintf(buf, sizeof buf, "%.17g", row.event_radius);
      os << buf;
    }
    os << ',' << side_name(row.side) << '\n';
  }
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

}  // namespace qlgs
