// qlgs: batch front end for the radial ground-state solver.
#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <thread>

#include "qlgs/certificates.hpp"
#include "qlgs/io.hpp"
#include "qlgs/shooting.hpp"
#include "qlgs/variational.hpp"

using namespace qlgs;

namespace {

enum Exit { kSolved = 0, kError = 1, kNoBracket = 2, kCertFail = 3 };

struct CommonFlags {
  std::string config;
  std::string out;
  unsigned workers = 0;
  std::size_t resolution = 0;
  double rtol = 0.0;
  std::string scan;
  std::string format;
};

void add_common(CLI::App* app, CommonFlags& f) {
  app->add_option("--config", f.config, "Problem configuration (JSON)")->required();
  app->add_option("--out", f.out, "Output directory (overrides QLGS_OUT and the config)");
  app->add_option("--workers", f.workers, "Worker threads (0 = hardware concurrency)");
  app->add_option("--resolution", f.resolution, "Grid cells M on [0, R_max]");
  app->add_option("--rtol", f.rtol, "Integrator relative tolerance");
  app->add_option("--scan", f.scan, "Shooting scan lo:hi:n");
  app->add_option("--format", f.format, "Export format")->check(CLI::IsMember({"json", "csv"}));
}

Config configure(const CommonFlags& f, const CLI::App& app) {
  Config cfg = load_config(f.config);
  if (app.count("--workers")) cfg.shooting.workers = f.workers;
  if (app.count("--resolution")) {
    if (f.resolution < 64) throw ConfigError("--resolution: at least 64 cells are required");
    cfg.shooting.cells = f.resolution;
  }
  if (app.count("--rtol")) {
    if (!(f.rtol > 0.0)) throw ConfigError("--rtol: must be positive");
    cfg.shooting.rtol = f.rtol;
  }
  if (!f.scan.empty()) {
    double lo = 0.0, hi = 0.0;
    int n = 0;
    char tail = 0;
    if (std::sscanf(f.scan.c_str(), "%lf:%lf:%d%c", &lo, &hi, &n, &tail) != 3 || !(lo > 0.0) ||
        !(hi >= lo) || n < 1)
      throw ConfigError("--scan: expected lo:hi:n with 0 < lo <= hi and n >= 1");
    cfg.shooting.scan_lo = lo;
    cfg.shooting.scan_hi = hi;
    cfg.shooting.scan_count = n;
  }
  if (!f.format.empty()) cfg.format = f.format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
  cfg.out_dir = f.out.empty() ? resolve_out_dir(cfg) : std::filesystem::path(f.out);
  return cfg;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

void print_certificate(const CertificateReport& rep, const CertificateTolerances& tol) {
  const auto line = [](const char* name, const std::string& value, const std::string& limit, bool ok) {
    std::printf("  %-18s %-12s %-12s %s\n", name, value.c_str(), limit.c_str(), ok ? "PASS" : "FAIL");
  };
  std::printf("  %-18s %-12s %-12s %s\n", "check", "value", "tolerance", "result");
  line("pohozaev", fmt(rep.pohozaev_residual), fmt(tol.pohozaev), rep.pohozaev_pass);
  line("nehari", fmt(rep.nehari_residual), fmt(tol.nehari), rep.nehari_pass);
  line("action relation", fmt(rep.action_relation_residual), fmt(tol.action_relation),
       rep.action_relation_pass);
  line("positivity", rep.positive ? "u > 0" : "r = " + fmt(rep.positivity_violation.value_or(NAN)),
       "-", rep.positive);
  line("decay statistic", fmt(rep.decay.relative_change), fmt(tol.decay_change), rep.decay_pass);
  std::printf("  action I(u) = %.12g\n", rep.action);
  if (rep.chain_identity_residual)
    std::printf("  chain identity residual = %s\n", fmt(*rep.chain_identity_residual).c_str());
  std::printf("  certificate: %s\n", rep.passed ? "PASSED" : "FAILED");
}

std::optional<NonexistenceCertificate> chain_certificate(const Config& cfg) {
  const auto alpha = cfg.spec.pure_power_alpha();
  if (!alpha || cfg.op.kind() != OperatorKind::BIChain) return std::nullopt;
  return nonexistence_certificate(*alpha, cfg.op.dimension(), cfg.op.order(), cfg.op.beta());
}

std::string scan_text(const std::vector<ScanRow>& rows, OutputFormat format) {
  std::ostringstream ss;
  write_scan(ss, rows, format);
  return ss.str();
}

std::string ext(OutputFormat f) { return f == OutputFormat::Csv ? ".csv" : ".json"; }

int cmd_solve(const Config& cfg) {
  const auto& dir = cfg.out_dir;
  std::printf("operator: %s\nnonlinearity: %s, zeta = %g\n", cfg.op.describe().c_str(),
              cfg.spec.name().c_str(), cfg.spec.zeta());
  for (const auto& v : validate_assumptions(cfg.spec, cfg.op).verdicts)
    std::printf("  %-12s %-4s %s\n", v.name.c_str(), v.passed ? "ok" : "FAIL", v.evidence.c_str());
  const auto cert = chain_certificate(cfg);
  if (cert) write_file(dir / "nonexistence.json", nonexistence_json(*cert));

  std::optional<MultiStartResult> found;
  try {
    found = multi_start_ground_state(cfg.spec, cfg.op, cfg.shooting);
  } catch (const NoBracket& e) {
    write_file(dir / ("scan" + ext(cfg.format)), scan_text(e.scan(), cfg.format));
    std::printf("no (low, high) bracket in %zu shots; scan table written to %s\n", e.scan().size(),
                (dir / ("scan" + ext(cfg.format))).c_str());
    if (cert) std::printf("%s\n", cert->verdict.c_str());
    return kNoBracket;
  }

  const auto& res = *found;
  const auto& gs = res.best;
  const auto rep = certify(gs.profile, cfg.spec, cfg.op, cfg.tolerances);
  const auto meta = meta_of(cfg);
  {
    std::ostringstream ss;
    write_profile_json(ss, gs.profile, meta, cfg.op);
    write_file(dir / "profile.json", ss.str());
  }
  if (cfg.format == OutputFormat::Csv) {
    std::ostringstream ss;
    write_profile_csv(ss, gs.profile);
    write_file(dir / "profile.csv", ss.str());
  }
  write_file(dir / "certificate.json", certificate_json(rep, cfg.tolerances));
  write_file(dir / ("scan" + ext(cfg.format)), scan_text(res.scan, cfg.format));
  try {
    const auto seed = default_seed(cfg.spec, cfg.op);
    const FunctionalParams params(cfg.spec, cfg.op, 1.0, lambda0_for_seed(seed, cfg.spec));
    write_file(dir / "path.json", path_report_json(dilation_curve(seed, params)));
  } catch (const SeedRejected& e) {
    std::fprintf(stderr, "note: no dilation path written: %s\n", e.what());
  }

  std::printf("u(0) = %.15g (outcome %s, %zu candidate(s))\n", gs.u0,
              outcome_name(gs.outcome).c_str(), res.candidates.size());
  print_certificate(rep, cfg.tolerances);
  std::printf("artifacts written to %s\n", dir.c_str());
  return rep.passed ? kSolved : kCertFail;
}

int cmd_certify(const Config& cfg, const std::string& file, bool write) {
  const auto stored = read_profile_json(file);
  const auto meta = meta_of(cfg);
  if (stored.meta.operator_hash != meta.operator_hash ||
      stored.meta.nonlinearity_hash != meta.nonlinearity_hash)
    throw Error(file + ": profile was computed for a different operator or nonlinearity");
  const auto rep = certify(stored.profile, cfg.spec, cfg.op, cfg.tolerances);
  if (write) write_file(cfg.out_dir / "certificate.json", certificate_json(rep, cfg.tolerances));
  print_certificate(rep, cfg.tolerances);
  return rep.passed ? kSolved : kCertFail;
}

struct SweepCell {
  std::optional<double> alpha;
  std::optional<int> k;
  std::optional<double> beta;
  std::optional<int> dimension;
  std::optional<std::size_t> resolution;
};

struct SweepRow {
  SweepCell cell;
  std::string status;
  double u0 = NAN, action = NAN, pohozaev = NAN, nehari = NAN, relation = NAN;
  int code = kError;
  std::string detail;
};

template <class T>
std::vector<std::optional<T>> axis(const std::optional<std::vector<T>>& v) {
  if (!v) return {std::nullopt};
  return {v->begin(), v->end()};
}

SweepRow run_cell(const Config& base, const SweepCell& cell) {
  SweepRow row;
  row.cell = cell;
  row.status = "error";
  try {
    Config cfg = with_overrides(base, cell.alpha, cell.k, cell.beta, cell.dimension);
    if (cell.resolution) cfg.shooting.cells = *cell.resolution;
    cfg.shooting.workers = 1;
    try {
      const auto res = multi_start_ground_state(cfg.spec, cfg.op, cfg.shooting);
      const auto rep = certify(res.best.profile, cfg.spec, cfg.op, cfg.tolerances);
      row.u0 = res.best.u0;
      row.action = rep.action;
      row.pohozaev = rep.pohozaev_residual;
      row.nehari = rep.nehari_residual;
      row.relation = rep.action_relation_residual;
      row.status = rep.passed ? "certified" : "certification_failed";
      row.code = rep.passed ? kSolved : kCertFail;
    } catch (const NoBracket&) {
      const auto cert = chain_certificate(cfg);
      row.status = cert && cert->certified ? "nonexistent" : "no_bracket";
      row.code = kNoBracket;
    }
  } catch (const std::exception& e) {
    row.detail = e.what();
  }
  return row;
}

std::string sweep_table(const Config& base, const std::vector<SweepRow>& rows, OutputFormat format) {
  const auto num = [](double v) {
    if (std::isnan(v)) return std::string();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.15g", v);
    return std::string(buf);
  };
  std::ostringstream ss;
  const auto alpha = base.spec.pure_power_alpha();
  if (format == OutputFormat::Json) {
    ss << "[\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto& r = rows[i];
      const auto field = [&](const char* key, const std::string& v, bool quote = false) {
        ss << "\"" << key << "\": " << (v.empty() ? "null" : quote ? "\"" + v + "\"" : v);
      };
      ss << "  {";
      field("alpha", num(r.cell.alpha.value_or(alpha.value_or(NAN)))), ss << ", ";
      field("k", r.cell.k ? std::to_string(*r.cell.k) : base.op.kind() == OperatorKind::BIChain
                                                            ? std::to_string(base.op.order())
                                                            : ""), ss << ", ";
      field("beta", num(r.cell.beta.value_or(base.op.beta()))), ss << ", ";
      field("N", std::to_string(r.cell.dimension.value_or(base.op.dimension()))), ss << ", ";
      field("M", std::to_string(r.cell.resolution.value_or(base.shooting.cells))), ss << ", ";
      field("status", r.status, true), ss << ", ";
      field("u0", num(r.u0)), ss << ", ";
      field("action", num(r.action)), ss << ", ";
      field("pohozaev", num(r.pohozaev)), ss << ", ";
      field("nehari", num(r.nehari)), ss << ", ";
      field("action_relation", num(r.relation));
      ss << "}" << (i + 1 < rows.size() ? "," : "") << "\n";
    }
    ss << "]\n";
    return ss.str();
  }
  ss << "alpha,k,beta,N,M,status,u0,action,pohozaev,nehari,action_relation\n";
  for (const auto& r : rows) {
    ss << num(r.cell.alpha.value_or(alpha.value_or(NAN))) << ',';
    if (r.cell.k)
      ss << *r.cell.k;
    else if (base.op.kind() == OperatorKind::BIChain)
      ss << base.op.order();
    ss << ',' << num(r.cell.beta.value_or(base.op.beta())) << ','
       << r.cell.dimension.value_or(base.op.dimension()) << ','
       << r.cell.resolution.value_or(base.shooting.cells) << ',' << r.status << ',' << num(r.u0)
       << ',' << num(r.action) << ',' << num(r.pohozaev) << ',' << num(r.nehari) << ','
       << num(r.relation) << '\n';
  }
  return ss.str();
}

int cmd_sweep(const Config& base, bool format_flag) {
  if (!base.sweep) throw ConfigError("field /sweep: required by the sweep command");
  const auto& s = *base.sweep;
  std::vector<SweepCell> cells;
  for (const auto& a : axis(s.alpha))
    for (const auto& k : axis(s.k))
      for (const auto& b : axis(s.beta))
        for (const auto& n : axis(s.dimension))
          for (const auto& m : axis(s.resolution)) cells.push_back({a, k, b, n, m});

  std::vector<SweepRow> rows(cells.size());
  unsigned workers = base.shooting.workers ? base.shooting.workers
                                           : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, cells.size()));
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < cells.size(); i = next++) rows[i] = run_cell(base, cells[i]);
    });
  for (auto& t : pool) t.join();

  // The sweep table defaults to CSV unless a format was requested explicitly.
  const OutputFormat format = format_flag ? base.format : OutputFormat::Csv;
  const std::string table = sweep_table(base, rows, format);
  write_file(base.out_dir / ("sweep" + ext(format)), table);
  std::fputs(table.c_str(), stdout);

  int code = kSolved;
  for (const auto& r : rows) {
    if (!r.detail.empty()) std::fprintf(stderr, "sweep cell failed: %s\n", r.detail.c_str());
    if (r.code == kError) code = kError;
    else if (r.code == kCertFail && code != kError) code = kCertFail;
    else if (r.code == kNoBracket && code == kSolved) code = kNoBracket;
  }
  return code;
}

int cmd_coeffs(int k, double beta) {
  const auto a = bi_chain_coefficients(k, beta);
  std::printf("%4s %24s %24s %10s\n", "j", "a_j", "taylor", "rel_diff");
  for (int j = 1; j <= k; ++j) {
    // (2 beta)^n C(2n, n) / 4^n, the x^n coefficient of (1 - 2 beta x)^{-1/2}.
    const int n = j - 1;
    const double taylor = std::exp(std::lgamma(2.0 * n + 1.0) - 2.0 * std::lgamma(n + 1.0) +
                                   n * std::log(2.0 * beta) - n * std::log(4.0));
    const double rel = std::abs(a[j - 1] - taylor) / taylor;
    std::printf("%4d %24.17g %24.17g %10.2e\n", j, a[j - 1], taylor, rel);
  }
  return kSolved;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Radial ground states of quasilinear elliptic equations"};
  app.require_subcommand(1);

  CommonFlags solve_flags, certify_flags, sweep_flags;
  auto* solve = app.add_subcommand("solve", "Find and certify a ground state");
  add_common(solve, solve_flags);

  auto* certify_cmd = app.add_subcommand("certify", "Re-certify a stored profile");
  add_common(certify_cmd, certify_flags);
  std::string profile_file;
  certify_cmd->add_option("profile", profile_file, "Profile JSON written by solve")->required();

  auto* sweep = app.add_subcommand("sweep", "Cartesian parameter sweep");
  add_common(sweep, sweep_flags);

  auto* coeffs = app.add_subcommand("coeffs", "Born-Infeld chain coefficients");
  int k = 0;
  double beta = 1.0;
  coeffs->add_option("--k", k, "Chain order")->required();
  coeffs->add_option("--beta", beta, "Born-Infeld parameter");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kError;
  }

  try {
    if (*solve) return cmd_solve(configure(solve_flags, *solve));
    if (*certify_cmd)
      return cmd_certify(configure(certify_flags, *certify_cmd), profile_file,
                         certify_cmd->count("--out") > 0);
    if (*sweep) return cmd_sweep(configure(sweep_flags, *sweep), sweep->count("--format") > 0);
    if (*coeffs) return cmd_coeffs(k, beta);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kError;
  }
  return kError;
}
