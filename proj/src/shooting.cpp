// shooting.cpp
#include "qlgs/shooting.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "qlgs/quadrature.hpp"

namespace qlgs {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
// Zero-mass trajectories are integrated out to this multiple of R_max.
constexpr double kFarFieldFactor = 1e4;

double ipow(double x, int n) {
  double r = 1.0;
  for (int i = 0; i < n; ++i) r *= x;
  return r;
}

// y = (u, v, J) with v = Phi(u') and J = int_0^r s^{N-1} g(u) ds.
using State = std::array<double, 3>;

struct RadialOde {
  const NonlinearitySpec& spec;
  const OperatorSpec& op;
  int n;

  State operator()(double r, const State& y) const {
    const double gu = spec.g(y[0]);
    return {op.invert_flux(y[1]), -gu - (n - 1) * y[1] / r, ipow(r, n - 1) * gu};
  }
};

// Dormand-Prince 5(4).
struct StepResult {
  State y;
  double error;
};

StepResult dp45_step(const RadialOde& f, double r, const State& y, double h, double rtol,
                     double atol) {
  static constexpr double a21 = 1.0 / 5.0;
  static constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
  static constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
  static constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0,
                          a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
  static constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0,
                          a64 = 49.0 / 176.0, a65 = -5103.0 / 18656.0;
  static constexpr double b1 = 35.0 / 384.0, b3 = 500.0 / 1113.0, b4 = 125.0 / 192.0,
                          b5 = -2187.0 / 6784.0, b6 = 11.0 / 84.0;
  static constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0,
                          e5 = -17253.0 / 339200.0, e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;

  auto axpy = [&](std::initializer_list<std::pair<double, const State*>> terms) {
    State out = y;
    for (const auto& [c, k] : terms)
      for (int i = 0; i < 3; ++i) out[i] += h * c * (*k)[i];
    return out;
  };

  const State k1 = f(r, y);
  const State k2 = f(r + h / 5.0, axpy({{a21, &k1}}));
  const State k3 = f(r + 3.0 * h / 10.0, axpy({{a31, &k1}, {a32, &k2}}));
  const State k4 = f(r + 4.0 * h / 5.0, axpy({{a41, &k1}, {a42, &k2}, {a43, &k3}}));
  const State k5 = f(r + 8.0 * h / 9.0, axpy({{a51, &k1}, {a52, &k2}, {a53, &k3}, {a54, &k4}}));
  const State k6 =
      f(r + h, axpy({{a61, &k1}, {a62, &k2}, {a63, &k3}, {a64, &k4}, {a65, &k5}}));
  const State y5 = axpy({{b1, &k1}, {b3, &k3}, {b4, &k4}, {b5, &k5}, {b6, &k6}});
  const State k7 = f(r + h, y5);

  double err = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double e =
        h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
    const double sc = atol + rtol * std::max(std::abs(y[i]), std::abs(y5[i]));
    err = std::max(err, std::abs(e) / sc);
  }
  return {y5, err};
}

struct Trajectory {
  ShotOutcome outcome = Inconclusive{"not integrated", false};
  Side side = Side::Unknown;
  double asymptote = kNaN;
  double terminal_r = 0.0;
  bool tentative = false;
  // Local decay exponent -r u'/u at the node nearest R_max/2.
  double half_exponent = kNaN;
  std::vector<double> u;
  std::vector<double> du;
  std::vector<FluxCheckpoint> checkpoints;
};

bool zero_mass(const NonlinearitySpec& spec) { return !is_positive_mass(spec.regime()); }

// Far-field classification at R_max for trajectories without an event.
void classify_terminal(Trajectory& t, double u0, double R, double uR, double wR,
                       const NonlinearitySpec& spec, const OperatorSpec& op,
                       const ShootingConfig& cfg) {
  t.terminal_r = R;
  if (zero_mass(spec)) {
    const double kappa = op.harmonic_tail_exponent();
    const double a = uR + R * wR / kappa;
    const double b = -std::pow(R, kappa + 1.0) * wR / kappa;
    t.asymptote = a;
    const double fitted = uR > 0.0 ? -R * wR / uR : kNaN;
    if (std::abs(a) <= cfg.decay_asymptote_rel * u0 && wR < 0.0 && uR > 0.0 &&
        std::abs(fitted - kappa) <= cfg.decay_exponent_tol) {
      t.outcome = Decay{fitted, uR, wR};
      t.side = a < 0.0 ? Side::High : Side::Low;
    } else if (a < 0.0) {
      const double rc = b > 0.0 ? std::pow(b / -a, 1.0 / kappa) : R;
      t.outcome = Crossing{rc, true};
      t.side = Side::High;
    } else if (fitted < t.half_exponent) {
      // Decay slower than the harmonic tail and slowing further.
      t.outcome = Inconclusive{"positive far-field limit", true};
      t.side = Side::Low;
    } else {
      // Still steepening towards the harmonic tail; may cross beyond R_max.
      t.outcome = Inconclusive{"far field not reached", false};
      t.side = Side::Low;
      t.tentative = true;
    }
    return;
  }
  if (std::abs(uR) < cfg.decay_u_rel * u0 && std::abs(wR) < cfg.decay_du && wR <= 0.0) {
    t.outcome = Decay{uR > 0.0 ? -wR / uR : kNaN, uR, wR};
    t.side = Side::Low;
  } else {
    t.outcome = Inconclusive{"no event before R_max", false};
    t.side = uR > 0.0 ? Side::Low : Side::Unknown;
    t.tentative = true;
  }
}

Trajectory run(double u0, const NonlinearitySpec& spec, const OperatorSpec& op,
               const ShootingConfig& cfg, const RadialGrid& grid, bool full) {
  if (!(u0 > 0.0) || !std::isfinite(u0)) throw InvalidArgument("shooting: u0 must be positive");
  const auto r = grid.nodes();
  const int n = op.dimension();
  const std::size_t m = r.size() - 1;
  const RadialOde ode{spec, op, n};
  const double delta = startup_radius(cfg);
  const double g0 = spec.g(u0);

  Trajectory t;
  if (full) {
    t.u.assign(r.size(), 0.0);
    t.du.assign(r.size(), 0.0);
  }

  // Series startup: Phi(u') = -g(u0) r / N near the origin.
  const auto series_du = [&](double x) { return op.invert_flux(-g0 * x / n); };
  const auto series_u = [&](double x) {
    return x == 0.0 ? u0 : u0 + quad::gauss_legendre(series_du, 0.0, x);
  };
  std::size_t i = 0;
  for (; i <= m && r[i] <= delta; ++i)
    if (full) {
      t.u[i] = series_u(r[i]);
      t.du[i] = series_du(r[i]);
    }

  const auto fill_rest = [&](std::size_t from, double uv, double dv) {
    if (!full) return;
    for (std::size_t k = from; k <= m; ++k) {
      t.u[k] = uv;
      t.du[k] = dv;
    }
  };

  if (g0 == 0.0) {
    t.outcome = Inconclusive{"u0 is a zero of g (constant solution)", false};
    t.side = Side::Unknown;
    fill_rest(i, u0, 0.0);
    return t;
  }

  bool event = false;
  if (g0 < 0.0) {
    // u' > 0 from the start.
    t.outcome = Rebound{0.0};
    t.side = Side::Low;
    t.terminal_r = 0.0;
    event = true;
    if (!full) return t;
  }

  std::vector<std::size_t> checkpoint_nodes;
  for (int k = 1; k <= 16; ++k) checkpoint_nodes.push_back(m * k / 16);
  std::size_t next_checkpoint = 0;
  const std::size_t half_node = std::min(m, grid.lower_index(0.5 * r[m]));

  double rr = delta;
  State y{series_u(delta), -g0 * delta / n, g0 * ipow(delta, n) / n};
  double h = delta;
  long steps = 0;

  for (; i <= m; ++i) {
    const double target = r[i];
    while (rr < target) {
      const double remaining = target - rr;
      const bool last = h >= remaining;
      const double step = last ? remaining : h;
      const StepResult sr = dp45_step(ode, rr, y, step, cfg.rtol, cfg.atol);
      ++steps;
      if (!(sr.error <= 1.0) || !std::isfinite(sr.y[0]) || !std::isfinite(sr.y[1])) {
        h = step * std::max(0.1, 0.9 * std::pow(std::isfinite(sr.error) ? sr.error : 1e10, -0.2));
        if (h < 1e-14 * std::max(1.0, rr) || steps > cfg.max_steps) {
          if (!event) {
            t.outcome = Inconclusive{"stiffness: step size collapse", false};
            t.side = Side::Unknown;
            t.terminal_r = rr;
          }
          fill_rest(i, y[0], op.invert_flux(y[1]));
          return t;
        }
        continue;
      }

      if (!event) {
        const bool crossed = sr.y[0] <= 0.0;
        const bool turned = y[1] < 0.0 && sr.y[1] >= 0.0 && sr.y[0] > 0.0;
        if (crossed || turned) {
          const int comp = crossed ? 0 : 1;
          double lo = 0.0, hi = 1.0;
          while ((hi - lo) * step > cfg.event_tol && hi - lo > 1e-16) {
            const double mid = 0.5 * (lo + hi);
            const State ym = dp45_step(ode, rr, y, mid * step, cfg.rtol, cfg.atol).y;
            const bool past = crossed ? ym[0] <= 0.0 : ym[1] >= 0.0;
            (past ? hi : lo) = mid;
          }
          (void)comp;
          const double re = rr + 0.5 * (lo + hi) * step;
          if (crossed) {
            t.outcome = Crossing{re, false};
            t.side = Side::High;
          } else {
            t.outcome = Rebound{re};
            t.side = Side::Low;
          }
          t.terminal_r = re;
          event = true;
          if (!full) return t;
        }
      }

      rr = last ? target : rr + step;
      y = sr.y;
      if (steps > cfg.max_steps) {
        if (!event) {
          t.outcome = Inconclusive{"step budget exhausted", false};
          t.side = Side::Unknown;
          t.terminal_r = rr;
        }
        fill_rest(i, y[0], op.invert_flux(y[1]));
        return t;
      }
      const double grow = sr.error > 0.0 ? 0.9 * std::pow(sr.error, -0.2) : 5.0;
      h = step * std::clamp(grow, 0.2, 5.0);
      if (last) h = std::max(h, step);
    }
    if (full) {
      t.u[i] = y[0];
      t.du[i] = op.invert_flux(y[1]);
    }
    if (i == half_node && y[0] > 0.0) t.half_exponent = -r[i] * op.invert_flux(y[1]) / y[0];
    if (next_checkpoint < checkpoint_nodes.size() && i == checkpoint_nodes[next_checkpoint]) {
      t.checkpoints.push_back({r[i], ipow(r[i], n - 1) * y[1], y[2]});
      ++next_checkpoint;
    }
  }

  if (!event) classify_terminal(t, u0, r[m], y[0], op.invert_flux(y[1]), spec, op, cfg);
  return t;
}

// With far_field, zero-mass trajectories are followed beyond R_max on a
// logarithmic extension so that the far-field constant is not biased by
// source-term corrections. Scans stay on [0, R_max].
std::shared_ptr<const RadialGrid> grid_for(const ShootingConfig& cfg, const OperatorSpec& op,
                                           const NonlinearitySpec& spec, bool far_field) {
  auto base = RadialGrid::graded(cfg.cells, cfg.r_max, op.dimension());
  if (!far_field || is_positive_mass(spec.regime())) return base;
  return RadialGrid::with_far_field(*base, kFarFieldFactor, std::max<std::size_t>(64, cfg.cells / 8));
}

std::vector<double> cached_exponents(const OperatorSpec& op) {
  std::vector<double> e;
  for (const auto& t : op.terms()) e.push_back(t.exponent);
  if (std::find(e.begin(), e.end(), op.p()) == e.end()) e.push_back(op.p());
  return e;
}

template <class Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  if (workers <= 1) {
    for (std::size_t k = 0; k < count; ++k) fn(k);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t k = next++; k < count; k = next++) {
        try {
          fn(k);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

// Tentative sides (no decisive far-field evidence) count as Unknown unless
// the caller is refining inside an established bracket.
Classification classify_on(double u0, const NonlinearitySpec& spec, const OperatorSpec& op,
                           const ShootingConfig& cfg, const RadialGrid& grid,
                           bool accept_tentative) {
  auto t = run(u0, spec, op, cfg, grid, false);
  if (t.side == Side::Unknown || (t.tentative && !accept_tentative)) {
    // Refine once before giving up on the shot.
    ShootingConfig tight = cfg;
    tight.rtol = cfg.rtol * 1e-2;
    tight.atol = cfg.atol * 1e-2;
    tight.max_steps = cfg.max_steps * 4;
    t = run(u0, spec, op, tight, grid, false);
  }
  const Side side = t.tentative && !accept_tentative ? Side::Unknown : t.side;
  return {t.outcome, side, t.asymptote, t.terminal_r};
}

}  // namespace

std::string outcome_name(const ShotOutcome& outcome) {
  struct {
    std::string operator()(const Crossing& c) const {
      return c.extrapolated ? "crossing(extrapolated)" : "crossing";
    }
    std::string operator()(const Rebound&) const { return "rebound"; }
    std::string operator()(const Decay&) const { return "decay"; }
    std::string operator()(const Inconclusive& i) const { return "inconclusive: " + i.reason; }
  } visitor;
  return std::visit(visitor, outcome);
}

double event_radius(const ShotOutcome& outcome) {
  if (const auto* c = std::get_if<Crossing>(&outcome)) return c->radius;
  if (const auto* b = std::get_if<Rebound>(&outcome)) return b->radius;
  return kNaN;
}

double startup_radius(const ShootingConfig& cfg) {
  return 1e-6 * std::max(1.0, cfg.r_max / static_cast<double>(cfg.cells));
}

Shot integrate_shot(double u0, const NonlinearitySpec& spec, const OperatorSpec& op,
                    const ShootingConfig& cfg) {
  const auto grid = grid_for(cfg, op, spec, false);
  auto t = run(u0, spec, op, cfg, *grid, true);
  const auto exps = cached_exponents(op);
  Profile profile(grid, std::move(t.u), std::move(t.du), std::nullopt, exps);
  return {u0, t.outcome, t.side, std::move(profile), t.asymptote, std::move(t.checkpoints)};
}

Classification classify_shot(double u0, const NonlinearitySpec& spec, const OperatorSpec& op,
                             const ShootingConfig& cfg) {
  const auto grid = grid_for(cfg, op, spec, false);
  return classify_on(u0, spec, op, cfg, *grid, false);
}

std::pair<double, double> default_scan_range(const NonlinearitySpec& spec) {
  const double zeta = spec.zeta();
  double lo = 0.1 * zeta;
  const double hi = 50.0 * zeta;
  if (is_positive_mass(spec.regime())) {
    const auto G = [&spec](double s) { return spec.G(s) > 0.0 ? 1.0 : -1.0; };
    if (const auto root = first_root(G, 1e-8 * zeta, zeta, 4096, 1e-13))
      lo = *root * (1.0 + 1e-6);
    else
      lo = zeta;
  }
  return {lo, hi};
}

std::vector<ScanRow> scan_shots(const NonlinearitySpec& spec, const OperatorSpec& op,
                                const ShootingConfig& cfg, const ScanSink& sink) {
  const auto [dlo, dhi] = default_scan_range(spec);
  const double lo = cfg.scan_lo.value_or(dlo);
  const double hi = cfg.scan_hi.value_or(dhi);
  if (!(lo > 0.0) || !(hi >= lo)) throw InvalidArgument("scan range must satisfy 0 < lo <= hi");
  const int count = cfg.scan_count;
  if (count < 1) return {};
  const auto grid = grid_for(cfg, op, spec, false);

  std::vector<ScanRow> rows(static_cast<std::size_t>(count));
  parallel_for(rows.size(), cfg.workers, [&](std::size_t k) {
    const double u0 = count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(k) / (count - 1));
    const auto c = classify_on(u0, spec, op, cfg, *grid, false);
    rows[k] = {u0, outcome_name(c.outcome), event_radius(c.outcome), c.side};
  });
  if (sink)
    for (const auto& row : rows) sink(row);
  return rows;
}

GroundState bisect_ground_state(double a, double b, const NonlinearitySpec& spec,
                                const OperatorSpec& op, const ShootingConfig& cfg) {
  const auto grid = grid_for(cfg, op, spec, true);
  const auto ca = classify_on(a, spec, op, cfg, *grid, true);
  const auto cb = classify_on(b, spec, op, cfg, *grid, true);
  if (ca.side == Side::Unknown || cb.side == Side::Unknown || ca.side == cb.side)
    throw Error("bisect_ground_state: [" + std::to_string(a) + ", " + std::to_string(b) +
                "] is not a (low, high) bracket");
  double low = ca.side == Side::Low ? a : b;
  double high = ca.side == Side::Low ? b : a;

  int steps = 0;
  while (std::abs(high - low) > cfg.bisection_rel_tol * std::max(low, high)) {
    const double mid = 0.5 * (low + high);
    if (mid == low || mid == high) break;
    const auto c = classify_on(mid, spec, op, cfg, *grid, true);
    ++steps;
    if (c.side == Side::Unknown) break;
    (c.side == Side::Low ? low : high) = mid;
  }

  auto t = run(low, spec, op, cfg, *grid, true);
  ShotOutcome outcome = t.outcome;
  std::optional<PowerTail> tail;

  if (zero_mass(spec)) {
    const auto r = grid->nodes();
    const std::size_t m = r.size() - 1;
    const double kappa = op.harmonic_tail_exponent();
    const double amplitude = -std::pow(r[m], kappa + 1.0) * t.du[m] / kappa;
    if (amplitude > 0.0) tail = PowerTail{r[m], amplitude, kappa};
  } else {
    const auto r = grid->nodes();
    const std::size_t m = r.size() - 1;
    // Keep the trajectory up to its closest approach to (0, 0) before it
    // departs, then continue with the fitted exponential rate.
    double er = event_radius(t.outcome);
    std::size_t end = std::isnan(er) ? m : std::min(m, grid->lower_index(er));
    if (end > 0 && r[end] >= er) --end;
    std::size_t best = 1;
    double best_val = std::numeric_limits<double>::infinity();
    for (std::size_t k = 1; k <= end; ++k) {
      const double v = std::abs(t.u[k]) + std::abs(t.du[k]);
      if (v < best_val) { best_val = v; best = k; }
    }
    std::size_t fit = best;
    while (fit > 1 && std::abs(t.u[fit]) + std::abs(t.du[fit]) < 1e3 * best_val) --fit;
    double mu = t.u[fit] > 0.0 && t.du[fit] < 0.0 ? -t.du[fit] / t.u[fit] : 1.0;
    const double ub = t.u[best];
    for (std::size_t k = best + 1; k <= m; ++k) {
      t.u[k] = ub * std::exp(-mu * (r[k] - r[best]));
      t.du[k] = -mu * t.u[k];
    }
    outcome = Decay{mu, t.u[m], t.du[m]};
  }

  const auto exps = cached_exponents(op);
  Profile profile(grid, std::move(t.u), std::move(t.du), tail, exps);
  return {low, std::move(profile), outcome, std::min(low, high), std::max(low, high), steps,
          std::move(t.checkpoints)};
}

namespace {

std::vector<std::pair<double, double>> brackets_of(const std::vector<ScanRow>& rows) {
  std::vector<std::pair<double, double>> out;
  for (std::size_t k = 0; k + 1 < rows.size(); ++k) {
    const Side a = rows[k].side, b = rows[k + 1].side;
    if (a != Side::Unknown && b != Side::Unknown && a != b) out.emplace_back(rows[k].u0, rows[k + 1].u0);
  }
  return out;
}

}  // namespace

GroundState find_ground_state(const NonlinearitySpec& spec, const OperatorSpec& op,
                              const ShootingConfig& cfg, const ScanSink& sink) {
  auto rows = scan_shots(spec, op, cfg, sink);
  const auto brackets = brackets_of(rows);
  if (brackets.empty())
    throw NoBracket("no (low, high) bracket in the u(0) scan", std::move(rows));
  return bisect_ground_state(brackets.front().first, brackets.front().second, spec, op, cfg);
}

MultiStartResult multi_start_ground_state(const NonlinearitySpec& spec, const OperatorSpec& op,
                                          const ShootingConfig& cfg, const ScanSink& sink) {
  auto rows = scan_shots(spec, op, cfg, sink);
  const auto brackets = brackets_of(rows);
  if (brackets.empty())
    throw NoBracket("no (low, high) bracket in the u(0) scan", std::move(rows));

  std::vector<std::optional<Candidate>> slots(brackets.size());
  parallel_for(brackets.size(), cfg.workers, [&](std::size_t k) {
    ShootingConfig inner = cfg;
    inner.workers = 1;
    auto gs = bisect_ground_state(brackets[k].first, brackets[k].second, spec, op, inner);
    const double action = solution_action(gs.profile, op);
    slots[k] = Candidate{std::move(gs), action};
  });
  std::vector<Candidate> candidates;
  for (auto& s : slots) candidates.push_back(std::move(*s));

  const auto decays = [](const Candidate& c) {
    return std::holds_alternative<Decay>(c.state.outcome);
  };
  const bool any_decay = std::any_of(candidates.begin(), candidates.end(), decays);
  const Candidate* best = nullptr;
  for (const auto& c : candidates) {
    if (any_decay && !decays(c)) continue;
    if (!best) { best = &c; continue; }
    const double scale = std::max(std::abs(c.action), std::abs(best->action));
    const bool tie = std::abs(c.action - best->action) <= 1e-6 * scale;
    if (tie ? c.state.u0 < best->state.u0 : c.action < best->action) best = &c;
  }
  GroundState chosen = best->state;
  return {std::move(chosen), std::move(candidates), std::move(rows)};
}

double solution_action(const Profile& profile, const OperatorSpec& op) {
  double s = 0.0;
  for (const auto& t : op.terms()) s += t.coefficient * profile.grad_power(t.exponent);
  return s / op.dimension();
}

}  // namespace qlgs
