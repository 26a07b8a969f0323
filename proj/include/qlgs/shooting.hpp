// shooting.hpp
#ifndef QLGS_SHOOTING_HPP
#define QLGS_SHOOTING_HPP

#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qlgs/error.hpp"
#include "qlgs/nonlinearity.hpp"
#include "qlgs/operator.hpp"
#include "qlgs/radial.hpp"

namespace qlgs {

/// u reached zero at `radius`. Extrapolated crossings come from the
/// p-harmonic far field when the trajectory is still positive at R_max.
struct Crossing {
  double radius;
  bool extrapolated = false;
};

/// u' vanished while u > 0 (the trajectory turns back up).
struct Rebound {
  double radius;
};

struct Decay {
  /// Fitted algebraic exponent (zero mass) or exponential rate (positive mass).
  double fitted_exponent;
  double terminal_u;
  double terminal_du;
};

struct Inconclusive {
  std::string reason;
  /// True when the trajectory stays positive without decaying (undershoot).
  bool low_side = false;
};

using ShotOutcome = std::variant<Crossing, Rebound, Decay, Inconclusive>;

enum class Side { Low, High, Unknown };

std::string outcome_name(const ShotOutcome& outcome);
/// Event radius for Crossing/Rebound, NaN otherwise.
double event_radius(const ShotOutcome& outcome);

struct ShootingConfig {
  double rtol = 1e-10;
  double atol = 1e-14;
  double r_max = 50.0;
  std::size_t cells = 4096;
  /// Positive mass: |u| < decay_u_rel u0 and |u'| < decay_du at R_max.
  double decay_u_rel = 1e-8;
  double decay_du = 1e-6;
  /// Zero mass: |far-field constant| <= decay_asymptote_rel u0 and fitted
  /// exponent within decay_exponent_tol of (N-p)/(p-1).
  double decay_asymptote_rel = 1e-6;
  double decay_exponent_tol = 0.05;
  /// Relative bracket width at which bisection on u(0) stops.
  double bisection_rel_tol = 1e-13;
  double event_tol = 1e-10;
  std::optional<double> scan_lo;
  std::optional<double> scan_hi;
  int scan_count = 60;
  long max_steps = 4'000'000;
  /// Worker threads for scans; 0 picks the hardware concurrency.
  unsigned workers = 0;
};

/// F(r) = r^{N-1} Phi(u'(r)) and J(r) = int_0^r s^{N-1} g(u(s)) ds at a checkpoint.
struct FluxCheckpoint {
  double r;
  double flux;
  double source;
};

struct Shot {
  double u0;
  ShotOutcome outcome;
  Side side;
  Profile profile;
  /// Far-field constant a in u ~ a + b r^{-kappa} at R_max (zero mass), NaN otherwise.
  double asymptote;
  std::vector<FluxCheckpoint> checkpoints;
};

/// Integrates the radial flux-form ODE from r = 0 with u(0) = u0, u'(0) = 0
/// over the whole grid (continuing past events) and classifies the trajectory.
Shot integrate_shot(double u0, const NonlinearitySpec& spec, const OperatorSpec& op,
                    const ShootingConfig& cfg);

/// Classification only; stops at the first event.
struct Classification {
  ShotOutcome outcome;
  Side side;
  double asymptote;
  double terminal_r;
};
Classification classify_shot(double u0, const NonlinearitySpec& spec, const OperatorSpec& op,
                             const ShootingConfig& cfg);

struct ScanRow {
  double u0;
  std::string outcome;
  double event_radius;
  Side side;
};

using ScanSink = std::function<void(const ScanRow&)>;

class NoBracket : public Error {
 public:
  NoBracket(std::string what, std::vector<ScanRow> scan)
      : Error(std::move(what)), scan_(std::move(scan)) {}
  const std::vector<ScanRow>& scan() const noexcept { return scan_; }

 private:
  std::vector<ScanRow> scan_;
};

struct GroundState {
  double u0;
  Profile profile;
  ShotOutcome outcome;
  /// Final bracket [low, high] on u(0).
  double bracket_low;
  double bracket_high;
  int bisection_steps;
  std::vector<FluxCheckpoint> checkpoints;
};

struct Candidate {
  GroundState state;
  /// (1/N) sum_e c_e ||grad u||_e^e.
  double action;
};

struct MultiStartResult {
  GroundState best;
  std::vector<Candidate> candidates;
  std::vector<ScanRow> scan;
};

/// Default scan range: [0.1 zeta, 50 zeta] for zero mass; for positive mass the
/// lower end is the first s with G(s) > 0.
std::pair<double, double> default_scan_range(const NonlinearitySpec& spec);

std::vector<ScanRow> scan_shots(const NonlinearitySpec& spec, const OperatorSpec& op,
                                const ShootingConfig& cfg, const ScanSink& sink = {});

/// Bisects u(0) on a (Low, High) bracket and assembles the decaying profile.
GroundState bisect_ground_state(double a, double b, const NonlinearitySpec& spec,
                                const OperatorSpec& op, const ShootingConfig& cfg);

GroundState find_ground_state(const NonlinearitySpec& spec, const OperatorSpec& op,
                              const ShootingConfig& cfg, const ScanSink& sink = {});

MultiStartResult multi_start_ground_state(const NonlinearitySpec& spec, const OperatorSpec& op,
                                          const ShootingConfig& cfg, const ScanSink& sink = {});

/// (1/N) sum_e c_e ||grad u||_e^e, the action of a solution.
double solution_action(const Profile& profile, const OperatorSpec& op);

/// Startup offset delta = 1e-6 max(1, R_max/M); [0, delta] uses the series solution.
double startup_radius(const ShootingConfig& cfg);

}  // namespace qlgs

#endif  // QLGS_SHOOTING_HPP
