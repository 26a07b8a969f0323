// nonlinearity.hpp
#ifndef QLGS_NONLINEARITY_HPP
#define QLGS_NONLINEARITY_HPP

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "qlgs/operator.hpp"

namespace qlgs {

/// c * s^e on s > 0.
struct PowerTerm {
  double coefficient;
  double exponent;
};

/// A power sum supported on [lo, hi).
struct PowerPiece {
  double lo;
  double hi;
  std::vector<PowerTerm> terms;
};

/**
 * Real function of s >= 0 that vanishes for s <= 0.
 *
 * Either a piecewise power sum (exact primitives, exact positive parts via
 * root isolation) or an opaque callable (primitives by adaptive quadrature).
 */
class ScalarFunction {
 public:
  static ScalarFunction power_sum(std::vector<PowerTerm> terms);
  static ScalarFunction piecewise(std::vector<PowerPiece> pieces);
  static ScalarFunction general(std::function<double(double)> f);
  static ScalarFunction zero() { return power_sum({}); }

  double operator()(double s) const;
  /// Evaluation without the s <= 0 cutoff (used to audit the cutoff itself).
  double raw(double s) const;

  bool closed_form() const noexcept { return !general_; }
  std::span<const PowerPiece> pieces() const noexcept { return pieces_; }

  ScalarFunction truncated(double s0) const;
  ScalarFunction negated() const;
  ScalarFunction plus(PowerTerm term) const;
  ScalarFunction positive_part() const;

  /// Exact integral over [0, s]; only for closed-form functions.
  double exact_integral(double s) const;

 private:
  std::vector<PowerPiece> pieces_;
  std::shared_ptr<const std::function<double(double)>> general_;
};

/// Primitive F(s) = int_0^s f. Exact for closed forms; otherwise adaptive
/// Gauss-Kronrod from a lazily filled, mutex-guarded table of anchors.
class Primitive {
 public:
  explicit Primitive(ScalarFunction f);
  double operator()(double s) const;
  const ScalarFunction& integrand() const noexcept { return f_; }

 private:
  struct Anchors;
  ScalarFunction f_;
  std::shared_ptr<Anchors> anchors_;
};

struct ZeroMass {};
struct PositiveMass {
  double ell;
  double m_ell;
};
using MassRegime = std::variant<ZeroMass, PositiveMass>;

inline bool is_positive_mass(const MassRegime& r) {
  return std::holds_alternative<PositiveMass>(r);
}

/**
 * The nonlinearity g together with the data the existence theory attaches to
 * it: zeta with G(zeta) > 0, the mass regime, the critical exponents p* and
 * q*, and (after truncate()) the first zero s0 >= zeta.
 */
class NonlinearitySpec {
 public:
  NonlinearitySpec(ScalarFunction g, double zeta, MassRegime regime, const OperatorSpec& op,
                   std::optional<double> user_q_star = std::nullopt,
                   std::optional<double> pure_power_alpha = std::nullopt, std::string name = {});

  double g(double s) const { return g_(s); }
  double G(double s) const { return (*primitive_)(s); }
  const ScalarFunction& function() const noexcept { return g_; }

  double zeta() const noexcept { return zeta_; }
  const MassRegime& regime() const noexcept { return regime_; }
  double p_star() const noexcept { return p_star_; }
  double q_star() const noexcept { return q_star_; }
  /// +inf until truncated, and also when g has no zero beyond zeta.
  double s0() const noexcept { return s0_; }
  bool is_truncated() const noexcept { return truncated_; }
  std::optional<double> pure_power_alpha() const noexcept { return alpha_; }
  const std::string& name() const noexcept { return name_; }

  /// Copy with g replaced by g~ vanishing beyond s0.
  NonlinearitySpec with_truncation(double s0) const;

 private:
  ScalarFunction g_;
  std::shared_ptr<const Primitive> primitive_;
  double zeta_;
  MassRegime regime_;
  double p_star_;
  double q_star_;
  double s0_;
  bool truncated_ = false;
  std::optional<double> alpha_;
  std::string name_;
};

namespace builtin {
/// g(s) = s^{alpha-1}.
ScalarFunction pure_power(double alpha);
/// g(s) = -s + s^3.
ScalarFunction cubic_minus_linear();
/// g(s) = min{s^{q*-1}, s^{l-1}}.
ScalarFunction min_power(double ell, double q_star);
/// g(s) = K s^{l1-1} - s^{l2-1}.
ScalarFunction two_power(double ell1, double ell2, double K);
/// g(s) = -s^{l1-1} + s^{l2-1}.
ScalarFunction minus_plus_power(double ell1, double ell2);
/// g(s) = sum_i c_i s^i.
ScalarFunction polynomial(std::span<const double> coefficients);
}  // namespace builtin

struct SamplingConfig {
  double near_lo = 1e-8;
  double near_hi = 1e-2;
  double far_lo = 1e2;
  double far_hi = 1e8;
  int samples = 64;
  double ratio_threshold = 1e-3;
};

struct HypothesisVerdict {
  std::string name;
  bool passed;
  /// Value of the sampled ratio (or G(zeta)) at the decisive sample.
  double statistic;
  std::string evidence;
};

struct AssumptionReport {
  std::vector<HypothesisVerdict> verdicts;
  bool all_passed() const;
  const HypothesisVerdict* find(const std::string& name) const;
};

/// Sampled evidence for (g1)-(g4), (g2'), or (h1)-(h4) and the chain-order bound for chains.
AssumptionReport validate_assumptions(const NonlinearitySpec& spec, const OperatorSpec& op,
                                      const SamplingConfig& cfg = {});

struct TruncationConfig {
  /// Scan upper end as a multiple of zeta.
  double s_max_factor = 1e3;
  int scan_points = 4096;
};

NonlinearitySpec truncate(const NonlinearitySpec& spec, const TruncationConfig& cfg = {});

/// g = g1 - g2 with g1, g2 >= 0 and their primitives.
struct Decomposition {
  ScalarFunction g1;
  ScalarFunction g2;
  Primitive G1;
  Primitive G2;
};

Decomposition decompose(const NonlinearitySpec& spec);

struct PrimitiveSet {
  Primitive G;
  Primitive G1;
  Primitive G2;
};

/// G, G1, G2 evaluators for a truncated spec.
PrimitiveSet primitives(const NonlinearitySpec& spec);

/// First s in [a, b] with f(s) = 0, by geometric sign-change scan and bisection
/// to relative tolerance rel_tol. Empty when no sign change is found.
std::optional<double> first_root(const std::function<double(double)>& f, double a, double b,
                                 int scan_points = 4096, double rel_tol = 1e-12);

}  // namespace qlgs

#endif  // QLGS_NONLINEARITY_HPP
