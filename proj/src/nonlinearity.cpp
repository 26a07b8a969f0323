// nonlinearity.cpp
#include "qlgs/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <sstream>

#include "qlgs/error.hpp"
#include "qlgs/quadrature.hpp"

namespace qlgs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double eval_terms(std::span<const PowerTerm> terms, double s) {
  double v = 0.0;
  for (const auto& t : terms) v += t.coefficient * std::pow(s, t.exponent);
  return v;
}

double integrate_terms(std::span<const PowerTerm> terms, double a, double b) {
  double v = 0.0;
  for (const auto& t : terms) {
    const double e1 = t.exponent + 1.0;
    v += t.coefficient * (std::pow(b, e1) - std::pow(a, e1)) / e1;
  }
  return v;
}

void check_terms(std::span<const PowerTerm> terms) {
  for (const auto& t : terms) {
    if (!std::isfinite(t.coefficient) || !std::isfinite(t.exponent))
      throw InvalidArgument("power term with non-finite coefficient or exponent");
    if (!(t.exponent >= 0.0))
      throw InvalidArgument("power term exponent must be >= 0 (g must stay bounded at 0+)");
  }
}

// All sign changes of f inside (a, b), refined to near machine precision.
std::vector<double> sign_changes(const std::function<double(double)>& f, double a, double b,
                                 int points) {
  std::vector<double> roots;
  const double lo = std::max(a, 1e-12);
  const double hi = std::min(b, 1e12);
  if (!(hi > lo)) return roots;
  const double ratio = std::pow(hi / lo, 1.0 / (points - 1));
  double x0 = lo;
  double f0 = f(x0);
  for (int i = 1; i < points; ++i) {
    const double x1 = (i == points - 1) ? hi : lo * std::pow(ratio, i);
    const double f1 = f(x1);
    if ((f0 < 0.0 && f1 > 0.0) || (f0 > 0.0 && f1 < 0.0)) {
      double l = x0, r = x1, fl = f0;
      for (int it = 0; it < 200 && r - l > 4.0 * std::numeric_limits<double>::epsilon() * r; ++it) {
        const double m = 0.5 * (l + r);
        const double fm = f(m);
        if (fm == 0.0) { l = r = m; break; }
        if ((fm < 0.0) == (fl < 0.0)) { l = m; fl = fm; } else { r = m; }
      }
      roots.push_back(0.5 * (l + r));
    }
    x0 = x1;
    f0 = f1;
  }
  return roots;
}

}  // namespace

// ---------------------------------------------------------------------------
// ScalarFunction

ScalarFunction ScalarFunction::power_sum(std::vector<PowerTerm> terms) {
  check_terms(terms);
  ScalarFunction f;
  f.pieces_.push_back({0.0, kInf, std::move(terms)});
  return f;
}

ScalarFunction ScalarFunction::piecewise(std::vector<PowerPiece> pieces) {
  if (pieces.empty()) throw InvalidArgument("piecewise function needs at least one piece");
  std::sort(pieces.begin(), pieces.end(),
            [](const PowerPiece& a, const PowerPiece& b) { return a.lo < b.lo; });
  if (pieces.front().lo != 0.0 || pieces.back().hi != kInf)
    throw InvalidArgument("pieces must cover [0, +inf)");
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i)
    if (pieces[i].hi != pieces[i + 1].lo) throw InvalidArgument("pieces must be contiguous");
  for (const auto& p : pieces) check_terms(p.terms);
  ScalarFunction f;
  f.pieces_ = std::move(pieces);
  return f;
}

ScalarFunction ScalarFunction::general(std::function<double(double)> fn) {
  if (!fn) throw InvalidArgument("general scalar function is empty");
  ScalarFunction f;
  f.general_ = std::make_shared<const std::function<double(double)>>(std::move(fn));
  return f;
}

double ScalarFunction::raw(double s) const {
  if (general_) return (*general_)(s);
  if (s <= 0.0) return 0.0;
  for (const auto& p : pieces_)
    if (s < p.hi) return eval_terms(p.terms, s);
  return 0.0;
}

double ScalarFunction::operator()(double s) const {
  if (!(s > 0.0)) {
    if (std::isnan(s)) throw EvaluationError("g evaluated at NaN", s);
    return 0.0;
  }
  const double v = raw(s);
  if (!std::isfinite(v)) throw EvaluationError("non-finite value of g", s);
  return v;
}

ScalarFunction ScalarFunction::truncated(double s0) const {
  if (!(s0 < kInf)) return *this;
  if (general_) {
    auto inner = general_;
    return general([inner, s0](double s) { return s > s0 ? 0.0 : (*inner)(s); });
  }
  std::vector<PowerPiece> out;
  for (const auto& p : pieces_) {
    if (p.lo >= s0) break;
    out.push_back({p.lo, std::min(p.hi, s0), p.terms});
  }
  out.push_back({s0, kInf, {}});
  ScalarFunction f;
  f.pieces_ = std::move(out);
  return f;
}

ScalarFunction ScalarFunction::negated() const {
  if (general_) {
    auto inner = general_;
    return general([inner](double s) { return -(*inner)(s); });
  }
  ScalarFunction f = *this;
  for (auto& p : f.pieces_)
    for (auto& t : p.terms) t.coefficient = -t.coefficient;
  return f;
}

ScalarFunction ScalarFunction::plus(PowerTerm term) const {
  if (general_) {
    auto inner = general_;
    return general([inner, term](double s) {
      return (*inner)(s) + (s > 0.0 ? term.coefficient * std::pow(s, term.exponent) : 0.0);
    });
  }
  check_terms(std::span<const PowerTerm>(&term, 1));
  ScalarFunction f = *this;
  for (auto& p : f.pieces_) p.terms.push_back(term);
  return f;
}

ScalarFunction ScalarFunction::positive_part() const {
  if (general_) {
    auto inner = general_;
    return general([inner](double s) { return std::max((*inner)(s), 0.0); });
  }
  std::vector<PowerPiece> out;
  for (const auto& p : pieces_) {
    const auto fn = [&p](double s) { return eval_terms(p.terms, s); };
    std::vector<double> cuts{p.lo};
    for (double r : sign_changes(fn, p.lo, p.hi, 1200))
      if (r > cuts.back()) cuts.push_back(r);
    cuts.push_back(p.hi);
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      const double a = cuts[i], b = cuts[i + 1];
      double mid;
      if (a == 0.0) mid = std::isfinite(b) ? 0.5 * b : 1.0;
      else mid = std::isfinite(b) ? std::sqrt(a * b) : 2.0 * a;
      PowerPiece piece{a, b, {}};
      if (fn(mid) > 0.0) piece.terms = p.terms;
      out.push_back(std::move(piece));
    }
  }
  ScalarFunction f;
  f.pieces_ = std::move(out);
  return f;
}

double ScalarFunction::exact_integral(double s) const {
  if (general_) throw Error("exact_integral requires a closed-form function");
  if (s <= 0.0) return 0.0;
  double v = 0.0;
  for (const auto& p : pieces_) {
    if (p.lo >= s) break;
    v += integrate_terms(p.terms, p.lo, std::min(s, p.hi));
  }
  return v;
}

// ---------------------------------------------------------------------------
// Primitive

struct Primitive::Anchors {
  // Anchor j sits at 2^{(j - kOffset)/4}.
  static constexpr int kOffset = 160;
  static constexpr int kCount = 321;
  std::mutex mutex;
  std::vector<double> values;  // filled prefix
};

namespace {
double anchor_point(int j) { return std::exp2((j - 160) / 4.0); }
}  // namespace

Primitive::Primitive(ScalarFunction f) : f_(std::move(f)) {
  if (!f_.closed_form()) anchors_ = std::make_shared<Anchors>();
}

double Primitive::operator()(double s) const {
  if (s <= 0.0) return 0.0;
  if (f_.closed_form()) return f_.exact_integral(s);

  const auto fn = [this](double x) { return f_(x); };
  const double first = anchor_point(0);
  if (s <= first) return quad::adaptive(fn, 0.0, s, 1e-12);

  int j = static_cast<int>(std::floor(4.0 * std::log2(s))) + Anchors::kOffset;
  j = std::clamp(j, 0, Anchors::kCount - 1);
  while (j > 0 && anchor_point(j) > s) --j;

  double base;
  {
    std::lock_guard<std::mutex> lock(anchors_->mutex);
    auto& v = anchors_->values;
    if (v.empty()) v.push_back(quad::adaptive(fn, 0.0, first, 1e-13));
    while (static_cast<int>(v.size()) <= j) {
      const int k = static_cast<int>(v.size());
      v.push_back(v.back() + quad::adaptive(fn, anchor_point(k - 1), anchor_point(k), 1e-13));
    }
    base = v[j];
  }
  return base + quad::adaptive(fn, anchor_point(j), s, 1e-12);
}

// ---------------------------------------------------------------------------
// NonlinearitySpec

NonlinearitySpec::NonlinearitySpec(ScalarFunction g, double zeta, MassRegime regime,
                                   const OperatorSpec& op, std::optional<double> user_q_star,
                                   std::optional<double> pure_power_alpha, std::string name)
    : g_(std::move(g)),
      zeta_(zeta),
      regime_(regime),
      s0_(kInf),
      alpha_(pure_power_alpha),
      name_(std::move(name)) {
  if (!(zeta > 0.0) || !std::isfinite(zeta)) throw InvalidArgument("zeta must be positive");
  const auto ce = critical_exponents(op);
  p_star_ = ce.p_star;
  if (ce.q_star) {
    q_star_ = *ce.q_star;
  } else {
    if (!user_q_star)
      throw InvalidArgument("q >= N: a critical exponent q* > " + std::to_string(ce.q_star_floor) +
                            " must be supplied");
    if (!(*user_q_star > ce.q_star_floor) || !std::isfinite(*user_q_star))
      throw InvalidArgument("q* must exceed max{q, p*} = " + std::to_string(ce.q_star_floor));
    q_star_ = *user_q_star;
  }
  if (const auto* pm = std::get_if<PositiveMass>(&regime_)) {
    if (!(pm->ell >= op.p() && pm->ell < p_star_))
      throw InvalidArgument("positive mass requires p <= l < p*");
    if (!(pm->m_ell > 0.0)) throw InvalidArgument("positive mass requires m_l > 0");
  }
  if (alpha_ && !(*alpha_ > 1.0)) throw InvalidArgument("pure power alpha must exceed 1");
  primitive_ = std::make_shared<const Primitive>(g_);
}

NonlinearitySpec NonlinearitySpec::with_truncation(double s0) const {
  if (!(s0 >= zeta_)) throw InvalidArgument("truncation point must satisfy s0 >= zeta");
  NonlinearitySpec out = *this;
  out.g_ = g_.truncated(s0);
  out.primitive_ = std::make_shared<const Primitive>(out.g_);
  out.s0_ = s0;
  out.truncated_ = true;
  return out;
}

// ---------------------------------------------------------------------------
// Builtins

namespace builtin {

ScalarFunction pure_power(double alpha) {
  if (!(alpha > 1.0)) throw InvalidArgument("pure_power: alpha must exceed 1");
  return ScalarFunction::power_sum({{1.0, alpha - 1.0}});
}

ScalarFunction cubic_minus_linear() { return ScalarFunction::power_sum({{-1.0, 1.0}, {1.0, 3.0}}); }

ScalarFunction min_power(double ell, double q_star) {
  if (!(q_star > ell && ell > 1.0)) throw InvalidArgument("min_power: need 1 < l < q*");
  return ScalarFunction::piecewise({{0.0, 1.0, {{1.0, q_star - 1.0}}}, {1.0, kInf, {{1.0, ell - 1.0}}}});
}

ScalarFunction two_power(double ell1, double ell2, double K) {
  if (!(ell2 > ell1 && ell1 > 1.0 && K > 0.0))
    throw InvalidArgument("two_power: need 1 < l1 < l2 and K > 0");
  return ScalarFunction::power_sum({{K, ell1 - 1.0}, {-1.0, ell2 - 1.0}});
}

ScalarFunction minus_plus_power(double ell1, double ell2) {
  if (!(ell2 > ell1 && ell1 > 1.0)) throw InvalidArgument("minus_plus_power: need 1 < l1 < l2");
  return ScalarFunction::power_sum({{-1.0, ell1 - 1.0}, {1.0, ell2 - 1.0}});
}

ScalarFunction polynomial(std::span<const double> coefficients) {
  std::vector<PowerTerm> terms;
  for (std::size_t i = 0; i < coefficients.size(); ++i)
    if (coefficients[i] != 0.0) terms.push_back({coefficients[i], static_cast<double>(i)});
  return ScalarFunction::power_sum(std::move(terms));
}

}  // namespace builtin

// ---------------------------------------------------------------------------
// Assumption checks

bool AssumptionReport::all_passed() const {
  return std::all_of(verdicts.begin(), verdicts.end(),
                     [](const HypothesisVerdict& v) { return v.passed; });
}

const HypothesisVerdict* AssumptionReport::find(const std::string& name) const {
  for (const auto& v : verdicts)
    if (v.name == name) return &v;
  return nullptr;
}

namespace {

std::vector<double> geometric(double lo, double hi, int n) {
  std::vector<double> s(static_cast<std::size_t>(n));
  const double ratio = std::pow(hi / lo, 1.0 / (n - 1));
  for (int i = 0; i < n; ++i) s[i] = lo * std::pow(ratio, i);
  s.back() = hi;
  return s;
}

// Sampled ratio g(s)/s^{e-1} along s (ordered so that the last entry is the
// extreme sample). Passes when the extreme value is <= threshold or the ratio
// is positive and shrinks like a power of s over the last decade.
HypothesisVerdict limsup_nonpositive(const std::string& name, const NonlinearitySpec& spec,
                                     double e, std::vector<double> s, double threshold) {
  std::vector<double> ratio(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) ratio[i] = spec.g(s[i]) / std::pow(s[i], e - 1.0);
  const double extreme = ratio.back();
  bool passed = extreme <= threshold;
  std::ostringstream ev;
  ev << "sampled evidence: g(s)/s^" << (e - 1.0) << " = " << extreme << " at s = " << s.back();
  if (!passed) {
    // Last decade of samples: positive and decreasing in magnitude geometrically.
    const std::size_t n = s.size();
    std::size_t k = n - 1;
    while (k > 0 && std::abs(std::log10(s[k - 1] / s.back())) <= 1.0) --k;
    bool shrinking = ratio[k] > 0.0;
    for (std::size_t i = k + 1; i < n && shrinking; ++i)
      shrinking = ratio[i] > 0.0 && ratio[i] < ratio[i - 1];
    if (shrinking && k < n - 1) {
      const double slope = std::log(ratio[n - 1] / ratio[k]) / std::abs(std::log(s[n - 1] / s[k]));
      if (slope < -1e-3) {
        passed = true;
        ev << "; positive but decaying like a power (rate " << -slope << " per log-unit)";
      }
    }
  }
  return {name, passed, extreme, ev.str()};
}

}  // namespace

AssumptionReport validate_assumptions(const NonlinearitySpec& spec, const OperatorSpec& op,
                                      const SamplingConfig& cfg) {
  AssumptionReport report;
  const bool chain = op.kind() == OperatorKind::BIChain;
  const int n = cfg.samples;

  // (g1): vanishing on s <= 0 and continuity at 0+.
  {
    double worst = 0.0;
    double at = 0.0;
    for (double s : geometric(1e-8, 1e3, 24)) {
      const double v = std::abs(spec.function().raw(-s));
      if (!std::isfinite(v)) throw EvaluationError("non-finite value of g", -s);
      if (v > worst) { worst = v; at = -s; }
    }
    const double at_zero = std::abs(spec.function().raw(0.0));
    const double near_zero = std::abs(spec.g(cfg.near_lo));
    const bool passed = worst == 0.0 && at_zero == 0.0 && near_zero <= cfg.ratio_threshold;
    std::ostringstream ev;
    ev << "sampled evidence: max |g(s)| on s<0 is " << worst << " (at " << at << "), |g(0)| = "
       << at_zero << ", |g(" << cfg.near_lo << ")| = " << near_zero;
    report.verdicts.push_back({chain ? "(h1)" : "(g1)", passed, worst, ev.str()});
  }

  // Near-origin behaviour.
  auto near = geometric(cfg.near_lo, cfg.near_hi, n);
  std::reverse(near.begin(), near.end());
  const double lower = op.p();
  const double upper = spec.p_star();
  if (const auto* pm = std::get_if<PositiveMass>(&spec.regime())) {
    const double extreme = spec.g(near.back()) / std::pow(near.back(), pm->ell - 1.0);
    const bool range_ok = pm->ell >= lower && pm->ell < upper;
    const bool passed = range_ok && std::abs(extreme + pm->m_ell) <=
                                        cfg.ratio_threshold * std::max(1.0, pm->m_ell);
    std::ostringstream ev;
    ev << "sampled evidence: g(s)/s^" << (pm->ell - 1.0) << " = " << extreme << " at s = "
       << near.back() << " vs -m_l = " << -pm->m_ell << "; l in [p, p*): " << range_ok;
    report.verdicts.push_back({chain ? "(h2-ii)" : "(g2')", passed, extreme, ev.str()});
  } else {
    // The endpoints l = p and l = p* are checked; intermediate l follow by interpolation.
    const std::string name = chain ? "(h2-i)" : "(g2)";
    auto at_p = limsup_nonpositive(name + "[l=p]", spec, lower, near, cfg.ratio_threshold);
    auto at_ps = limsup_nonpositive(name + "[l=p*]", spec, upper, near, cfg.ratio_threshold);
    HypothesisVerdict v{name, at_p.passed && at_ps.passed, at_ps.statistic,
                        at_p.evidence + "; " + at_ps.evidence};
    report.verdicts.push_back(v);
  }

  // Growth at infinity.
  {
    const auto far = geometric(cfg.far_lo, cfg.far_hi, n);
    auto v = limsup_nonpositive(chain ? "(h3)" : "(g3)", spec, spec.q_star(), far,
                                cfg.ratio_threshold);
    if (chain && !(spec.q_star() > op.q())) {
      v.passed = false;
      v.evidence += "; l* must exceed 2k";
    }
    report.verdicts.push_back(v);
  }

  // G(zeta) > 0.
  {
    const double Gz = spec.G(spec.zeta());
    std::ostringstream ev;
    ev << "G(" << spec.zeta() << ") = " << Gz;
    report.verdicts.push_back({chain ? "(h4)" : "(g4)", Gz > 0.0, Gz, ev.str()});
  }

  if (chain) {
    const double need = bi_chain_min_order(op.dimension());
    std::ostringstream ev;
    ev << "k = " << op.order() << ", max{N/2, N/(N-2)} = " << need;
    report.verdicts.push_back({"chain-order", op.order() >= need, op.order() - need, ev.str()});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Truncation and decomposition

std::optional<double> first_root(const std::function<double(double)>& f, double a, double b,
                                 int scan_points, double rel_tol) {
  if (!(a > 0.0) || !(b > a)) return std::nullopt;
  double x0 = a;
  double f0 = f(a);
  if (f0 == 0.0) return a;
  const double ratio = std::pow(b / a, 1.0 / (scan_points - 1));
  for (int i = 1; i < scan_points; ++i) {
    const double x1 = (i == scan_points - 1) ? b : a * std::pow(ratio, i);
    const double f1 = f(x1);
    if (f1 == 0.0) return x1;
    if ((f0 < 0.0) != (f1 < 0.0)) {
      double l = x0, r = x1;
      double fl = f0;
      while (r - l > rel_tol * r) {
        const double m = 0.5 * (l + r);
        const double fm = f(m);
        if (fm == 0.0) return m;
        if ((fm < 0.0) == (fl < 0.0)) { l = m; fl = fm; } else { r = m; }
      }
      return 0.5 * (l + r);
    }
    x0 = x1;
    f0 = f1;
  }
  return std::nullopt;
}

NonlinearitySpec truncate(const NonlinearitySpec& spec, const TruncationConfig& cfg) {
  const auto g = [&spec](double s) { return spec.g(s); };
  const auto root =
      first_root(g, spec.zeta(), cfg.s_max_factor * spec.zeta(), cfg.scan_points, 1e-12);
  return spec.with_truncation(root.value_or(kInf));
}

Decomposition decompose(const NonlinearitySpec& spec) {
  const ScalarFunction& g = spec.function();
  if (const auto* pm = std::get_if<PositiveMass>(&spec.regime())) {
    const PowerTerm mass{pm->m_ell, pm->ell - 1.0};
    const ScalarFunction shifted = g.plus(mass);
    ScalarFunction g1 = shifted.positive_part();
    ScalarFunction g2 = shifted.negated().positive_part().plus(mass);
    Primitive G1(g1), G2(g2);
    return {std::move(g1), std::move(g2), std::move(G1), std::move(G2)};
  }
  ScalarFunction g1 = g.positive_part();
  ScalarFunction g2 = g.negated().positive_part();
  Primitive G1(g1), G2(g2);
  return {std::move(g1), std::move(g2), std::move(G1), std::move(G2)};
}

PrimitiveSet primitives(const NonlinearitySpec& spec) {
  auto d = decompose(spec);
  return {Primitive(spec.function()), std::move(d.G1), std::move(d.G2)};
}

}  // namespace qlgs
