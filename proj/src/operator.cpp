// operator.cpp
#include "qlgs/operator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qlgs/error.hpp"

namespace qlgs {

namespace {

constexpr int kMaxChainOrder = 64;

double signed_power(double w, double e) {
  // |w|^{e-2} w
  const double a = std::abs(w);
  if (a == 0.0) return 0.0;
  return std::copysign(std::pow(a, e - 1.0), w);
}

}  // namespace

OperatorSpec OperatorSpec::pq(double p, double q, double beta, int dimension) {
  if (dimension < 3) throw InvalidArgument("operator: dimension N must be >= 3");
  if (!(p > 1.0)) throw InvalidArgument("operator: p must exceed 1");
  if (!(q > p)) throw InvalidArgument("operator: q must exceed p");
  if (!(p < dimension)) throw InvalidArgument("operator: p must be below N");
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw InvalidArgument("operator: beta must be finite and >= 0");

  OperatorSpec op;
  op.kind_ = OperatorKind::PQ;
  op.dimension_ = dimension;
  op.beta_ = beta;
  op.p_ = p;
  op.q_ = q;
  op.terms_.push_back({1.0, p});
  if (beta > 0.0) op.terms_.push_back({beta, q});
  return op;
}

OperatorSpec OperatorSpec::bi_chain(int k, double beta, int dimension) {
  if (dimension < 3) throw InvalidArgument("operator: dimension N must be >= 3");
  if (!(beta > 0.0)) throw InvalidArgument("operator: beta must be positive for a BI chain");
  const auto a = bi_chain_coefficients(k, beta);

  OperatorSpec op;
  op.kind_ = OperatorKind::BIChain;
  op.dimension_ = dimension;
  op.beta_ = beta;
  op.k_ = k;
  op.p_ = 2.0;
  op.q_ = 2.0 * k;
  for (int j = 1; j <= k; ++j) op.terms_.push_back({a[j - 1], 2.0 * j});
  return op;
}

double OperatorSpec::flux(double w) const {
  double y = 0.0;
  for (const auto& t : terms_) y += t.coefficient * signed_power(w, t.exponent);
  return y;
}

double OperatorSpec::flux_derivative(double w) const {
  const double a = std::abs(w);
  double d = 0.0;
  for (const auto& t : terms_) {
    if (t.exponent == 2.0) {
      d += t.coefficient;
    } else if (a == 0.0) {
      if (t.exponent < 2.0) return std::numeric_limits<double>::infinity();
    } else {
      d += t.coefficient * (t.exponent - 1.0) * std::pow(a, t.exponent - 2.0);
    }
  }
  return d;
}

double OperatorSpec::invert_flux(double y) const {
  if (!std::isfinite(y)) throw Error("invert_flux: non-finite flux value");
  if (y == 0.0) return 0.0;
  const double target = std::abs(y);

  // Each term alone bounds the root from above: c w^{e-1} <= Phi(w).
  double hi = std::numeric_limits<double>::infinity();
  for (const auto& t : terms_)
    hi = std::min(hi, std::pow(target / t.coefficient, 1.0 / (t.exponent - 1.0)));
  double lo = 0.0;
  const double tol = 1e-14 * (1.0 + target);

  double w = hi;
  double r = flux(w) - target;
  if (std::abs(r) <= tol) return std::copysign(w, y);
  if (r < 0.0) {
    // Rounding in pow; the bracket still holds up to a few ulps.
    hi = std::nextafter(hi, std::numeric_limits<double>::infinity()) * (1.0 + 1e-15);
  }

  for (int iter = 0; iter < 200; ++iter) {
    if (r > 0.0) hi = w; else lo = w;
    const double d = flux_derivative(w);
    double next = (d > 0.0 && std::isfinite(d)) ? w - r / d : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    if (next == w || hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * hi) {
      w = next;
      break;
    }
    w = next;
    r = flux(w) - target;
    if (std::abs(r) <= tol) break;
  }
  if (!std::isfinite(w)) throw Error("invert_flux: bracket failure");
  return std::copysign(w, y);
}

double OperatorSpec::harmonic_tail_exponent() const {
  return (dimension_ - p_) / (p_ - 1.0);
}

std::string OperatorSpec::describe() const {
  std::ostringstream os;
  if (kind_ == OperatorKind::PQ) {
    os << "pq(p=" << p_ << ", q=" << q_ << ", beta=" << beta_ << ", N=" << dimension_ << ")";
    if (degenerate()) os << " [degenerate p-Laplacian mode]";
  } else {
    os << "bi(k=" << k_ << ", beta=" << beta_ << ", N=" << dimension_ << ")";
  }
  return os.str();
}

std::vector<double> bi_chain_coefficients(int k, double beta) {
  if (k < 1) throw InvalidArgument("bi_chain_coefficients: k must be >= 1");
  if (k > kMaxChainOrder) throw InvalidArgument("bi_chain_coefficients: k exceeds 64");
  if (!(beta > 0.0)) throw InvalidArgument("bi_chain_coefficients: beta must be positive");
  std::vector<double> a(static_cast<std::size_t>(k));
  a[0] = 1.0;
  for (int j = 1; j < k; ++j) {
    a[j] = a[j - 1] * beta * (2.0 * j - 1.0) / j;
    if (!std::isfinite(a[j]) || a[j] == 0.0)
      throw Error("bi_chain_coefficients: coefficient overflow at j = " + std::to_string(j + 1));
  }
  return a;
}

CriticalExponents critical_exponents(const OperatorSpec& op) {
  const double n = op.dimension();
  const double p = op.p();
  if (!(p < n)) throw InvalidArgument("critical_exponents: p >= N");
  CriticalExponents ce{};
  ce.p_star = p * n / (n - p);
  if (op.degenerate()) {
    ce.q_star = ce.p_star;
    ce.q_star_floor = ce.p_star;
    return ce;
  }
  const double q = op.q();
  ce.q_star_floor = std::max(q, ce.p_star);
  if (q < n) ce.q_star = q * n / (n - q);
  return ce;
}

double bi_chain_min_order(int dimension) {
  const double n = dimension;
  return std::max(n / 2.0, n / (n - 2.0));
}

}  // namespace qlgs
