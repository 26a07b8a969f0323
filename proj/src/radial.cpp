// radial.cpp
#include "qlgs/radial.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "qlgs/error.hpp"
#include "qlgs/quadrature.hpp"

namespace qlgs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// int_a^b (x - alpha)(x - beta) dx, evaluated in coordinates relative to a.
double quad_product(double a, double b, double alpha, double beta) {
  const double h = b - a;
  const double al = alpha - a;
  const double be = beta - a;
  return h * h * h / 3.0 - (al + be) * h * h / 2.0 + al * be * h;
}

// Weights of the quadratic interpolant through (x0, x1, x2) integrated on [a, b].
std::array<double, 3> lagrange3(double x0, double x1, double x2, double a, double b) {
  return {quad_product(a, b, x1, x2) / ((x0 - x1) * (x0 - x2)),
          quad_product(a, b, x0, x2) / ((x1 - x0) * (x1 - x2)),
          quad_product(a, b, x0, x1) / ((x2 - x0) * (x2 - x1))};
}

}  // namespace

double sphere_area(int dimension) {
  const double n = dimension;
  return 2.0 * std::pow(std::numbers::pi, n / 2.0) / std::tgamma(n / 2.0);
}

RadialGrid::RadialGrid(std::vector<double> nodes, int dimension, double ratio)
    : nodes_(std::move(nodes)), dimension_(dimension), omega_(qlgs::sphere_area(dimension)),
      ratio_(ratio) {
  const std::size_t m = nodes_.size() - 1;
  std::vector<double> w(nodes_.size(), 0.0);
  // Composite Simpson on cell pairs; a trailing odd cell uses the quadratic
  // through its two left neighbours.
  std::size_t i = 0;
  for (; i + 2 <= m; i += 2) {
    const auto l = lagrange3(nodes_[i], nodes_[i + 1], nodes_[i + 2], nodes_[i], nodes_[i + 2]);
    for (int k = 0; k < 3; ++k) w[i + k] += l[k];
  }
  if (i < m) {
    const auto l = lagrange3(nodes_[m - 2], nodes_[m - 1], nodes_[m], nodes_[m - 1], nodes_[m]);
    for (int k = 0; k < 3; ++k) w[m - 2 + k] += l[k];
  }
  weights_.resize(w.size());
  for (std::size_t j = 0; j < w.size(); ++j)
    weights_[j] = omega_ * std::pow(nodes_[j], dimension_ - 1) * w[j];
}

std::shared_ptr<const RadialGrid> RadialGrid::graded(std::size_t cells, double r_max,
                                                     int dimension) {
  if (cells < 64) throw InvalidArgument("radial grid needs at least 64 cells");
  if (!(r_max > 1.0)) throw InvalidArgument("radial grid needs R_max > 1");
  if (dimension < 1) throw InvalidArgument("radial grid dimension must be positive");

  const std::size_t inner = cells / 4;
  const std::size_t outer = cells - inner;
  const double h = (r_max - 1.0) / static_cast<double>(outer);

  // Cells in [0, 1] are h rho^{-1}, h rho^{-2}, ..., counted from r = 1 inward.
  double rho = 1.0;
  if (h * static_cast<double>(inner) > 1.0) {
    auto total = [&](double x) {
      double s = 0.0, c = h;
      for (std::size_t k = 0; k < inner; ++k) { c /= x; s += c; }
      return s;
    };
    double lo = 1.0, hi = 2.0;
    while (total(hi) > 1.0) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (total(mid) > 1.0 ? lo : hi) = mid;
    }
    rho = hi;
    if (static_cast<double>(inner) * std::log(rho) > std::log(1e200))
      throw InvalidArgument("radial grid: R_max / cells too large for the graded inner region; "
                            "increase cells");
  }

  std::vector<double> r(cells + 1);
  r[inner] = 1.0;
  if (rho == 1.0) {
    for (std::size_t k = 0; k < inner; ++k) r[k] = static_cast<double>(k) / inner;
  } else {
    double c = h;
    for (std::size_t k = inner; k-- > 1;) {
      c /= rho;
      r[k] = r[k + 1] - c;
    }
    r[0] = 0.0;
  }
  for (std::size_t k = 1; k <= outer; ++k) r[inner + k] = 1.0 + h * static_cast<double>(k);
  r[cells] = r_max;
  for (std::size_t k = 1; k <= cells; ++k)
    if (!(r[k] > r[k - 1])) throw Error("radial grid construction produced non-increasing nodes");
  return std::shared_ptr<const RadialGrid>(new RadialGrid(std::move(r), dimension, rho));
}

std::shared_ptr<const RadialGrid> RadialGrid::with_far_field(const RadialGrid& base,
                                                            double factor,
                                                            std::size_t log_nodes) {
  if (!(factor > 1.0) || log_nodes < 1)
    throw InvalidArgument("far-field extension needs factor > 1 and at least one node");
  std::vector<double> r(base.nodes().begin(), base.nodes().end());
  const double end = factor * r.back();
  const double q = std::pow(factor, 1.0 / static_cast<double>(log_nodes));
  double h = r.back() - r[r.size() - 2];
  while (r.back() < end) {
    h = std::min(h * 1.02, r.back() * (q - 1.0));
    r.push_back(r.back() + h >= end * (1.0 - 1e-12) ? end : r.back() + h);
  }
  return std::shared_ptr<const RadialGrid>(
      new RadialGrid(std::move(r), base.dimension(), base.geometric_ratio()));
}

std::shared_ptr<const RadialGrid> RadialGrid::from_nodes(std::vector<double> nodes,
                                                         int dimension) {
  if (nodes.size() < 65) throw InvalidArgument("radial grid needs at least 64 cells");
  if (nodes.front() != 0.0) throw InvalidArgument("radial grid must start at r = 0");
  for (std::size_t k = 1; k < nodes.size(); ++k)
    if (!(nodes[k] > nodes[k - 1])) throw InvalidArgument("radial grid nodes must increase");
  return std::shared_ptr<const RadialGrid>(new RadialGrid(std::move(nodes), dimension, 0.0));
}

std::size_t RadialGrid::lower_index(double r) const {
  return static_cast<std::size_t>(std::lower_bound(nodes_.begin(), nodes_.end(), r) -
                                  nodes_.begin());
}

// ---------------------------------------------------------------------------

Profile::Profile(std::shared_ptr<const RadialGrid> grid, std::vector<double> u,
                 std::vector<double> du, std::optional<PowerTail> tail,
                 std::span<const double> cached_exponents)
    : grid_(std::move(grid)), u_(std::move(u)), du_(std::move(du)), tail_(tail) {
  if (!grid_) throw InvalidArgument("profile needs a grid");
  if (u_.size() != grid_->nodes().size() || du_.size() != u_.size())
    throw InvalidArgument("profile arrays must match the grid size");
  for (std::size_t i = 0; i < u_.size(); ++i)
    if (!std::isfinite(u_[i]) || !std::isfinite(du_[i]))
      throw InvalidArgument("profile values must be finite");
  if (tail_ && !(tail_->exponent > 0.0)) throw InvalidArgument("tail exponent must be positive");
  for (double e : cached_exponents) grad_cache_.emplace_back(e, grad_power_uncached(e));
}

Profile Profile::sample(std::shared_ptr<const RadialGrid> grid,
                        const std::function<double(double)>& u,
                        const std::function<double(double)>& du, std::optional<PowerTail> tail,
                        std::span<const double> cached_exponents) {
  const auto r = grid->nodes();
  std::vector<double> uv(r.size()), dv(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    uv[i] = u(r[i]);
    dv[i] = du(r[i]);
  }
  return Profile(std::move(grid), std::move(uv), std::move(dv), tail, cached_exponents);
}

double Profile::grad_power(double e) const {
  for (const auto& [exp, value] : grad_cache_)
    if (exp == e) return value;
  return grad_power_uncached(e);
}

double Profile::grad_power_uncached(double e) const {
  const auto w = grid_->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double a = std::abs(du_[i]);
    if (a != 0.0) s += w[i] * std::pow(a, e);
  }
  if (tail_) s += grad_tail_estimate(e);
  return s;
}

double Profile::grad_tail_estimate(double e) const {
  const double n = grid_->dimension();
  const double R = grid_->r_max();
  if (tail_) {
    // |u'| = kappa b r^{-kappa-1}; integrand r^{N-1-e(kappa+1)}.
    const double kappa = tail_->exponent;
    const double decay = e * (kappa + 1.0) - n;
    if (!(decay > 0.0)) return kInf;
    const double slope = kappa * std::abs(tail_->amplitude);
    return grid_->sphere_area() * std::pow(slope, e) * std::pow(R, -decay) / decay;
  }
  // Extrapolate the integrand r^{N-1}|u'|^e as a power law from the last decade.
  const auto r = grid_->nodes();
  const std::size_t last = r.size() - 1;
  const std::size_t k = std::min(grid_->lower_index(R / 10.0), last - 1);
  const auto f = [&](std::size_t i) { return std::pow(r[i], n - 1) * std::pow(std::abs(du_[i]), e); };
  const double fl = f(last), fk = f(k);
  if (fl == 0.0) return 0.0;
  if (fk == 0.0) return kInf;
  const double gamma = -std::log(fl / fk) / std::log(r[last] / r[k]);
  if (!(gamma > 1.0)) return kInf;
  return grid_->sphere_area() * fl * R / (gamma - 1.0);
}

double Profile::integral(const std::function<double(double)>& F) const {
  const auto w = grid_->weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * F(u_[i]);
  if (!tail_) return s;

  // omega R^N int_0^1 x^{-(N+1)} F(u_R x^kappa) dx over dyadic shells x in [2^{-j-1}, 2^{-j}].
  const double n = grid_->dimension();
  const double R = grid_->r_max();
  const double uR = tail_->amplitude * std::pow(R, -tail_->exponent);
  const double kappa = tail_->exponent;
  const auto integrand = [&](double x) {
    return std::pow(x, -(n + 1.0)) * F(uR * std::pow(x, kappa));
  };
  double total = 0.0;
  double prev = kInf;
  int small = 0;
  for (int j = 0; j < 200; ++j) {
    const double b = std::ldexp(1.0, -j);
    const double part = quad::gauss_legendre(integrand, 0.5 * b, b);
    total += part;
    if (std::abs(part) <= 1e-17 * std::abs(total)) {
      if (++small >= 3) break;
    } else {
      small = 0;
    }
    if (j > 40 && std::abs(part) >= 0.9 * std::abs(prev) && std::abs(part) > 1e-300)
      return kInf;
    prev = part;
  }
  return s + grid_->sphere_area() * std::pow(R, n) * total;
}

double Profile::lebesgue_power(double e) const {
  return integral([e](double v) { return std::pow(std::abs(v), e); });
}

std::pair<double, double> Profile::evaluate(double r) const {
  const auto x = grid_->nodes();
  if (r <= 0.0) return {u_.front(), du_.front()};
  if (r >= x.back()) {
    if (r == x.back()) return {u_.back(), du_.back()};
    if (!tail_) return {0.0, 0.0};
    const double v = tail_->amplitude * std::pow(r, -tail_->exponent);
    return {v, -tail_->exponent * v / r};
  }
  std::size_t i = grid_->lower_index(r);
  if (i > 0) --i;
  const double h = x[i + 1] - x[i];
  const double t = (r - x[i]) / h;
  const double t2 = t * t, t3 = t2 * t;
  const double h00 = 2 * t3 - 3 * t2 + 1, h10 = t3 - 2 * t2 + t;
  const double h01 = -2 * t3 + 3 * t2, h11 = t3 - t2;
  const double v = h00 * u_[i] + h10 * h * du_[i] + h01 * u_[i + 1] + h11 * h * du_[i + 1];
  const double d00 = 6 * t2 - 6 * t, d10 = 3 * t2 - 4 * t + 1;
  const double d01 = -6 * t2 + 6 * t, d11 = 3 * t2 - 2 * t;
  const double dv = (d00 * u_[i] + d01 * u_[i + 1]) / h + d10 * du_[i] + d11 * du_[i + 1];
  return {v, dv};
}

// ---------------------------------------------------------------------------

double grad_norm(const Profile& profile, double e) {
  if (!(e >= 1.0)) throw InvalidArgument("grad_norm: exponent must be >= 1");
  return std::pow(profile.grad_power(e), 1.0 / e);
}

double lebesgue_norm(const Profile& profile, double r_exp) {
  if (!(r_exp >= 1.0)) throw InvalidArgument("lebesgue_norm: exponent must be >= 1");
  return std::pow(profile.lebesgue_power(r_exp), 1.0 / r_exp);
}

double integral_of(const Profile& profile, const std::function<double(double)>& F) {
  return profile.integral(F);
}

double interpolation_check(const Profile& profile, double p_star, double q_star, double r_exp) {
  if (!(p_star <= r_exp && r_exp <= q_star))
    throw InvalidArgument("interpolation_check: need p* <= r <= q*");
  const double theta = q_star == p_star ? 1.0 : (q_star - r_exp) / (q_star - p_star);
  const double lhs = profile.lebesgue_power(r_exp);
  const double a = profile.lebesgue_power(p_star);
  const double b = profile.lebesgue_power(q_star);
  const double rhs = std::pow(a, theta) * std::pow(b, 1.0 - theta);
  if (rhs == 0.0) return lhs == 0.0 ? 1.0 : kInf;
  return lhs / rhs;
}

Profile dilated(const Profile& profile, double t) {
  if (!(t > 0.0)) throw InvalidArgument("dilation factor must be positive");
  const auto r = profile.grid().nodes();
  std::vector<double> u(r.size()), du(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const auto [v, d] = profile.evaluate(r[i] / t);
    u[i] = v;
    du[i] = d / t;
  }
  std::optional<PowerTail> tail;
  if (const auto& src = profile.tail())
    tail = PowerTail{profile.grid().r_max(), src->amplitude * std::pow(t, src->exponent),
                     src->exponent};
  return Profile(profile.grid_ptr(), std::move(u), std::move(du), tail);
}

DecayStatistic decay_statistic(const Profile& profile, double p) {
  const auto& grid = profile.grid();
  const auto r = grid.nodes();
  const auto u = profile.u();
  const double n = grid.dimension();
  const double scale = grad_norm(profile, p);
  DecayStatistic st{0.0, 0.0, 0.0, 0.0, false};
  if (!(scale > 0.0) || !std::isfinite(scale)) return st;

  const double power = (n - p) / p;
  const double cut = grid.r_max() / 10.0;
  const std::size_t half = r.size() / 2;
  for (std::size_t i = grid.lower_index(1.0); i < r.size(); ++i) {
    const double q = std::pow(r[i], power) * std::abs(u[i]) / scale;
    st.sup_full = std::max(st.sup_full, q);
    if (r[i] <= cut) st.sup_to_penultimate_decade = std::max(st.sup_to_penultimate_decade, q);
    if (i >= half) st.outer_half_sup = std::max(st.outer_half_sup, q);
  }
  st.finite = std::isfinite(st.sup_full) && std::isfinite(st.outer_half_sup);
  st.relative_change = st.sup_to_penultimate_decade > 0.0
                           ? st.sup_full / st.sup_to_penultimate_decade - 1.0
                           : kInf;
  return st;
}

}  // namespace qlgs
