// variational.cpp
#include "qlgs/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace qlgs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> geometric(double lo, double hi, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  v.back() = hi;
  return v;
}

// Golden-section maximisation of f on [a, b].
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b, int iterations = 80) {
  const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
  double x1 = b - phi * (b - a), x2 = a + phi * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iterations && b - a > 1e-14 * std::abs(b); ++i) {
    if (f1 < f2) {
      a = x1; x1 = x2; f1 = f2;
      x2 = a + phi * (b - a); f2 = f(x2);
    } else {
      b = x2; x2 = x1; f2 = f1;
      x1 = b - phi * (b - a); f1 = f(x1);
    }
  }
  return f1 > f2 ? std::pair{x1, f1} : std::pair{x2, f2};
}

// Sampled maximum refined on the neighbouring samples.
template <class F>
std::pair<double, double> refined_max(F&& f, const std::vector<double>& x,
                                      const std::vector<double>& y) {
  const auto it = std::max_element(y.begin(), y.end());
  const std::size_t k = static_cast<std::size_t>(it - y.begin());
  if (k == 0 || k + 1 == x.size()) return {x[k], y[k]};
  const auto [xm, ym] = golden_max(f, x[k - 1], x[k + 1]);
  return ym > y[k] ? std::pair{xm, ym} : std::pair{x[k], y[k]};
}

double seed_value(double r, double zeta, double r0, double w) {
  if (r <= r0) return zeta;
  if (r >= r0 + w) return 0.0;
  const double x = (r - r0) / w;
  return zeta * (1.0 - x * x * x * (10.0 - 15.0 * x + 6.0 * x * x));
}

double seed_slope(double r, double zeta, double r0, double w) {
  if (r <= r0 || r >= r0 + w) return 0.0;
  const double x = (r - r0) / w;
  return -zeta * 30.0 * x * x * (1.0 - x) * (1.0 - x) / w;
}

}  // namespace

FunctionalParams::FunctionalParams(const NonlinearitySpec& spec, const OperatorSpec& op,
                                   double lambda, double lambda0)
    : lambda_(lambda),
      lambda0_(lambda0),
      decomposition_(std::make_shared<const Decomposition>(decompose(spec))),
      op_(op) {
  if (!(lambda0 > 0.0 && lambda0 <= lambda && lambda <= 1.0))
    throw InvalidArgument("functional parameters need 0 < lambda0 <= lambda <= 1");
}

FunctionalParams FunctionalParams::with_lambda(double lambda) const {
  if (!(lambda0_ <= lambda && lambda <= 1.0))
    throw InvalidArgument("functional parameters need lambda0 <= lambda <= 1");
  FunctionalParams out = *this;
  out.lambda_ = lambda;
  return out;
}

double gradient_energy(const Profile& profile, const OperatorSpec& op) {
  double s = 0.0;
  for (const auto& t : op.terms()) s += t.coefficient / t.exponent * profile.grad_power(t.exponent);
  return s;
}

double action(const Profile& profile, const NonlinearitySpec& spec, const OperatorSpec& op) {
  return gradient_energy(profile, op) - profile.integral([&spec](double v) { return spec.G(v); });
}

double action_lambda(const Profile& profile, const FunctionalParams& params) {
  const auto& d = params.decomposition();
  const double g1 = profile.integral([&d](double v) { return d.G1(v); });
  const double g2 = profile.integral([&d](double v) { return d.G2(v); });
  return gradient_energy(profile, params.op()) + g2 - params.lambda() * g1;
}

double lambda0_for_seed(const Profile& seed, const NonlinearitySpec& spec) {
  const auto d = decompose(spec);
  const double g1 = seed.integral([&d](double v) { return d.G1(v); });
  const double g2 = seed.integral([&d](double v) { return d.G2(v); });
  if (!(g1 - g2 > 0.0) || !std::isfinite(g1) || !std::isfinite(g2))
    throw SeedRejected("seed rejected: int G(z) = " + std::to_string(g1 - g2) + " is not positive");
  const double rho = g2 / g1;
  return rho + 0.1 * (1.0 - rho);
}

Profile default_seed(const NonlinearitySpec& spec, const OperatorSpec& op, SeedShape shape) {
  const double zeta = spec.zeta();
  if (!(spec.G(zeta) > 0.0))
    throw SeedRejected("seed rejected: G(zeta) = " + std::to_string(spec.G(zeta)) +
                       " is not positive");
  if (!(shape.plateau_radius > 0.0) || !(shape.ramp_width > 0.0))
    throw InvalidArgument("seed shape needs positive plateau radius and ramp width");
  const double w = shape.ramp_width;
  for (double r0 = shape.plateau_radius; r0 <= 64.0 * shape.plateau_radius; r0 *= 2.0) {
    const double r_max = std::max(2.0, 2.0 * (r0 + w));
    auto grid = RadialGrid::graded(shape.cells, r_max, op.dimension());
    auto z = Profile::sample(
        grid, [=](double r) { return seed_value(r, zeta, r0, w); },
        [=](double r) { return seed_slope(r, zeta, r0, w); });
    if (z.integral([&spec](double v) { return spec.G(v); }) > 0.0) return z;
  }
  throw SeedRejected("seed rejected: int G(z) <= 0 for every plateau radius tried");
}

DilationData dilation_data(const Profile& z, const FunctionalParams& params) {
  DilationData d;
  d.dimension = params.op().dimension();
  for (const auto& t : params.op().terms()) {
    d.terms.push_back(t);
    d.grad_powers.push_back(z.grad_power(t.exponent));
  }
  const auto& dec = params.decomposition();
  d.int_G1 = z.integral([&dec](double v) { return dec.G1(v); });
  d.int_G2 = z.integral([&dec](double v) { return dec.G2(v); });
  return d;
}

double dilation_value(const DilationData& d, double lambda, double t) {
  const double n = d.dimension;
  double s = 0.0;
  for (std::size_t i = 0; i < d.terms.size(); ++i) {
    const double e = d.terms[i].exponent;
    s += d.terms[i].coefficient / e * std::pow(t, n - e) * d.grad_powers[i];
  }
  return s + std::pow(t, n) * (d.int_G2 - lambda * d.int_G1);
}

double dilation_derivative(const DilationData& d, double lambda, double t) {
  const double n = d.dimension;
  double s = 0.0;
  for (std::size_t i = 0; i < d.terms.size(); ++i) {
    const double e = d.terms[i].exponent;
    s += d.terms[i].coefficient / e * (n - e) * std::pow(t, n - e - 1.0) * d.grad_powers[i];
  }
  return s + n * std::pow(t, n - 1.0) * (d.int_G2 - lambda * d.int_G1);
}

PathReport dilation_curve(const Profile& z, const FunctionalParams& params,
                          std::vector<double> t_grid) {
  const auto d = dilation_data(z, params);
  if (!(d.int_G1 - d.int_G2 > 0.0))
    throw SeedRejected("seed rejected: int G(z) = " + std::to_string(d.int_G1 - d.int_G2) +
                       " is not positive");
  const double lambda = params.lambda();
  const auto f = [&](double t) { return dilation_value(d, lambda, t); };

  PathReport rep;
  if (d.int_G2 - lambda * d.int_G1 < 0.0)
    for (double t = 1.0; t < 1e30; t *= 2.0)
      if (f(t) < 0.0) {
        rep.tau = t;
        break;
      }
  if (t_grid.empty()) t_grid = rep.tau ? geometric(*rep.tau * 1e-3, *rep.tau, 256) : geometric(1e-3, 10.0, 256);
  std::sort(t_grid.begin(), t_grid.end());
  rep.t = std::move(t_grid);
  for (double t : rep.t) {
    if (!(t > 0.0)) throw InvalidArgument("dilation parameters must be positive");
    rep.value.push_back(f(t));
  }
  const auto [tm, vm] = refined_max(f, rep.t, rep.value);
  rep.level = vm;
  rep.t_at_max = tm;
  rep.endpoint_value = rep.value.back();
  return rep;
}

MountainPassReport mountain_pass_level(const Profile& seed, const FunctionalParams& params,
                                       const MountainPassConfig& cfg) {
  MountainPassReport rep;
  rep.dilation = dilation_curve(seed, params);

  const auto& dec = params.decomposition();
  const double lambda = params.lambda();
  const double n = params.op().dimension();
  const auto terms = params.op().terms();
  std::vector<double> A;
  for (const auto& t : terms) A.push_back(seed.grad_power(t.exponent));

  // K(s) = int (G2 - lambda G1)(s z), shared by every dilation.
  const auto K = [&](double s) {
    return seed.integral([&](double v) { return dec.G2(s * v) - lambda * dec.G1(s * v); });
  };
  const auto energy = [&](double s, double T) {
    double e = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) {
      const double x = terms[i].exponent;
      e += terms[i].coefficient / x * std::pow(s, x) * std::pow(T, n - x) * A[i];
    }
    return e;
  };

  std::vector<double> s_grid;
  for (int j = -80; j <= 160; ++j) s_grid.push_back(std::exp2(j / 8.0));
  std::vector<double> k_grid;
  for (double s : s_grid) k_grid.push_back(K(s));

  // Max of I_lambda along s -> s z(./T), or +inf when the path never turns negative.
  const auto path_max = [&](double T) {
    std::vector<double> h(s_grid.size());
    std::size_t neg = s_grid.size();
    for (std::size_t j = 0; j < s_grid.size(); ++j) {
      h[j] = energy(s_grid[j], T) + std::pow(T, n) * k_grid[j];
      if (j > 0 && h[j] < 0.0) {
        neg = j;
        break;
      }
    }
    if (neg == s_grid.size()) return kInf;
    const std::vector<double> xs(s_grid.begin(), s_grid.begin() + neg + 1);
    const std::vector<double> ys(h.begin(), h.begin() + neg + 1);
    return refined_max([&](double s) { return energy(s, T) + std::pow(T, n) * K(s); }, xs, ys)
        .second;
  };

  const double center = rep.dilation.tau.value_or(1.0);
  const auto Ts = geometric(center / 8.0, center * 8.0, std::max(3, cfg.dilation_samples));
  std::vector<double> neg_levels;
  for (double T : Ts) neg_levels.push_back(-path_max(T));
  const auto [T_best, neg_best] = refined_max([&](double T) { return -path_max(T); }, Ts, neg_levels);
  rep.level = -neg_best;
  rep.best_dilation = std::isfinite(rep.level) ? T_best : std::numeric_limits<double>::quiet_NaN();

  // Small-sphere probe with norm ||grad w||_{e_min} + ||grad w||_{e_max}.
  std::size_t lo = 0, hi = 0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    if (terms[i].exponent < terms[lo].exponent) lo = i;
    if (terms[i].exponent > terms[hi].exponent) hi = i;
  }
  const auto norm_factor = [&](double T) {
    double s = 0.0;
    for (std::size_t i : {lo, hi}) {
      const double e = terms[i].exponent;
      s += std::pow(T, (n - e) / e) * std::pow(A[i], 1.0 / e);
      if (lo == hi) break;
    }
    return s;
  };
  rep.probe_positive = true;
  for (double radius : cfg.probe_radii) {
    double worst = kInf;
    for (double T : geometric(1e-2, 1e2, 41)) {
      const double s = radius / norm_factor(T);
      worst = std::min(worst, energy(s, T) + std::pow(T, n) * K(s));
    }
    rep.probe.push_back({radius, worst});
  }
  for (const auto& pr : rep.probe) rep.probe_positive = rep.probe_positive && pr.min_value > 0.0;
  return rep;
}

}  // namespace qlgs
