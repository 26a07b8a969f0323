// radial.hpp
#ifndef QLGS_RADIAL_HPP
#define QLGS_RADIAL_HPP

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <utility>
#include <vector>

namespace qlgs {

/// Surface area of the unit sphere in R^N, 2 pi^{N/2} / Gamma(N/2).
double sphere_area(int dimension);

/**
 * Graded radial grid 0 = r_0 < r_1 < ... < r_M = R_max.
 *
 * A quarter of the cells pack [0, 1] geometrically; the rest are uniform on
 * [1, R_max]. The geometric ratio is chosen so that the cell sizes match at
 * r = 1, which keeps neighbouring-cell ratios close to one and lets the grid
 * converge under refinement.
 */
class RadialGrid {
 public:
  static std::shared_ptr<const RadialGrid> graded(std::size_t cells, double r_max, int dimension);
  /// base extended to factor * R_max: cells grow by at most 2% per node until
  /// they reach the geometric spacing of log_nodes nodes over the extension.
  static std::shared_ptr<const RadialGrid> with_far_field(const RadialGrid& base, double factor,
                                                          std::size_t log_nodes);
  /// Arbitrary strictly increasing nodes starting at 0 (at least 64 cells).
  static std::shared_ptr<const RadialGrid> from_nodes(std::vector<double> nodes, int dimension);

  std::span<const double> nodes() const noexcept { return nodes_; }
  std::size_t cells() const noexcept { return nodes_.size() - 1; }
  double r_max() const noexcept { return nodes_.back(); }
  int dimension() const noexcept { return dimension_; }
  double sphere_area() const noexcept { return omega_; }
  /// Quadrature weights including omega_{N-1} r^{N-1}: sum_i w_i f(r_i)
  /// approximates omega_{N-1} int_0^{R_max} r^{N-1} f(r) dr.
  std::span<const double> weights() const noexcept { return weights_; }
  double geometric_ratio() const noexcept { return ratio_; }

  /// Index of the first node with r_i >= r (cells()+1 if none).
  std::size_t lower_index(double r) const;

 private:
  RadialGrid(std::vector<double> nodes, int dimension, double ratio);

  std::vector<double> nodes_;
  std::vector<double> weights_;
  int dimension_;
  double omega_;
  double ratio_;
};

/// Algebraic continuation u(r) = amplitude * r^{-exponent} for r > start.
struct PowerTail {
  double start;
  double amplitude;
  double exponent;
};

/**
 * Radial function sampled on a grid: values u(r_i) and derivatives u'(r_i),
 * plus an optional algebraic tail beyond R_max that every integral includes.
 */
class Profile {
 public:
  Profile(std::shared_ptr<const RadialGrid> grid, std::vector<double> u, std::vector<double> du,
          std::optional<PowerTail> tail = std::nullopt,
          std::span<const double> cached_exponents = {});

  /// Samples analytic u and u' on the grid.
  static Profile sample(std::shared_ptr<const RadialGrid> grid,
                        const std::function<double(double)>& u,
                        const std::function<double(double)>& du,
                        std::optional<PowerTail> tail = std::nullopt,
                        std::span<const double> cached_exponents = {});

  const RadialGrid& grid() const noexcept { return *grid_; }
  const std::shared_ptr<const RadialGrid>& grid_ptr() const noexcept { return grid_; }
  std::span<const double> u() const noexcept { return u_; }
  std::span<const double> du() const noexcept { return du_; }
  const std::optional<PowerTail>& tail() const noexcept { return tail_; }
  double center_value() const noexcept { return u_.front(); }

  /// ||grad u||_e^e including the tail.
  double grad_power(double e) const;
  /// omega int r^{N-1} F(u) dr including the tail (+inf if the tail diverges).
  double integral(const std::function<double(double)>& F) const;
  /// ||u||_e^e.
  double lebesgue_power(double e) const;

  /// Contribution of the tail model to grad_power(e), or an extrapolated
  /// estimate of the neglected part when there is no tail model.
  double grad_tail_estimate(double e) const;

  /// Value and derivative at arbitrary r by cubic Hermite interpolation
  /// (tail model or zero beyond R_max).
  std::pair<double, double> evaluate(double r) const;

 private:
  double grad_power_uncached(double e) const;

  std::shared_ptr<const RadialGrid> grid_;
  std::vector<double> u_;
  std::vector<double> du_;
  std::optional<PowerTail> tail_;
  std::vector<std::pair<double, double>> grad_cache_;
};

double grad_norm(const Profile& profile, double e);
double lebesgue_norm(const Profile& profile, double r_exp);
double integral_of(const Profile& profile, const std::function<double(double)>& F);

/// ||u||_r^r / (||u||_{p*}^{theta p*} ||u||_{q*}^{(1-theta) q*}), r = theta p* + (1-theta) q*.
double interpolation_check(const Profile& profile, double p_star, double q_star, double r_exp);

/// u_t(r) = u(r / t) resampled on the same grid.
Profile dilated(const Profile& profile, double t);

/// Running supremum of r^{(N-p)/p}|u(r)| / ||grad u||_p over r >= 1.
struct DecayStatistic {
  /// sup over the outer half of the grid nodes.
  double outer_half_sup;
  /// sup over [1, R_max/10] and over [1, R_max].
  double sup_to_penultimate_decade;
  double sup_full;
  /// sup_full / sup_to_penultimate_decade - 1.
  double relative_change;
  bool finite;
};

DecayStatistic decay_statistic(const Profile& profile, double p);

}  // namespace qlgs

#endif  // QLGS_RADIAL_HPP
