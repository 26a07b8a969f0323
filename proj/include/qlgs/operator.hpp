// operator.hpp
#ifndef QLGS_OPERATOR_HPP
#define QLGS_OPERATOR_HPP

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace qlgs {

/// One term c|w|^{e-2}w of the radial flux. The matching energy density is
/// (c/e)|w|^e.
struct FluxTerm {
  double coefficient;
  double exponent;
};

enum class OperatorKind { PQ, BIChain };

/**
 * Divergence-form quasilinear operator -div(phi(|grad u|) grad u) acting on
 * radial functions through its scalar flux Phi(w) = sum_e c_e |w|^{e-2} w.
 *
 * Two families are supported:
 *  - PQ:      -Delta_p u - beta Delta_q u, terms {(1, p), (beta, q)}.
 *  - BIChain: truncated Born-Infeld expansion of order k, terms {(a_j, 2j)}.
 *
 * beta = 0 is accepted for PQ as a degenerate mode reproducing the classical
 * p-Laplacian scalar field equation.
 */
class OperatorSpec {
 public:
  static OperatorSpec pq(double p, double q, double beta, int dimension);
  static OperatorSpec bi_chain(int k, double beta, int dimension);

  OperatorKind kind() const noexcept { return kind_; }
  int dimension() const noexcept { return dimension_; }
  double beta() const noexcept { return beta_; }
  /// PQ: p. BIChain: 2.
  double p() const noexcept { return p_; }
  /// PQ: q. BIChain: 2k.
  double q() const noexcept { return q_; }
  /// BIChain order; 0 for PQ.
  int order() const noexcept { return k_; }
  bool degenerate() const noexcept { return kind_ == OperatorKind::PQ && beta_ == 0.0; }

  /// Active flux terms (the q-term is dropped in degenerate mode).
  std::span<const FluxTerm> terms() const noexcept { return terms_; }

  double flux(double w) const;
  double flux_derivative(double w) const;
  double invert_flux(double y) const;

  /// Decay exponent of the p-harmonic tail u ~ b r^{-kappa}, kappa = (N-p)/(p-1).
  double harmonic_tail_exponent() const;

  std::string describe() const;

 private:
  OperatorSpec() = default;

  OperatorKind kind_ = OperatorKind::PQ;
  int dimension_ = 3;
  double beta_ = 1.0;
  double p_ = 2.0;
  double q_ = 4.0;
  int k_ = 0;
  std::vector<FluxTerm> terms_;
};

/// a_1..a_k with a_j = (2j-3)!!/(j-1)! beta^{j-1}.
std::vector<double> bi_chain_coefficients(int k, double beta);

struct CriticalExponents {
  double p_star;
  /// q N/(N-q) when q < N; empty when the caller must supply q* > q_star_floor.
  std::optional<double> q_star;
  double q_star_floor;
};

CriticalExponents critical_exponents(const OperatorSpec& op);

/// Smallest admissible order for the Born-Infeld chain, max{N/2, N/(N-2)}.
double bi_chain_min_order(int dimension);

}  // namespace qlgs

#endif  // QLGS_OPERATOR_HPP
