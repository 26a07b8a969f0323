// quadrature.hpp
#ifndef QLGS_QUADRATURE_HPP
#define QLGS_QUADRATURE_HPP

#include <array>
#include <functional>

namespace qlgs::quad {

/// 8-point Gauss-Legendre rule on [-1, 1].
struct GaussLegendre8 {
  static const std::array<double, 8> nodes;
  static const std::array<double, 8> weights;
};

/// Fixed 8-point Gauss-Legendre on [a, b].
double gauss_legendre(const std::function<double(double)>& f, double a, double b);

/// Adaptive Gauss-Kronrod (7/15) on [a, b] to max(abs_tol, rel_tol |I|).
/// Throws QuadratureError when the subdivision budget is exhausted.
double adaptive(const std::function<double(double)>& f, double a, double b,
                double rel_tol = 1e-12, double abs_tol = 1e-300, int max_depth = 48);

}  // namespace qlgs::quad

#endif  // QLGS_QUADRATURE_HPP
