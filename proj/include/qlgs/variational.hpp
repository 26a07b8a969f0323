// variational.hpp
#ifndef QLGS_VARIATIONAL_HPP
#define QLGS_VARIATIONAL_HPP

#include <memory>
#include <optional>
#include <vector>

#include "qlgs/error.hpp"
#include "qlgs/nonlinearity.hpp"
#include "qlgs/operator.hpp"
#include "qlgs/radial.hpp"

namespace qlgs {

/// Parameters of the perturbed functional
///   I_lambda(u) = sum_e (c_e/e) ||grad u||_e^e + int G2(u) - lambda int G1(u).
class FunctionalParams {
 public:
  /// Requires 0 < lambda0 <= lambda <= 1.
  FunctionalParams(const NonlinearitySpec& spec, const OperatorSpec& op, double lambda,
                   double lambda0);

  double lambda() const noexcept { return lambda_; }
  double lambda0() const noexcept { return lambda0_; }
  const Decomposition& decomposition() const noexcept { return *decomposition_; }
  const OperatorSpec& op() const noexcept { return op_; }

  FunctionalParams with_lambda(double lambda) const;

 private:
  double lambda_;
  double lambda0_;
  std::shared_ptr<const Decomposition> decomposition_;
  OperatorSpec op_;
};

/// sum_e (c_e/e) ||grad u||_e^e.
double gradient_energy(const Profile& profile, const OperatorSpec& op);

double action(const Profile& profile, const NonlinearitySpec& spec, const OperatorSpec& op);
double action_lambda(const Profile& profile, const FunctionalParams& params);

/// lambda0 = rho + 0.1 (1 - rho), rho = int G2(z) / int G1(z), so that
/// lambda0 int G1(z) - int G2(z) > 0. Throws SeedRejected unless int G(z) > 0.
double lambda0_for_seed(const Profile& seed, const NonlinearitySpec& spec);

struct SeedShape {
  double plateau_radius = 1.0;
  double ramp_width = 1.0;
  std::size_t cells = 4096;
};

/// z = zeta on [0, R0], smootherstep cutoff to 0 on [R0, R0 + w]. The plateau
/// radius doubles (up to 64 R0) until int G(z) > 0; throws SeedRejected otherwise.
Profile default_seed(const NonlinearitySpec& spec, const OperatorSpec& op, SeedShape shape = {});

/// Data of a seed from which I_lambda(z(./t)) is evaluated in closed form.
struct DilationData {
  std::vector<FluxTerm> terms;
  std::vector<double> grad_powers;
  double int_G1;
  double int_G2;
  int dimension;
};

DilationData dilation_data(const Profile& z, const FunctionalParams& params);
/// sum_e (c_e/e) t^{N-e} A_e + t^N (int G2(z) - lambda int G1(z)).
double dilation_value(const DilationData& d, double lambda, double t);
double dilation_derivative(const DilationData& d, double lambda, double t);

struct PathReport {
  std::vector<double> t;
  std::vector<double> value;
  /// Max over the sampled path (refined between samples).
  double level;
  double t_at_max;
  double endpoint_value;
  /// Smallest power of two >= 1 with I_lambda(z(./tau)) < 0.
  std::optional<double> tau;
};

/// Dilation path t -> z(./t). An empty t_grid samples 256 geometric points on
/// [tau/1000, tau] (or [1/1000, 10] when no tau exists).
PathReport dilation_curve(const Profile& z, const FunctionalParams& params,
                          std::vector<double> t_grid = {});

struct SphereProbe {
  double radius;
  /// min over sampled dilations t of I_lambda(s z(./t)) with
  /// ||grad w||_{e_min} + ||grad w||_{e_max} = radius.
  double min_value;
};

struct MountainPassReport {
  PathReport dilation;
  /// min over T of max over s of I_lambda(s z(./T)): an upper bound for c_lambda.
  double level;
  double best_dilation;
  std::vector<SphereProbe> probe;
  bool probe_positive;
};

struct MountainPassConfig {
  int dilation_samples = 33;
  int amplitude_samples = 96;
  std::vector<double> probe_radii = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
};

MountainPassReport mountain_pass_level(const Profile& seed, const FunctionalParams& params,
                                       const MountainPassConfig& cfg = {});

}  // namespace qlgs

#endif  // QLGS_VARIATIONAL_HPP
