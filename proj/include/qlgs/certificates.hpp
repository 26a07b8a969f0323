// certificates.hpp
#ifndef QLGS_CERTIFICATES_HPP
#define QLGS_CERTIFICATES_HPP

#include <optional>
#include <string>
#include <vector>

#include "qlgs/nonlinearity.hpp"
#include "qlgs/operator.hpp"
#include "qlgs/radial.hpp"

namespace qlgs {

/// Residual of an identity sum_i term_i = 0, normalised by max |term_i|.
struct IdentityResidual {
  double residual;
  std::vector<double> terms;
};

/// sum_e c_e (N-e)/e ||grad u||_e^e - N int G(u).
IdentityResidual pohozaev(const Profile& u, const NonlinearitySpec& spec, const OperatorSpec& op);
/// sum_e c_e ||grad u||_e^e - int g(u) u.
IdentityResidual nehari(const Profile& u, const NonlinearitySpec& spec, const OperatorSpec& op);

double pohozaev_residual(const Profile& u, const NonlinearitySpec& spec, const OperatorSpec& op);
double nehari_residual(const Profile& u, const NonlinearitySpec& spec, const OperatorSpec& op);
/// |I(u) - (1/N) sum_e c_e ||grad u||_e^e| / (1 + |I(u)|).
double action_relation_residual(const Profile& u, const NonlinearitySpec& spec,
                                const OperatorSpec& op);

struct NonexistenceCertificate {
  double alpha;
  int dimension;
  int order;
  double beta;
  /// c_j = (N - 2j)/(2j) - N/alpha, j = 1..k.
  std::vector<double> coefficients;
  bool certified;
  std::string verdict;
};

NonexistenceCertificate nonexistence_certificate(double alpha, int dimension, int order,
                                                 double beta);

struct CertificateTolerances {
  double pohozaev = 1e-3;
  double nehari = 1e-3;
  double action_relation = 1e-3;
  /// Nodes with |u| below this fraction of u(0) count as tail.
  double tail_threshold = 1e-8;
  /// Allowed relative growth of the decay statistic over the last decade.
  double decay_change = 0.2;
};

struct CertificateReport {
  double pohozaev_residual;
  double nehari_residual;
  double action_relation_residual;
  double action;
  bool positive;
  /// First radius with u <= 0 before the tail threshold, if any.
  std::optional<double> positivity_violation;
  bool monotone;
  DecayStatistic decay;
  /// |sum_j c_j a_j A_2j| / sum_j |c_j| a_j A_2j for pure-power chains.
  std::optional<double> chain_identity_residual;

  bool pohozaev_pass;
  bool nehari_pass;
  bool action_relation_pass;
  bool decay_pass;
  bool passed;
};

CertificateReport certify(const Profile& u, const NonlinearitySpec& spec, const OperatorSpec& op,
                          const CertificateTolerances& tol = {});

}  // namespace qlgs

#endif  // QLGS_CERTIFICATES_HPP
