// certificates.cpp
#include "qlgs/certificates.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "qlgs/error.hpp"
#include "qlgs/variational.hpp"

namespace qlgs {

namespace {

IdentityResidual normalised(std::vector<double> terms) {
  double sum = 0.0, scale = 0.0;
  for (double t : terms) {
    sum += t;
    scale = std::max(scale, std::abs(t));
  }
  const double r = scale == 0.0 ? 0.0 : std::abs(sum) / scale;
  return {std::isnan(r) ? std::numeric_limits<double>::infinity() : r, std::move(terms)};
}

}  // namespace

IdentityResidual pohozaev(const Profile& u, const NonlinearitySpec& spec, const OperatorSpec& op) {
  const double n = op.dimension();
  std::vector<double> terms;
  for (const auto& t : op.terms())
    terms.push_back(t.coefficient * (n - t.exponent) / t.exponent * u.grad_power(t.exponent));
  terms.push_back(-n * u.integral([&spec](double v) { return spec.G(v); }));
  return normalised(std::move(terms));
}

IdentityResidual nehari(const Profile& u, const NonlinearitySpec& spec, const OperatorSpec& op) {
  std::vector<double> terms;
  for (const auto& t : op.terms()) terms.push_back(t.coefficient * u.grad_power(t.exponent));
  terms.push_back(-u.integral([&spec](double v) { return spec.g(v) * v; }));
  return normalised(std::move(terms));
}

double pohozaev_residual(const Profile& u, const NonlinearitySpec& spec, const OperatorSpec& op) {
  return pohozaev(u, spec, op).residual;
}

double nehari_residual(const Profile& u, const NonlinearitySpec& spec, const OperatorSpec& op) {
  return nehari(u, spec, op).residual;
}

double action_relation_residual(const Profile& u, const NonlinearitySpec& spec,
                                const OperatorSpec& op) {
  const double I = action(u, spec, op);
  double rel = 0.0;
  for (const auto& t : op.terms()) rel += t.coefficient * u.grad_power(t.exponent);
  rel /= op.dimension();
  const double r = std::abs(I - rel) / (1.0 + std::abs(I));
  return std::isnan(r) ? std::numeric_limits<double>::infinity() : r;
}

NonexistenceCertificate nonexistence_certificate(double alpha, int dimension, int order,
                                                 double beta) {
  if (!(alpha > 1.0)) throw InvalidArgument("nonexistence certificate requires alpha > 1");
  if (dimension < 1 || order < 1) throw InvalidArgument("dimension and order must be positive");
  NonexistenceCertificate c{alpha, dimension, order, beta, {}, true, {}};
  const double n = dimension;
  for (int j = 1; j <= order; ++j) {
    // ((N - 2j) alpha - 2j N) / (2j alpha): exact zero when alpha = 2N/(N-2j).
    const double cj = ((n - 2.0 * j) * alpha - 2.0 * j * n) / (2.0 * j * alpha);
    c.coefficients.push_back(cj);
    c.certified = c.certified && cj <= 0.0;
  }
  std::ostringstream v;
  if (c.certified)
    v << "nonexistence certified: every c_j <= 0, so the identity forces grad u = 0";
  else
    v << "no certificate: some c_j > 0";
  c.verdict = v.str();
  return c;
}

CertificateReport certify(const Profile& u, const NonlinearitySpec& spec, const OperatorSpec& op,
                          const CertificateTolerances& tol) {
  CertificateReport rep{};
  rep.pohozaev_residual = pohozaev_residual(u, spec, op);
  rep.nehari_residual = nehari_residual(u, spec, op);
  rep.action_relation_residual = action_relation_residual(u, spec, op);
  rep.action = action(u, spec, op);

  const auto r = u.grid().nodes();
  const auto v = u.u();
  const double threshold = tol.tail_threshold * std::abs(u.center_value());
  rep.positive = u.center_value() > 0.0;
  rep.monotone = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] <= 0.0) {
      rep.positive = false;
      rep.positivity_violation = r[i];
      break;
    }
    if (v[i] < threshold) break;
    if (i > 0 && v[i] > v[i - 1]) rep.monotone = false;
  }

  rep.decay = decay_statistic(u, op.p());
  rep.decay_pass = rep.decay.finite && std::abs(rep.decay.relative_change) < tol.decay_change;

  if (const auto alpha = spec.pure_power_alpha(); alpha && op.kind() == OperatorKind::BIChain) {
    const auto cert = nonexistence_certificate(*alpha, op.dimension(), op.order(), op.beta());
    double sum = 0.0, scale = 0.0;
    const auto terms = op.terms();
    for (std::size_t j = 0; j < terms.size(); ++j) {
      const double x = cert.coefficients[j] * terms[j].coefficient * u.grad_power(terms[j].exponent);
      sum += x;
      scale += std::abs(x);
    }
    rep.chain_identity_residual = scale == 0.0 ? 0.0 : std::abs(sum) / scale;
  }

  rep.pohozaev_pass = rep.pohozaev_residual < tol.pohozaev;
  rep.nehari_pass = rep.nehari_residual < tol.nehari;
  rep.action_relation_pass = rep.action_relation_residual < tol.action_relation;
  rep.passed = rep.pohozaev_pass && rep.nehari_pass && rep.action_relation_pass && rep.positive &&
               rep.decay_pass;
  return rep;
}

}  // namespace qlgs
