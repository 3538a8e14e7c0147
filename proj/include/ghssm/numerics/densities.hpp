#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ghssm/numerics/special_functions.hpp"

namespace ghssm::numerics {

/// Five-parameter generalised hyperbolic law in the (lambda, alpha, beta, delta, mu)
/// parameterisation, with 0 <= |beta| < alpha and delta > 0.
struct GHDistribution {
  double lambda = -0.5;
  double alpha = 1.0;
  double beta = 0.0;
  double delta = 1.0;
  double mu = 0.0;

  void validate() const {
    if (!std::isfinite(lambda) || !std::isfinite(alpha) || !std::isfinite(beta) || !std::isfinite(delta) ||
        !std::isfinite(mu))
      throw std::domain_error("GHDistribution: non-finite parameter");
    if (!(delta > 0.0)) throw std::domain_error("GHDistribution: delta must be positive");
    if (!(alpha > 0.0)) throw std::domain_error("GHDistribution: alpha must be positive");
    if (!(std::fabs(beta) < alpha)) throw std::domain_error("GHDistribution: |beta| must be below alpha");
  }

  /// sqrt(alpha^2 - beta^2), the gamma of the GIG mixing law.
  [[nodiscard]] double gamma() const { return std::sqrt((alpha - beta) * (alpha + beta)); }
};

/// log of the GIG(lambda, delta, gamma) density at x > 0.
inline double log_gig_pdf(double x, double lambda, double delta, double gamma) {
  if (!std::isfinite(x) || !std::isfinite(lambda) || !std::isfinite(delta) || !std::isfinite(gamma))
    throw std::domain_error("gig_pdf: non-finite argument");
  if (!(x > 0.0)) throw std::domain_error("gig_pdf: x must be positive");
  if (!(delta > 0.0) || !(gamma > 0.0)) throw std::domain_error("gig_pdf: delta and gamma must be positive");
  const double log_norm = lambda * std::log(gamma / delta) - std::log(2.0) - log_bessel_k(lambda, delta * gamma);
  return log_norm + (lambda - 1.0) * std::log(x) - 0.5 * (delta * delta / x + gamma * gamma * x);
}

/// (gamma/delta)^lambda / (2 K_lambda(delta gamma)) x^{lambda-1} exp(-(delta^2/x + gamma^2 x)/2)
inline double gig_pdf(double x, double lambda, double delta, double gamma) {
  return std::exp(log_gig_pdf(x, lambda, delta, gamma));
}

/// log f_GH(x), evaluated with the normaliser and both Bessel factors in log space.
inline double log_gh_pdf(double x, const GHDistribution& d) {
  d.validate();
  if (!std::isfinite(x)) throw std::domain_error("gh_pdf: non-finite argument");
  const double g = d.gamma();
  const double log_a = 0.5 * d.lambda * std::log(g * g) - 0.5 * std::log(2.0 * std::numbers::pi) -
                       (d.lambda - 0.5) * std::log(d.alpha) - d.lambda * std::log(d.delta) -
                       log_bessel_k(d.lambda, d.delta * g);
  const double dx = x - d.mu;
  const double r2 = d.delta * d.delta + dx * dx;
  const double r = std::sqrt(r2);
  return log_a + 0.5 * (d.lambda - 0.5) * std::log(r2) + log_bessel_k(d.lambda - 0.5, d.alpha * r) + d.beta * dx;
}

inline double gh_pdf(double x, const GHDistribution& d) { return std::exp(log_gh_pdf(x, d)); }

/// Gaussian log density.
inline double log_normal_pdf(double x, double mean, double variance) {
  const double r = x - mean;
  return -0.5 * (std::log(2.0 * std::numbers::pi * variance) + r * r / variance);
}

}  // namespace ghssm::numerics
