#pragma once

// One-sample Kolmogorov-Smirnov test against a CDF obtained by quadrature of a
// density.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "ghssm/numerics/densities.hpp"
#include "ghssm/validation/quadrature.hpp"

namespace ghssm::validation {

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t n = 0;
};

/// Asymptotic Kolmogorov survival function with Stephens' finite-n correction.
inline double kolmogorov_p_value(double d, std::size_t n) {
  const double sn = std::sqrt(static_cast<double>(n));
  const double lambda = (sn + 0.12 + 0.11 / sn) * d;
  if (lambda < 0.2) return 1.0;
  double sum = 0.0;
  double sign = 1.0;
  for (int k = 1; k <= 200; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    sum += sign * term;
    if (term < 1e-16 * std::fabs(sum)) break;
    sign = -sign;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

/// KS statistic from ascending samples and their CDF values.
inline KsResult ks_from_cdf(const std::vector<double>& cdf_sorted) {
  const std::size_t n = cdf_sorted.size();
  if (n == 0) throw std::invalid_argument("ks_from_cdf: no samples");
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = cdf_sorted[i];
    d = std::max(d, std::max(static_cast<double>(i + 1) / static_cast<double>(n) - f,
                             f - static_cast<double>(i) / static_cast<double>(n)));
  }
  return {d, kolmogorov_p_value(d, n), n};
}

/// CDF values at ascending points by accumulating quadrature of `pdf` between
/// consecutive points.  `lower` is the left end of the support (may be -inf).
template <class Pdf>
std::vector<double> cdf_by_quadrature(const std::vector<double>& sorted, Pdf&& pdf, double lower) {
  std::vector<double> out;
  out.reserve(sorted.size());
  double acc = 0.0;
  double prev = lower;
  for (double x : sorted) {
    if (x > prev) {
      if (std::isinf(prev))
        acc += integrate_from_minus_infinity(pdf, x, 1e-13, 1e-10).value;
      else
        acc += integrate(pdf, prev, x, 1e-13, 1e-10).value;
      prev = x;
    }
    out.push_back(std::min(acc, 1.0));
  }
  return out;
}

/// KS test of samples against GIG(lambda, delta, gamma).
inline KsResult ks_test_gig(std::vector<double> samples, double lambda, double delta, double gamma) {
  std::sort(samples.begin(), samples.end());
  const double log_norm =
      lambda * std::log(gamma / delta) - std::log(2.0) - numerics::log_bessel_k(lambda, delta * gamma);
  auto pdf = [&](double x) {
    if (!(x > 0.0)) return 0.0;
    return std::exp(log_norm + (lambda - 1.0) * std::log(x) - 0.5 * (delta * delta / x + gamma * gamma * x));
  };
  // Samples at or below zero would be a sampler bug; they contribute F = 0.
  return ks_from_cdf(cdf_by_quadrature(samples, pdf, 0.0));
}

/// KS test of samples against the five-parameter GH law.
inline KsResult ks_test_gh(std::vector<double> samples, const numerics::GHDistribution& d) {
  d.validate();
  std::sort(samples.begin(), samples.end());
  auto pdf = [&](double x) { return numerics::gh_pdf(x, d); };
  return ks_from_cdf(cdf_by_quadrature(samples, pdf, -std::numeric_limits<double>::infinity()));
}

}  // namespace ghssm::validation
