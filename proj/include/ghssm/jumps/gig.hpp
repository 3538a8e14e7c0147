#pragma once

// Shot-noise simulation of GIG subordinator jumps for lambda <= -1/2 and
// delta, gamma > 0, and their extension to GH jumps.
//
// The GIG Levy density is the z-marginal of the bivariate intensity
//   Q(x, z) = 2 e^{-x gamma^2/2} / (pi^2 x) * e^{-z^2 x / (2 delta^2)} / (z |H_|lambda|(z)|^2).
// The z-range is split at z1.  Below z1 (process N1) two gamma processes
// dominate; above z1 (process N2) a tempered stable process with alpha = 1/2
// dominates.  Each candidate x is thinned on its marginal bound, marked with a
// z from a truncated square-root gamma law and thinned again on the Hankel
// factor.  The union N1 u N2 is a realisation of the GIG jumps.

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>

#include "ghssm/jumps/dominating.hpp"
#include "ghssm/jumps/params.hpp"
#include "ghssm/jumps/truncated_gamma.hpp"
#include "ghssm/numerics/special_functions.hpp"

namespace ghssm {

/// Largest admissible z1 for order |lambda|:
///   (2^{1-2|lambda|} pi / Gamma(|lambda|)^2)^{1/(1-2|lambda|)}.
inline double z1_upper_bound(double lambda) {
  if (!std::isfinite(lambda)) throw std::domain_error("z1_upper_bound: non-finite lambda");
  const double nu = std::fabs(lambda);
  if (nu == 0.5) throw std::domain_error("z1_upper_bound: exponent degenerates at |lambda| = 0.5");
  if (lambda > -0.5) throw std::domain_error("z1_upper_bound: requires lambda < -0.5");
  const double log_base = (1.0 - 2.0 * nu) * std::log(2.0) + std::log(std::numbers::pi) - 2.0 * std::lgamma(nu);
  return std::exp(log_base / (1.0 - 2.0 * nu));
}

namespace detail {

inline void check_gig_call(const GIGParams& p, double z1, const Interval& iv, const TruncationBudget& budget) {
  budget.validate();
  if (!(iv.start < iv.end) || !std::isfinite(iv.start) || !std::isfinite(iv.end))
    throw std::invalid_argument("GIG sampler: interval must be non-empty");
  const double bound = z1_upper_bound(p.lambda());
  if (!(z1 > 0.0) || z1 > bound * (1.0 + 1e-12))
    throw std::domain_error("GIG sampler: z1 must lie in (0, z1_upper_bound(lambda)]");
}

}  // namespace detail

/// Jumps of N1: the part of the GIG process with marks z in (0, z1).
template <RandomSource Rng>
JumpSequence sample_gig_n1(const GIGParams& p, double z1, const Interval& iv, const TruncationBudget& budget,
                           Rng& rng, AcceptanceMonitor* monitor = nullptr) {
  detail::check_gig_call(p, z1, iv, budget);
  const double nu = p.order();
  const double dt = iv.length();
  const double two_d2 = 2.0 * p.delta() * p.delta();
  const double z1_sq = z1 * z1;
  const double a1 = z1 / (2.0 * std::numbers::pi * nu * (1.0 + nu));
  const double a2 = z1 / (2.0 * std::numbers::pi * (1.0 + nu));
  const double beta1 = 0.5 * p.gamma() * p.gamma();
  const double beta2 = beta1 + z1_sq / two_d2;
  const TruncationBudget local = budget.over(dt);

  auto candidates = sample_gamma_process(a1 * dt, beta1, local, rng, monitor);
  const auto second = sample_gamma_process(a2 * dt, beta2, local, rng, monitor);
  candidates.insert(candidates.end(), second.begin(), second.end());

  const double log_hankel_front = std::log(2.0 / std::numbers::pi) + (2.0 * nu - 1.0) * std::log(z1);
  JumpSequence out{iv, {}};
  for (double x : candidates) {
    const double y = z1_sq * x / two_d2;
    const double p4 = numerics::lower_incomplete_gamma_scaled(nu, y) * nu * (1.0 + nu) / (1.0 + nu * std::exp(-y));
    if (rng.uniform() > checked_probability(p4, AcceptanceStage::GigN1Incomplete, monitor)) continue;

    // z = sqrt(Y), Y ~ Gamma(nu, rate x / (2 delta^2)) restricted to Y < z1^2.
    const double log_rate = std::log(x / two_d2);
    const double log_p_y = numerics::log_incomplete_gamma(nu, y).log_p;
    const double t = gamma_quantile_below(nu, y, log_p_y, rng.uniform());
    const double log_z = 0.5 * (std::log(t) - log_rate);
    const double z = std::exp(log_z);

    const double log_p6 = log_hankel_front - numerics::log_hankel1_abs_sq(nu, z) - 2.0 * nu * log_z;
    if (rng.uniform() > checked_probability(std::exp(log_p6), AcceptanceStage::GigN1Hankel, monitor)) continue;
    out.records.push_back({iv.start + dt * rng.uniform(), x, std::nullopt});
  }
  out.sort_by_time();
  return out;
}

/// Jumps of N2: the part of the GIG process with marks z >= z1.
template <RandomSource Rng>
JumpSequence sample_gig_n2(const GIGParams& p, double z1, const Interval& iv, const TruncationBudget& budget,
                           Rng& rng, AcceptanceMonitor* monitor = nullptr) {
  detail::check_gig_call(p, z1, iv, budget);
  const double nu = p.order();
  const double dt = iv.length();
  const double two_d2 = 2.0 * p.delta() * p.delta();
  const double z1_sq = z1 * z1;
  const double C = p.delta() / std::sqrt(2.0 * std::numbers::pi);
  const double beta = z1_sq / two_d2 + 0.5 * p.gamma() * p.gamma();

  const auto candidates = sample_tempered_stable(C * dt, 0.5, beta, budget.over(dt), rng, monitor);

  const double log_front = std::log(2.0 / std::numbers::pi);
  constexpr double kErfcFloor = 1e-280;
  JumpSequence out{iv, {}};
  for (double x : candidates) {
    const double y = z1_sq * x / two_d2;
    // Gamma(1/2, y) / (sqrt(pi) e^{-y}) = Q(1/2, y) e^{y} = erfc(sqrt y) e^{y}
    const double q = std::erfc(std::sqrt(y));
    const bool direct = q > kErfcFloor;
    const double log_q = direct ? std::log(q) : numerics::log_incomplete_gamma(0.5, y).log_q;
    const double p3 = direct ? q * std::exp(y) : std::exp(log_q + y);
    if (rng.uniform() > checked_probability(p3, AcceptanceStage::GigN2Incomplete, monitor)) continue;

    // z = sqrt(Y), Y ~ Gamma(1/2, rate x / (2 delta^2)) restricted to Y >= z1^2.
    const double log_rate = std::log(x / two_d2);
    const double u = rng.uniform();
    const double t = direct ? half_gamma_quantile_above(y, q, u) : gamma_quantile_above(0.5, y, log_q, u);
    const double log_z = 0.5 * (std::log(t) - log_rate);
    const double z = std::exp(log_z);

    const double log_p5 = log_front - log_z - numerics::log_hankel1_abs_sq(nu, z);
    if (rng.uniform() > checked_probability(std::exp(log_p5), AcceptanceStage::GigN2Hankel, monitor)) continue;
    out.records.push_back({iv.start + dt * rng.uniform(), x, std::nullopt});
  }
  out.sort_by_time();
  return out;
}

/// GIG jumps on the interval: N1 u N2, time-sorted.  z1 defaults to its upper bound.
template <RandomSource Rng>
JumpSequence sample_gig(const GIGParams& p, std::optional<double> z1, const Interval& iv,
                        const TruncationBudget& budget, Rng& rng, AcceptanceMonitor* monitor = nullptr) {
  const double z = z1.value_or(z1_upper_bound(p.lambda()));
  JumpSequence out = sample_gig_n1(p, z, iv, budget, rng, monitor);
  JumpSequence n2 = sample_gig_n2(p, z, iv, budget, rng, monitor);
  out.records.insert(out.records.end(), n2.records.begin(), n2.records.end());
  out.sort_by_time();
  return out;
}

/// W_i = mu_w Z_i + sigma_w sqrt(Z_i) U_i with U_i iid N(0, 1).
template <RandomSource Rng>
JumpSequence attach_gh_jumps(JumpSequence seq, const GHParams& params, Rng& rng) {
  params.validate();
  for (auto& r : seq.records) r.w = params.mu_w * r.z + params.sigma_w * std::sqrt(r.z) * rng.normal();
  return seq;
}

/// W(t) = sum_i W_i 1{V_i <= t}.
inline double shot_noise_path(const JumpSequence& seq, double t) {
  double sum = 0.0;
  for (const auto& r : seq.records) {
    if (r.time > t) break;
    if (!r.w) throw std::logic_error("shot_noise_path: GH jumps not attached");
    sum += *r.w;
  }
  return sum;
}

}  // namespace ghssm
