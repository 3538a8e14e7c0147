#pragma once

// Inverse-CDF sampling of a Gamma(shape, 1) variable restricted to (0, T) or
// [T, inf).  The regularised incomplete gamma is inverted in s = log t with a
// Newton iteration that falls back to bisection whenever a step leaves the
// current bracket; iteration stops at a relative tolerance of 1e-12 in t.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <utility>

#include "ghssm/numerics/special_functions.hpp"

namespace ghssm {

namespace detail {

inline constexpr double kQuantileTol = 1e-12;

/// Root of a monotone f on [lo, hi] (f(lo), f(hi) of opposite sign), f returning
/// {value, derivative}.  Starts from s0.
template <class F>
double bracketed_newton(F&& f, double lo, double hi, double s0) {
  double s = std::clamp(s0, lo, hi);
  auto [flo, dlo] = f(lo);
  (void)dlo;
  for (int it = 0; it < 200; ++it) {
    const auto [v, dv] = f(s);
    if (v == 0.0) return s;
    if ((v < 0.0) == (flo < 0.0)) {
      lo = s;
      flo = v;
    } else {
      hi = s;
    }
    double next = s - v / dv;
    if (!(next > lo && next < hi) || !std::isfinite(next)) next = 0.5 * (lo + hi);
    if (std::fabs(next - s) < kQuantileTol || hi - lo < kQuantileTol) return next;
    s = next;
  }
  throw std::runtime_error("truncated gamma inversion failed to converge");
}

}  // namespace detail

/// t with P(a, t) = u P(a, T), t in (0, T).  `log_p_T` is log P(a, T).
inline double gamma_quantile_below(double a, double T, double log_p_T, double u) {
  if (!(T > 0.0)) throw std::domain_error("gamma_quantile_below: T must be positive");
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("gamma_quantile_below: u must be in (0,1)");
  const double log_T = std::log(T);
  // P(a,t) = t^a / Gamma(a+1) (1 + O(t)), so the power law is exact to O(T).
  if (T < 1e-14) return std::exp(log_T + std::log(u) / a);
  const double target = std::log(u) + log_p_T;
  const double lg = std::lgamma(a);
  auto f = [&](double s) {
    const double t = std::exp(s);
    const double lp = numerics::log_incomplete_gamma(a, t).log_p;
    return std::pair{lp - target, std::exp(a * s - t - lg - lp)};
  };
  const double s0 = log_T + std::log(u) / a;
  double lo = s0;
  while (f(lo).first >= 0.0) lo -= 1.0 + std::fabs(lo) * 0.1;
  return std::exp(detail::bracketed_newton(f, lo, log_T, s0));
}

/// t with Q(a, t) = u Q(a, T), t in [T, inf).  `log_q_T` is log Q(a, T).
inline double gamma_quantile_above(double a, double T, double log_q_T, double u) {
  if (!(T >= 0.0)) throw std::domain_error("gamma_quantile_above: T must be non-negative");
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("gamma_quantile_above: u must be in (0,1)");
  const double target = std::log(u) + log_q_T;
  const double lg = std::lgamma(a);
  auto f = [&](double s) {
    const double t = std::exp(s);
    const double lq = numerics::log_incomplete_gamma(a, t).log_q;
    return std::pair{lq - target, -std::exp(a * s - t - lg - lq)};
  };
  // Starting point: for a = 1/2, Q(1/2, t) = P(|N| > sqrt(2t)); otherwise
  // Wilson-Hilferty.  Deep in the tail t ~ T - log u.
  const double q = std::exp(target);
  double t0 = T - std::log(u);
  if (q > 1e-300) {
    if (a == 0.5) {
      const double n = numerics::normal_quantile_approx(0.5 * q);
      t0 = std::max(0.5 * n * n, T);
    } else {
      const double z = -numerics::normal_quantile_approx(q);
      const double c = 1.0 - 1.0 / (9.0 * a) + z / (3.0 * std::sqrt(a));
      if (c > 0.0) t0 = std::max(a * c * c * c, T);
    }
  }
  const double lo = T > 0.0 ? std::log(T) : std::log(std::max(t0, 1e-300)) - 50.0;
  double hi = std::log(std::max(t0, T) + 1.0);
  while (f(hi).first > 0.0) hi += 1.0;
  if (t0 <= 0.0) t0 = std::exp(lo);
  return std::exp(detail::bracketed_newton(f, lo, hi, std::log(t0)));
}

/// a = 1/2 case of gamma_quantile_above through Q(1/2, t) = erfc(sqrt t).
/// `q_T` is erfc(sqrt T) and must be a normal (non-underflowed) number.
inline double half_gamma_quantile_above(double T, double q_T, double u) {
  if (!(T >= 0.0)) throw std::domain_error("half_gamma_quantile_above: T must be non-negative");
  if (!(u > 0.0 && u < 1.0)) throw std::domain_error("half_gamma_quantile_above: u must be in (0,1)");
  if (!(q_T > std::numeric_limits<double>::min())) throw std::domain_error("half_gamma_quantile_above: q_T underflows");
  const double target = u * q_T;
  const double root_t = std::sqrt(T);
  // erfc(w) = 2 Phi(-w sqrt 2); Halley steps from the rational starting guess.
  double w = std::max(-numerics::normal_quantile_approx(0.5 * target) * std::numbers::sqrt2 * 0.5, root_t);
  for (int it = 0; it < 20; ++it) {
    const double f = std::erfc(w) - target;
    const double df = -2.0 * std::numbers::inv_sqrtpi * std::exp(-w * w);
    const double step = f / df;
    const double dw = step / (1.0 + w * step);
    const double next = std::max(w - dw, root_t);
    if (std::fabs(next - w) <= 1e-15 * std::max(w, 1e-300)) {
      w = next;
      break;
    }
    w = next;
  }
  return std::max(w * w, T);
}

}  // namespace ghssm
