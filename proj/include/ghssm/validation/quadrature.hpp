#pragma once

// Adaptive 15-point Gauss-Kronrod quadrature.  Used as the independent
// reference for densities, special functions and sampler marginals.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ghssm::validation {

struct QuadratureResult {
  double value;
  double error;
};

namespace detail {

struct GK15 {
  static constexpr std::array<double, 8> xgk = {
      0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
      0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
      0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
      0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
  static constexpr std::array<double, 8> wgk = {
      0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
      0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
      0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
      0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
  static constexpr std::array<double, 4> wg = {
      0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
      0.381830050505118944950369775488975, 0.417959183673469387755102040816327};
};

template <class F>
QuadratureResult gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kronrod = fc * GK15::wgk[7];
  double gauss = fc * GK15::wg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = h * GK15::xgk[static_cast<std::size_t>(j)];
    const double f1 = f(c - dx);
    const double f2 = f(c + dx);
    kronrod += GK15::wgk[static_cast<std::size_t>(j)] * (f1 + f2);
    if (j % 2 == 1) gauss += GK15::wg[static_cast<std::size_t>(j / 2)] * (f1 + f2);
  }
  return {kronrod * h, std::fabs((kronrod - gauss) * h)};
}

// tol is absolute and is split evenly between the halves.  An estimate already
// at the rounding floor of its own value is accepted as is.
template <class F>
QuadratureResult adapt(F& f, double a, double b, double tol, QuadratureResult est, int depth) {
  const double m = 0.5 * (a + b);
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * std::fabs(est.value);
  if (est.error <= std::max(tol, floor) || depth >= 60 || !(m > a && m < b)) return est;
  const auto l = adapt(f, a, m, 0.5 * tol, gk15(f, a, m), depth + 1);
  const auto r = adapt(f, m, b, 0.5 * tol, gk15(f, m, b), depth + 1);
  return {l.value + r.value, l.error + r.error};
}

}  // namespace detail

/// Integral of f over the finite interval [a, b].
template <class F>
QuadratureResult integrate(F&& f, double a, double b, double abs_tol = 1e-12, double rel_tol = 1e-12) {
  if (!std::isfinite(a) || !std::isfinite(b)) throw std::domain_error("integrate: limits must be finite");
  if (a == b) return {0.0, 0.0};
  if (a > b) {
    auto r = integrate(f, b, a, abs_tol, rel_tol);
    return {-r.value, r.error};
  }
  // Two panels for the initial estimate, so a narrow central peak still sets
  // the relative target.
  const double m = 0.5 * (a + b);
  const auto l = detail::gk15(f, a, m), r = detail::gk15(f, m, b);
  const double tol = std::max(abs_tol, rel_tol * std::fabs(l.value + r.value));
  const auto left = detail::adapt(f, a, m, 0.5 * tol, l, 1);
  const auto right = detail::adapt(f, m, b, 0.5 * tol, r, 1);
  return {left.value + right.value, left.error + right.error};
}

/// Integral of f over [a, inf) through t = a + u / (1 - u).
template <class F>
QuadratureResult integrate_to_infinity(F&& f, double a, double abs_tol = 1e-12, double rel_tol = 1e-12) {
  auto g = [&](double u) {
    if (u >= 1.0) return 0.0;
    const double one_minus = 1.0 - u;
    const double v = f(a + u / one_minus) / (one_minus * one_minus);
    return std::isfinite(v) ? v : 0.0;
  };
  return integrate(g, 0.0, 1.0, abs_tol, rel_tol);
}

/// Integral of f over (-inf, b] through t = b - u / (1 - u).
template <class F>
QuadratureResult integrate_from_minus_infinity(F&& f, double b, double abs_tol = 1e-12, double rel_tol = 1e-12) {
  return integrate_to_infinity([&](double t) { return f(2.0 * b - t); }, b, abs_tol, rel_tol);
}

}  // namespace ghssm::validation
