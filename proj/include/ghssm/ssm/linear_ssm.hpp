#pragma once

// Linear vector SDE dX = A X dt + L dW driven by GH shot noise, observed as
// y = H X + eps.  Given the subordinator jumps on (s, t] the state transition is
// Gaussian with mean e^{A(t-s)} x_s + m and covariance S.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "ghssm/jumps/gig.hpp"
#include "ghssm/jumps/params.hpp"
#include "ghssm/random.hpp"

namespace ghssm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Matrix exponential by Pade scaling-and-squaring.
inline Matrix expm(const Matrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("expm: matrix must be square");
  if (!a.allFinite()) throw std::domain_error("expm: non-finite entry");
  if (a.size() == 0) return a;
  return a.exp();
}

namespace detail {

inline void check_langevin(double theta, double dt) {
  if (!(theta < 0.0) || !std::isfinite(theta)) throw std::domain_error("Langevin: theta must be negative");
  if (!(dt >= 0.0) || !std::isfinite(dt)) throw std::domain_error("Langevin: requires u <= t");
}

// (e^{theta dt} - 1) / theta without cancellation for small theta dt.
inline double langevin_drift_gain(double theta, double dt) { return std::expm1(theta * dt) / theta; }

}  // namespace detail

/// e^{A dt} for A = [[0, 1], [0, theta]].
inline Eigen::Matrix2d langevin_expm(double theta, double dt) {
  detail::check_langevin(theta, dt);
  Eigen::Matrix2d f;
  f << 1.0, detail::langevin_drift_gain(theta, dt), 0.0, std::exp(theta * dt);
  return f;
}

/// f_t(u) = e^{A(t-u)} L with L = (0, 1)^T.
inline Eigen::Vector2d langevin_ft(double theta, double t, double u) {
  detail::check_langevin(theta, t - u);
  const double dt = t - u;
  return {detail::langevin_drift_gain(theta, dt), std::exp(theta * dt)};
}

/// f_t(u) f_t(u)^T.
inline Eigen::Matrix2d langevin_ftft(double theta, double t, double u) {
  detail::check_langevin(theta, t - u);
  const double dt = t - u;
  const double e = std::exp(theta * dt);
  const double g = detail::langevin_drift_gain(theta, dt);
  Eigen::Matrix2d m;
  m << g * g, g * e, g * e, e * e;
  return m;
}

class LinearSSM {
 public:
  LinearSSM(Matrix A, Matrix L, Matrix H, double sigma_eps, GHParams gh)
      : A_(std::move(A)), L_(std::move(L)), H_(std::move(H)), sigma_eps_(sigma_eps), gh_(std::move(gh)) {
    const auto d = A_.rows();
    if (d == 0 || A_.cols() != d) throw std::invalid_argument("LinearSSM: A must be square and non-empty");
    if (L_.rows() != d || L_.cols() != 1) throw std::invalid_argument("LinearSSM: L must be D x 1");
    if (H_.rows() != 1 || H_.cols() != d) throw std::invalid_argument("LinearSSM: H must be 1 x D");
    if (!A_.allFinite() || !L_.allFinite() || !H_.allFinite())
      throw std::domain_error("LinearSSM: non-finite system matrix");
    if (!(sigma_eps_ > 0.0) || !std::isfinite(sigma_eps_))
      throw std::domain_error("LinearSSM: sigma_eps must be positive");
    gh_.validate();
  }

  /// Langevin dynamics: position driven by a mean-reverting velocity.
  static LinearSSM langevin(double theta, double sigma_eps, GHParams gh) {
    if (!(theta < 0.0) || !std::isfinite(theta)) throw std::domain_error("LinearSSM::langevin: theta must be negative");
    Matrix A(2, 2);
    A << 0.0, 1.0, 0.0, theta;
    Matrix L(2, 1);
    L << 0.0, 1.0;
    Matrix H(1, 2);
    H << 1.0, 0.0;
    LinearSSM m(std::move(A), std::move(L), std::move(H), sigma_eps, std::move(gh));
    m.theta_ = theta;
    return m;
  }

  [[nodiscard]] const Matrix& A() const { return A_; }
  [[nodiscard]] const Matrix& L() const { return L_; }
  [[nodiscard]] const Matrix& H() const { return H_; }
  [[nodiscard]] double sigma_eps() const { return sigma_eps_; }
  [[nodiscard]] const GHParams& gh() const { return gh_; }
  [[nodiscard]] Eigen::Index dim() const { return A_.rows(); }
  [[nodiscard]] std::optional<double> langevin_theta() const { return theta_; }

  /// F = e^{A dt}.
  [[nodiscard]] Matrix transition(double dt) const {
    if (!(dt >= 0.0)) throw std::domain_error("LinearSSM::transition: negative time step");
    if (theta_) return langevin_expm(*theta_, dt);
    return expm(A_ * dt);
  }

  /// f_t(u) = e^{A(t-u)} L.
  [[nodiscard]] Vector impulse(double t, double u) const {
    if (theta_) return langevin_ft(*theta_, t, u);
    if (!(t >= u)) throw std::domain_error("LinearSSM::impulse: requires u <= t");
    return expm(A_ * (t - u)) * L_;
  }

 private:
  Matrix A_;
  Matrix L_;
  Matrix H_;
  double sigma_eps_;
  GHParams gh_;
  std::optional<double> theta_;
};

struct CondGaussMoments {
  Vector m;
  Matrix S;
};

/// m = sum f_t(V_i) mu_w Z_i (+ mu (t-s) L) and S = sum f_t(V_i) f_t(V_i)^T sigma_w^2 Z_i
/// over the jumps in (s, t].
inline CondGaussMoments cond_moments(const LinearSSM& ssm, const JumpSequence& seq, double s, double t) {
  if (!(s < t)) throw std::invalid_argument("cond_moments: requires s < t");
  if (seq.interval.start < s || seq.interval.end > t)
    throw std::invalid_argument("cond_moments: jump interval not inside (s, t]");
  const auto d = ssm.dim();
  const double mu_w = ssm.gh().mu_w;
  const double s2 = ssm.gh().sigma_w * ssm.gh().sigma_w;
  CondGaussMoments out{Vector::Zero(d), Matrix::Zero(d, d)};

  if (const auto theta = ssm.langevin_theta()) {
    // Accumulate the five scalar sums directly; avoids a temporary per jump.
    double m0 = 0.0, m1 = 0.0, s00 = 0.0, s01 = 0.0, s11 = 0.0;
    for (const auto& r : seq.records) {
      if (!(r.time > s && r.time <= t)) throw std::invalid_argument("cond_moments: jump time outside (s, t]");
      const double dt = t - r.time;
      const double e = std::exp(*theta * dt);
      const double g = detail::langevin_drift_gain(*theta, dt);
      m0 += g * r.z;
      m1 += e * r.z;
      s00 += g * g * r.z;
      s01 += g * e * r.z;
      s11 += e * e * r.z;
    }
    out.m << mu_w * m0, mu_w * m1;
    out.S << s2 * s00, s2 * s01, s2 * s01, s2 * s11;
  } else {
    for (const auto& r : seq.records) {
      if (!(r.time > s && r.time <= t)) throw std::invalid_argument("cond_moments: jump time outside (s, t]");
      const Vector f = ssm.impulse(t, r.time);
      out.m += f * (mu_w * r.z);
      out.S.noalias() += (s2 * r.z) * f * f.transpose();
    }
    out.S = 0.5 * (out.S + out.S.transpose()).eval();
  }
  if (ssm.gh().mu != 0.0) out.m += ssm.gh().mu * (t - s) * ssm.L().col(0);
  return out;
}

/// Symmetric square root factor R with R R^T = S.  Negative eigenvalues down to
/// -1e-8 max(1, lambda_max) are treated as roundoff and clipped; anything below
/// is an error.
inline Matrix psd_sqrt(const Matrix& S) {
  if (S.rows() != S.cols()) throw std::invalid_argument("psd_sqrt: matrix must be square");
  if (!S.allFinite()) throw std::domain_error("psd_sqrt: non-finite entry");
  const Matrix sym = 0.5 * (S + S.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym);
  if (es.info() != Eigen::Success) throw std::runtime_error("psd_sqrt: eigen-decomposition failed");
  Vector ev = es.eigenvalues();
  const double floor = -1e-8 * std::max(1.0, ev.maxCoeff());
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < floor) throw std::domain_error("psd_sqrt: covariance has eigenvalue " + std::to_string(ev[i]));
    ev[i] = std::sqrt(std::max(ev[i], 0.0));
  }
  return es.eigenvectors() * ev.asDiagonal();
}

/// Draw x_t ~ N(e^{A(t-s)} x_s + m, S) given the jumps on (s, t].
template <RandomSource Rng>
Vector transition_sample(const LinearSSM& ssm, const Vector& x_s, const JumpSequence& seq, double s, double t,
                         Rng& rng) {
  if (x_s.size() != ssm.dim()) throw std::invalid_argument("transition_sample: state dimension mismatch");
  const auto mom = cond_moments(ssm, seq, s, t);
  Vector x = ssm.transition(t - s) * x_s + mom.m;
  if (seq.empty()) return x;
  Vector n(ssm.dim());
  for (Eigen::Index i = 0; i < n.size(); ++i) n[i] = rng.normal();
  x += psd_sqrt(mom.S) * n;
  return x;
}

struct SimulatedPath {
  std::vector<double> times;
  std::vector<Vector> states;
  std::vector<JumpSequence> jumps;  // one per interval (t_{i-1}, t_i], t_{-1} = 0
  std::vector<double> observations;
};

/// Forward simulation from x0 at time 0 through ascending observation times.
template <RandomSource Rng>
SimulatedPath simulate_path(const LinearSSM& ssm, const Vector& x0, const std::vector<double>& obs_times,
                            const TruncationBudget& budget, std::optional<double> z1, Rng& rng) {
  if (x0.size() != ssm.dim()) throw std::invalid_argument("simulate_path: x0 dimension mismatch");
  SimulatedPath out;
  out.times = obs_times;
  double prev = 0.0;
  Vector x = x0;
  for (double t : obs_times) {
    if (!(t > prev) || !std::isfinite(t)) throw std::invalid_argument("simulate_path: times must ascend from 0");
    const Interval iv{prev, t};
    auto seq = sample_gig(ssm.gh().gig, z1, iv, budget, rng);
    x = transition_sample(ssm, x, seq, prev, t, rng);
    const double y = (ssm.H() * x)(0, 0) + ssm.sigma_eps() * rng.normal();
    out.states.push_back(x);
    out.jumps.push_back(std::move(seq));
    out.observations.push_back(y);
    prev = t;
  }
  return out;
}

}  // namespace ghssm
