#pragma once

// Kalman recursions conditional on a jump sequence.

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "ghssm/ssm/linear_ssm.hpp"

namespace ghssm {

struct GaussianState {
  Vector mu;
  Matrix C;
  double time = 0.0;
};

/// mu_{t|s} = F mu_s + m, C_{t|s} = F C_s F^T + S.
inline GaussianState kalman_predict(const GaussianState& prior, const LinearSSM& ssm, const JumpSequence& seq,
                                    double s, double t) {
  if (prior.mu.size() != ssm.dim() || prior.C.rows() != ssm.dim() || prior.C.cols() != ssm.dim())
    throw std::invalid_argument("kalman_predict: dimension mismatch");
  if (prior.time != s) throw std::invalid_argument("kalman_predict: prior is not at time s");
  const auto mom = cond_moments(ssm, seq, s, t);
  const Matrix F = ssm.transition(t - s);
  GaussianState out{F * prior.mu + mom.m, F * prior.C * F.transpose() + mom.S, t};
  out.C = 0.5 * (out.C + out.C.transpose()).eval();
  return out;
}

struct CorrectionResult {
  GaussianState state;
  double log_lik;
};

/// Scalar-observation update.  The covariance uses the Joseph form so that it
/// stays symmetric PSD under roundoff.
inline CorrectionResult kalman_correct(const GaussianState& pred, const LinearSSM& ssm, double y) {
  if (pred.mu.size() != ssm.dim()) throw std::invalid_argument("kalman_correct: dimension mismatch");
  const double r = ssm.sigma_eps() * ssm.sigma_eps();
  const Vector ch = pred.C * ssm.H().transpose();
  const double innovation_var = (ssm.H() * ch)(0, 0) + r;
  if (!(innovation_var > 0.0) || !std::isfinite(innovation_var))
    throw std::domain_error("kalman_correct: non-positive innovation variance");
  const double innovation = y - (ssm.H() * pred.mu)(0, 0);
  const Vector k = ch / innovation_var;
  const Matrix ikh = Matrix::Identity(ssm.dim(), ssm.dim()) - k * ssm.H();
  GaussianState post{pred.mu + k * innovation, ikh * pred.C * ikh.transpose() + (r * k) * k.transpose(), pred.time};
  post.C = 0.5 * (post.C + post.C.transpose()).eval();
  const double log_lik =
      -0.5 * (std::log(2.0 * std::numbers::pi * innovation_var) + innovation * innovation / innovation_var);
  return {std::move(post), log_lik};
}

}  // namespace ghssm
