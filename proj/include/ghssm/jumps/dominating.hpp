#pragma once

// Poisson epochs and the two tractable dominating processes (tempered stable
// and gamma) used to thin towards the GIG Levy measure.

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "ghssm/jumps/params.hpp"
#include "ghssm/random.hpp"

namespace ghssm {

/// Thinning probabilities above this are a broken dominating bound.
inline constexpr double kAcceptanceTolerance = 1e-9;

class BoundViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class AcceptanceStage : int {
  TemperedStable = 0,
  Gamma,
  GigN1Incomplete,  // incomplete-gamma ratio on the gamma candidates
  GigN1Hankel,      // Hankel ratio on the marked z < z1
  GigN2Incomplete,  // Gamma(1/2, .) ratio on the tempered-stable candidates
  GigN2Hankel,      // Hankel ratio on the marked z >= z1
  Count
};

inline const char* stage_name(AcceptanceStage s) {
  switch (s) {
    case AcceptanceStage::TemperedStable: return "tempered_stable";
    case AcceptanceStage::Gamma: return "gamma";
    case AcceptanceStage::GigN1Incomplete: return "gig_n1_incomplete_gamma";
    case AcceptanceStage::GigN1Hankel: return "gig_n1_hankel";
    case AcceptanceStage::GigN2Incomplete: return "gig_n2_incomplete_gamma";
    case AcceptanceStage::GigN2Hankel: return "gig_n2_hankel";
    default: return "unknown";
  }
}

/// Optional tally of every thinning probability a sampler evaluates.
struct AcceptanceMonitor {
  struct Tally {
    std::size_t count = 0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
  };
  std::array<Tally, static_cast<std::size_t>(AcceptanceStage::Count)> stages{};

  void record(AcceptanceStage s, double p) {
    auto& t = stages[static_cast<std::size_t>(s)];
    ++t.count;
    t.min = std::min(t.min, p);
    t.max = std::max(t.max, p);
  }
  [[nodiscard]] const Tally& operator[](AcceptanceStage s) const { return stages[static_cast<std::size_t>(s)]; }
};

/// Records p and throws BoundViolation if it is not a probability.
inline double checked_probability(double p, AcceptanceStage stage, AcceptanceMonitor* monitor) {
  if (monitor) monitor->record(stage, p);
  if (!(p >= 0.0 && p <= 1.0 + kAcceptanceTolerance))
    throw BoundViolation(std::string("acceptance probability out of [0,1] at ") + stage_name(stage) + ": " +
                         std::to_string(p));
  return p;
}

/// Epochs of a Poisson process of the given rate, as cumulative Exp(1)
/// increments divided by the rate, up to (excluding) the first one past
/// budget.gamma_max.
template <RandomSource Rng>
std::vector<double> poisson_epochs(double rate, const TruncationBudget& budget, Rng& rng) {
  if (!(rate > 0.0) || !std::isfinite(rate)) throw std::domain_error("poisson_epochs: rate must be positive");
  budget.validate();
  std::vector<double> epochs;
  epochs.reserve(static_cast<std::size_t>(rate * budget.gamma_max * 1.1) + 8);
  double g = 0.0;
  for (;;) {
    g += rng.exponential() / rate;
    if (g > budget.gamma_max) break;
    epochs.push_back(g);
  }
  return epochs;
}

/// Jumps of a tempered stable process with Levy density C x^{-1-alpha} e^{-beta x},
/// generated from unit-rate epochs as x = (alpha Gamma / C)^{-1/alpha} and kept
/// with probability e^{-beta x}.
template <RandomSource Rng>
std::vector<double> sample_tempered_stable(double C, double alpha, double beta, const TruncationBudget& budget,
                                           Rng& rng, AcceptanceMonitor* monitor = nullptr) {
  if (!(C > 0.0) || !std::isfinite(C)) throw std::domain_error("sample_tempered_stable: C must be positive");
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::domain_error("sample_tempered_stable: alpha must be in (0,1)");
  if (!(beta >= 0.0) || !std::isfinite(beta))
    throw std::domain_error("sample_tempered_stable: beta must be non-negative");
  const auto epochs = poisson_epochs(1.0, budget, rng);
  std::vector<double> jumps;
  jumps.reserve(epochs.size());
  for (double g : epochs) {
    const double x = std::pow(alpha * g / C, -1.0 / alpha);
    const double p = checked_probability(std::exp(-beta * x), AcceptanceStage::TemperedStable, monitor);
    if (rng.uniform() <= p) jumps.push_back(x);
  }
  return jumps;
}

/// Jumps of a gamma process with Levy density C x^{-1} e^{-beta x}: candidates
/// x = 1 / (beta (exp(Gamma / C) - 1)) kept with probability (1 + beta x) e^{-beta x}.
template <RandomSource Rng>
std::vector<double> sample_gamma_process(double C, double beta, const TruncationBudget& budget, Rng& rng,
                                         AcceptanceMonitor* monitor = nullptr) {
  if (!(C > 0.0) || !std::isfinite(C)) throw std::domain_error("sample_gamma_process: C must be positive");
  if (!(beta > 0.0) || !std::isfinite(beta)) throw std::domain_error("sample_gamma_process: beta must be positive");
  // Beyond this epoch the candidates are below 1e-300 and numerically zero.
  constexpr double kMaxExponent = 690.0;
  const auto epochs = poisson_epochs(1.0, budget, rng);
  std::vector<double> jumps;
  for (double g : epochs) {
    const double e = g / C;
    if (e > kMaxExponent) break;
    const double x = 1.0 / (beta * std::expm1(e));
    const double bx = beta * x;
    const double p = checked_probability((1.0 + bx) * std::exp(-bx), AcceptanceStage::Gamma, monitor);
    if (rng.uniform() <= p) jumps.push_back(x);
  }
  return jumps;
}

}  // namespace ghssm
