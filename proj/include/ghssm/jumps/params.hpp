#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "ghssm/numerics/densities.hpp"

namespace ghssm {

/// GIG subordinator parameters.  Only the regime lambda <= -1/2 with
/// delta, gamma > 0 is simulated, so construction rejects anything else.
class GIGParams {
 public:
  GIGParams(double lambda, double delta, double gamma) : lambda_(lambda), delta_(delta), gamma_(gamma) {
    if (!std::isfinite(lambda) || !std::isfinite(delta) || !std::isfinite(gamma))
      throw std::domain_error("GIGParams: non-finite parameter");
    if (lambda > -0.5) throw std::domain_error("GIGParams: lambda must be <= -0.5");
    if (!(delta > 0.0)) throw std::domain_error("GIGParams: delta must be positive");
    if (!(gamma > 0.0)) throw std::domain_error("GIGParams: gamma must be positive");
  }

  [[nodiscard]] double lambda() const { return lambda_; }
  [[nodiscard]] double delta() const { return delta_; }
  [[nodiscard]] double gamma() const { return gamma_; }
  /// |lambda|, the Hankel/Bessel order used throughout the samplers.
  [[nodiscard]] double order() const { return std::fabs(lambda_); }

 private:
  double lambda_;
  double delta_;
  double gamma_;
};

/// GH driving-noise parameters as a normal variance-mean mixture over the GIG
/// subordinator: jumps are W = mu_w Z + sigma_w sqrt(Z) U.  `mu` is the
/// location of the GH law, applied as a constant drift on W(t).
struct GHParams {
  GIGParams gig;
  double mu_w = 0.0;
  double sigma_w = 1.0;
  double mu = 0.0;

  void validate() const {
    if (!std::isfinite(mu_w) || !std::isfinite(sigma_w) || !std::isfinite(mu))
      throw std::domain_error("GHParams: non-finite parameter");
    if (!(sigma_w > 0.0)) throw std::domain_error("GHParams: sigma_w must be positive");
  }

  /// Law of W(1) in the five-parameter form.  Rescaling the subordinator by
  /// sigma_w^2 gives beta = mu_w / sigma_w^2, delta_GH = sigma_w delta and
  /// alpha = sqrt(beta^2 + gamma^2 / sigma_w^2).
  [[nodiscard]] numerics::GHDistribution to_distribution() const {
    validate();
    const double s2 = sigma_w * sigma_w;
    const double beta = mu_w / s2;
    const double g = gig.gamma() / sigma_w;
    return {gig.lambda(), std::sqrt(beta * beta + g * g), beta, gig.delta() * sigma_w, mu};
  }
};

/// Fixed shot-noise truncation: the unit-rate Poisson epochs driving each
/// dominating process are generated up to gamma_max per unit of time.
struct TruncationBudget {
  double gamma_max = 2000.0;

  void validate() const {
    if (!(gamma_max > 0.0) || !std::isfinite(gamma_max))
      throw std::domain_error("TruncationBudget: gamma_max must be positive and finite");
  }

  /// Epoch ceiling for an interval of the given length.
  [[nodiscard]] TruncationBudget over(double length) const { return {gamma_max * length}; }
};

/// Half-open time interval (start, end].
struct Interval {
  double start = 0.0;
  double end = 1.0;

  [[nodiscard]] double length() const { return end - start; }
  [[nodiscard]] bool contains(double t) const { return t > start && t <= end; }
};

struct JumpRecord {
  double time;                  // V_i
  double z;                     // subordinator jump Z_i
  std::optional<double> w;      // GH jump W_i once attached
};

/// Jumps of one realisation on (start, end], sorted by time.
struct JumpSequence {
  Interval interval;
  std::vector<JumpRecord> records;

  [[nodiscard]] bool empty() const { return records.empty(); }
  [[nodiscard]] std::size_t size() const { return records.size(); }

  void sort_by_time() {
    std::stable_sort(records.begin(), records.end(),
                     [](const JumpRecord& a, const JumpRecord& b) { return a.time < b.time; });
  }

  void validate() const {
    if (!(interval.start < interval.end)) throw std::invalid_argument("JumpSequence: empty interval");
    double last = interval.start;
    for (const auto& r : records) {
      if (!interval.contains(r.time)) throw std::invalid_argument("JumpSequence: jump time outside interval");
      if (!(r.z > 0.0)) throw std::invalid_argument("JumpSequence: non-positive subordinator jump");
      if (r.time < last) throw std::invalid_argument("JumpSequence: records not sorted by time");
      last = r.time;
    }
  }

  [[nodiscard]] double total_z() const {
    double s = 0.0;
    for (const auto& r : records) s += r.z;
    return s;
  }
};

}  // namespace ghssm
