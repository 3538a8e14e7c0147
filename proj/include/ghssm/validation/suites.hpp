#pragma once

// Self-checks run by the `validate` command: marginal laws of the jump
// samplers, a Hankel identity and the conditional-moment formulas.

#include <cmath>
#include <cstdint>
#include <exception>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ghssm/jumps/gig.hpp"
#include "ghssm/ssm/linear_ssm.hpp"
#include "ghssm/validation/ks.hpp"

namespace ghssm::validation {

struct SuiteOptions {
  GHParams gh{GIGParams(-0.8, 1.0, 2.0)};
  double theta = -0.5;
  TruncationBudget budget{};
  std::optional<double> z1;
  int samples = 2000;
  int moment_resamples = 100000;
  std::uint64_t seed = 0;
  double alpha = 0.01;
  double moment_tolerance = 0.02;
};

struct MomentComparison {
  double mean_error;        // |m_hat - m| / max(|m|, sqrt(tr S))
  double covariance_error;  // ||S_hat - S||_F / ||S||_F
};

/// Monte-Carlo mean and covariance of sum f_t(V_i) W_i, W_i resampled from its
/// normal variance-mean mixture with the Z_i held fixed, against (m, S).
/// The location drift is left out on both sides.
template <RandomSource Rng>
MomentComparison compare_cond_moments(const LinearSSM& ssm, const JumpSequence& seq, double s, double t,
                                      int resamples, Rng& rng) {
  GHParams driftless = ssm.gh();
  driftless.mu = 0.0;
  const LinearSSM model = ssm.langevin_theta()
                              ? LinearSSM::langevin(*ssm.langevin_theta(), ssm.sigma_eps(), driftless)
                              : LinearSSM(ssm.A(), ssm.L(), ssm.H(), ssm.sigma_eps(), driftless);
  const auto mom = cond_moments(model, seq, s, t);
  const auto d = ssm.dim();
  std::vector<Vector> f;
  f.reserve(seq.size());
  for (const auto& r : seq.records) f.push_back(ssm.impulse(t, r.time));
  Vector sum = Vector::Zero(d);
  Matrix sum2 = Matrix::Zero(d, d);
  Vector x(d);
  for (int k = 0; k < resamples; ++k) {
    x.setZero();
    for (std::size_t i = 0; i < f.size(); ++i) {
      const double z = seq.records[i].z;
      x += f[i] * (driftless.mu_w * z + driftless.sigma_w * std::sqrt(z) * rng.normal());
    }
    sum += x;
    sum2.noalias() += x * x.transpose();
  }
  const double n = resamples;
  const Vector mean = sum / n;
  const Matrix cov = (sum2 - n * mean * mean.transpose()) / (n - 1.0);
  const double scale = std::max(mom.m.norm(), std::sqrt(std::max(mom.S.trace(), 0.0)));
  const double s_norm = mom.S.norm();
  return {scale > 0.0 ? (mean - mom.m).norm() / scale : (mean - mom.m).norm(),
          s_norm > 0.0 ? (cov - mom.S).norm() / s_norm : cov.norm()};
}

/// |H_{1/2}(z)|^2 = 2 / (pi z) on a grid, and the Wronskian
/// J_{nu+1} Y_nu - J_nu Y_{nu+1} = 2 / (pi z) at order nu.  Returns the worst
/// relative deviation.
inline double hankel_identity_error(double nu) {
  double worst = 0.0;
  for (double z = 0.01; z <= 200.0; z *= 1.07) {
    const double h = numerics::hankel1_abs_sq(0.5, z);
    worst = std::max(worst, std::fabs(h * std::numbers::pi * z / 2.0 - 1.0));
    const auto a = numerics::bessel_jy(nu, z);
    const auto b = numerics::bessel_jy(nu + 1.0, z);
    const double w = b.j * a.y - a.j * b.y;
    worst = std::max(worst, std::fabs(w * std::numbers::pi * z / 2.0 - 1.0));
  }
  return worst;
}

inline nlohmann::json run_validation_suite(const SuiteOptions& opt) {
  using nlohmann::json;
  opt.gh.validate();
  json tests = json::array();
  bool all = true;
  auto add = [&](json entry) {
    all = all && entry.value("pass", false);
    tests.push_back(std::move(entry));
  };
  const auto& gig = opt.gh.gig;
  const auto n = static_cast<std::size_t>(opt.samples);

  std::vector<double> z_tot, w_sym, w_skew;
  std::string sampler_error;
  AcceptanceMonitor monitor;
  try {
    GHParams sym = opt.gh;
    sym.mu_w = 0.0;
    sym.mu = 0.0;
    GHParams skew = sym;
    skew.mu_w = 0.5;
    for (std::size_t i = 0; i < n; ++i) {
      RandomStream rng(opt.seed, i);
      auto seq = sample_gig(gig, opt.z1, Interval{0.0, 1.0}, opt.budget, rng, &monitor);
      z_tot.push_back(seq.total_z());
      double a = 0.0, b = 0.0;
      for (const auto& r : attach_gh_jumps(seq, sym, rng).records) a += *r.w;
      for (const auto& r : attach_gh_jumps(seq, skew, rng).records) b += *r.w;
      w_sym.push_back(a);
      w_skew.push_back(b);
    }
  } catch (const std::exception& e) {
    sampler_error = e.what();
  }

  auto ks_entry = [&](const char* name, auto&& run) {
    json e{{"name", name}, {"n", n}, {"alpha", opt.alpha}};
    if (!sampler_error.empty()) {
      e["pass"] = false;
      e["error"] = sampler_error;
      return e;
    }
    const KsResult r = run();
    e["statistic"] = r.statistic;
    e["p_value"] = r.p_value;
    e["pass"] = r.p_value > opt.alpha;
    return e;
  };

  add(ks_entry("gig_ks", [&] { return ks_test_gig(z_tot, gig.lambda(), gig.delta(), gig.gamma()); }));
  add(ks_entry("gh_ks_symmetric", [&] {
    GHParams p = opt.gh;
    p.mu_w = 0.0;
    p.mu = 0.0;
    return ks_test_gh(w_sym, p.to_distribution());
  }));
  add(ks_entry("gh_ks_skewed", [&] {
    GHParams p = opt.gh;
    p.mu_w = 0.5;
    p.mu = 0.0;
    return ks_test_gh(w_skew, p.to_distribution());
  }));

  {
    json e{{"name", "dominating_bounds"}, {"tolerance", kAcceptanceTolerance}};
    json stages = json::object();
    for (int s = 0; s < static_cast<int>(AcceptanceStage::Count); ++s) {
      const auto& tally = monitor[static_cast<AcceptanceStage>(s)];
      if (tally.count == 0) continue;
      stages[stage_name(static_cast<AcceptanceStage>(s))] = {
          {"count", tally.count}, {"min", tally.min}, {"max", tally.max}};
    }
    e["stages"] = stages;
    e["pass"] = sampler_error.empty();
    if (!sampler_error.empty()) e["error"] = sampler_error;
    add(std::move(e));
  }

  {
    const double err = hankel_identity_error(gig.order());
    add({{"name", "hankel_identity"}, {"order", gig.order()}, {"max_relative_error", err}, {"tolerance", 1e-10},
         {"pass", err <= 1e-10}});
  }

  {
    json e{{"name", "moment_matching"}, {"resamples", opt.moment_resamples}, {"tolerance", opt.moment_tolerance}};
    try {
      RandomStream rng(opt.seed, n + 1);
      const auto ssm = LinearSSM::langevin(opt.theta, 1.0, opt.gh);
      const auto seq = sample_gig(gig, opt.z1, Interval{0.0, 1.0}, opt.budget, rng);
      const auto cmp = compare_cond_moments(ssm, seq, 0.0, 1.0, opt.moment_resamples, rng);
      e["jumps"] = seq.size();
      e["mean_error"] = cmp.mean_error;
      e["covariance_error"] = cmp.covariance_error;
      e["pass"] = cmp.mean_error <= opt.moment_tolerance && cmp.covariance_error <= opt.moment_tolerance;
    } catch (const std::exception& ex) {
      e["pass"] = false;
      e["error"] = ex.what();
    }
    add(std::move(e));
  }

  return {{"generator", kGeneratorName}, {"seed", opt.seed}, {"tests", tests}, {"pass", all}};
}

}  // namespace ghssm::validation
