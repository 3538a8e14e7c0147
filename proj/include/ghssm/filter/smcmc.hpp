#pragma once

// Sequential MCMC filter.  On each observation interval a Metropolis-Hastings
// chain runs over the latent jump sequence with independence proposals from
// the GIG prior; each chain state carries its conditional Kalman posterior and
// the chain is collapsed to one Gaussian by moment matching.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "ghssm/filter/kalman.hpp"
#include "ghssm/jumps/gig.hpp"

namespace ghssm {

struct FilterConfig {
  int n_iter = 100;  // chain length, including the initial prior draw
  int burn_in = 0;
  std::optional<double> z1;  // empty: z1_upper_bound(lambda)
  TruncationBudget budget{};
  std::uint64_t seed = 0;
  bool store_jumps = false;

  void validate() const {
    if (n_iter < 1) throw std::invalid_argument("FilterConfig: n_iter must be positive");
    if (burn_in < 0 || burn_in >= n_iter) throw std::invalid_argument("FilterConfig: burn_in must be in [0, n_iter)");
    if (z1 && !(*z1 > 0.0)) throw std::invalid_argument("FilterConfig: z1 must be positive");
    budget.validate();
  }
};

struct ChainState {
  JumpSequence jumps;
  GaussianState posterior;
  double log_lik;
};

struct MHResult {
  ChainState state;
  bool accepted;
};

/// Proposes jumps on an interval from the GIG prior.
struct GigPriorProposal {
  GIGParams params;
  std::optional<double> z1;
  TruncationBudget budget;

  template <RandomSource Rng>
  JumpSequence operator()(const Interval& iv, Rng& rng) const {
    return sample_gig(params, z1, iv, budget, rng);
  }
};

template <class P, class Rng>
concept JumpProposal = RandomSource<Rng> && requires(const P& p, const Interval& iv, Rng& rng) {
  { p(iv, rng) } -> std::convertible_to<JumpSequence>;
};

namespace detail {

template <class Proposal, RandomSource Rng>
ChainState propose(const GaussianState& prior, const LinearSSM& ssm, double t, double y, const Proposal& proposal,
                   Rng& rng) {
  auto jumps = proposal(Interval{prior.time, t}, rng);
  const auto pred = kalman_predict(prior, ssm, jumps, prior.time, t);
  auto corr = kalman_correct(pred, ssm, y);
  return {std::move(jumps), std::move(corr.state), corr.log_lik};
}

}  // namespace detail

/// Metropolis-Hastings decision for an independence proposal from the prior:
/// accept when log u < min(0, proposed - current).  A proposal without a finite
/// likelihood is never accepted; any finite proposal replaces a current state
/// whose likelihood underflowed to zero.
inline bool mh_accept(double current_log_lik, double proposed_log_lik, double u) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  if (std::isnan(proposed_log_lik) || proposed_log_lik == neg_inf) return false;
  if (current_log_lik == neg_inf || std::isnan(current_log_lik)) return true;
  return std::log(u) < std::min(0.0, proposed_log_lik - current_log_lik);
}

/// One MH move: accept with probability min(1, p(y | proposed) / p(y | current)),
/// evaluated in log space.  A rejection returns `current` untouched.
template <class Proposal, RandomSource Rng>
  requires JumpProposal<Proposal, Rng>
MHResult mh_step(const GaussianState& prior, const LinearSSM& ssm, double t, double y, const ChainState& current,
                 const Proposal& proposal, Rng& rng) {
  auto cand = detail::propose(prior, ssm, t, y, proposal, rng);
  const bool accept = mh_accept(current.log_lik, cand.log_lik, rng.uniform());
  if (accept) return {std::move(cand), true};
  return {current, false};
}

/// Moment-matched single Gaussian for an equally weighted mixture.
inline GaussianState collapse(const std::vector<GaussianState>& chain) {
  if (chain.empty()) throw std::invalid_argument("collapse: empty chain");
  const auto d = chain.front().mu.size();
  const double n = static_cast<double>(chain.size());
  Vector mu = Vector::Zero(d);
  for (const auto& g : chain) {
    if (g.mu.size() != d) throw std::invalid_argument("collapse: dimension mismatch");
    mu += g.mu;
  }
  mu /= n;
  Matrix C = Matrix::Zero(d, d);
  for (const auto& g : chain) {
    const Vector dm = g.mu - mu;
    C += g.C + dm * dm.transpose();
  }
  C /= n;
  C = 0.5 * (C + C.transpose()).eval();
  return {std::move(mu), std::move(C), chain.front().time};
}

inline double log_mean_exp(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("log_mean_exp: empty input");
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s / static_cast<double>(v.size()));
}

struct FilterStepResult {
  GaussianState collapsed;
  double acceptance_rate = 1.0;
  std::optional<std::vector<JumpSequence>> chain_jumps;
  double log_marginal = 0.0;
};

/// Filtering update from prior (at prior.time) to the observation y at time t.
/// The chain starts from one unconditional proposal followed by n_iter - 1 MH
/// moves; acceptance_rate counts the MH moves only (1 when there are none).
template <class Proposal, RandomSource Rng>
  requires JumpProposal<Proposal, Rng>
FilterStepResult filter_step(const GaussianState& prior, const LinearSSM& ssm, double y, double t,
                             const FilterConfig& config, const Proposal& proposal, Rng& rng) {
  config.validate();
  if (!(prior.time < t)) throw std::invalid_argument("filter_step: requires prior.time < t");
  const auto n = static_cast<std::size_t>(config.n_iter);
  const auto keep_from = static_cast<std::size_t>(config.burn_in);

  std::vector<GaussianState> kept;
  std::vector<double> log_liks;
  std::vector<JumpSequence> jumps;
  kept.reserve(n - keep_from);
  log_liks.reserve(n - keep_from);

  ChainState cur = detail::propose(prior, ssm, t, y, proposal, rng);
  std::size_t accepted = 0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j > 0) {
      auto r = mh_step(prior, ssm, t, y, cur, proposal, rng);
      if (r.accepted) {
        ++accepted;
        cur = std::move(r.state);
      }
    }
    if (j >= keep_from) {
      kept.push_back(cur.posterior);
      log_liks.push_back(cur.log_lik);
      if (config.store_jumps) jumps.push_back(cur.jumps);
    }
  }

  FilterStepResult out;
  out.collapsed = collapse(kept);
  out.acceptance_rate = n > 1 ? static_cast<double>(accepted) / static_cast<double>(n - 1) : 1.0;
  out.log_marginal = log_mean_exp(log_liks);
  if (config.store_jumps) out.chain_jumps = std::move(jumps);
  return out;
}

struct Observation {
  double time;
  double value;
};

/// Default filtering prior: zero mean, covariance 100 I at time 0.
inline GaussianState default_initial_state(const LinearSSM& ssm, double time = 0.0) {
  return {Vector::Zero(ssm.dim()), 100.0 * Matrix::Identity(ssm.dim(), ssm.dim()), time};
}

/// Sequential filter over strictly ascending observations.  Step k draws from
/// the stream (config.seed, k).  An observation exactly at the initial time is
/// absorbed by a correction without prediction.
template <class Proposal>
  requires JumpProposal<Proposal, RandomStream>
std::vector<FilterStepResult> run_filter(const LinearSSM& ssm, const std::vector<Observation>& obs,
                                         const FilterConfig& config, const Proposal& proposal,
                                         std::optional<GaussianState> initial = std::nullopt) {
  config.validate();
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!std::isfinite(obs[i].time) || !std::isfinite(obs[i].value))
      throw std::invalid_argument("run_filter: non-finite observation");
    if (i > 0 && !(obs[i].time > obs[i - 1].time))
      throw std::invalid_argument("run_filter: observation times must be strictly ascending");
  }
  GaussianState state = initial ? *initial : default_initial_state(ssm);
  std::vector<FilterStepResult> out;
  out.reserve(obs.size());
  for (std::size_t k = 0; k < obs.size(); ++k) {
    const auto& o = obs[k];
    if (o.time < state.time) throw std::invalid_argument("run_filter: observation before the initial state");
    FilterStepResult r;
    if (o.time == state.time) {
      auto c = kalman_correct(state, ssm, o.value);
      r.collapsed = std::move(c.state);
      r.log_marginal = c.log_lik;
      if (config.store_jumps) r.chain_jumps.emplace();
    } else {
      RandomStream rng(config.seed, k);
      r = filter_step(state, ssm, o.value, o.time, config, proposal, rng);
    }
    state = r.collapsed;
    out.push_back(std::move(r));
  }
  return out;
}

/// run_filter with proposals from the model's GIG prior.
inline std::vector<FilterStepResult> run_filter(const LinearSSM& ssm, const std::vector<Observation>& obs,
                                                const FilterConfig& config,
                                                std::optional<GaussianState> initial = std::nullopt) {
  return run_filter(ssm, obs, config, GigPriorProposal{ssm.gh().gig, config.z1, config.budget}, std::move(initial));
}

}  // namespace ghssm
