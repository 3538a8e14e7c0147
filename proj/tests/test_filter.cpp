#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>
#include <vector>

#include "ghssm/filter/kalman.hpp"
#include "ghssm/filter/smcmc.hpp"

using namespace ghssm;

namespace {

GHParams gh_default(double mu_w = 0.0) { return {GIGParams(-0.8, 1, 0.5), mu_w, 1.0}; }

double min_eig(const Matrix& m) {
  return Eigen::SelfAdjointEigenSolver<Matrix>(0.5 * (m + m.transpose())).eigenvalues().minCoeff();
}

GaussianState random_state(std::mt19937_64& gen, double time) {
  std::normal_distribution<double> nd;
  Matrix B(2, 2);
  B << nd(gen), nd(gen), nd(gen), nd(gen);
  Vector mu(2);
  mu << nd(gen), nd(gen);
  return {mu, B * B.transpose() + 0.1 * Matrix::Identity(2, 2), time};
}

// Proposal that always returns the same jumps, shifted onto the interval.
struct FixedProposal {
  std::vector<std::pair<double, double>> offsets_z;  // (fraction of interval, z)
  template <class Rng>
  JumpSequence operator()(const Interval& iv, Rng&) const {
    JumpSequence s{iv, {}};
    for (auto [f, z] : offsets_z) s.records.push_back({iv.start + f * iv.length(), z, std::nullopt});
    return s;
  }
};

// Picks one of two jump sequences with equal probability.
struct TwoPointProposal {
  FixedProposal a, b;
  template <class Rng>
  JumpSequence operator()(const Interval& iv, Rng& rng) const {
    return rng.uniform() < 0.5 ? a(iv, rng) : b(iv, rng);
  }
};

}  // namespace

TEST(KalmanPredict, KnownStateNoJumps) {
  const auto ssm = LinearSSM::langevin(-0.5, 0.1, gh_default());
  GaussianState prior{Vector::Ones(2), Matrix::Zero(2, 2), 1.0};
  const auto p = kalman_predict(prior, ssm, JumpSequence{Interval{1, 3}, {}}, 1, 3);
  EXPECT_LT((p.mu - langevin_expm(-0.5, 2.0) * prior.mu).norm(), 1e-15);
  EXPECT_EQ(p.C.norm(), 0.0);
  EXPECT_EQ(p.time, 3.0);
  EXPECT_THROW(kalman_predict(prior, ssm, JumpSequence{Interval{1, 3}, {}}, 0.5, 3), std::invalid_argument);
}

TEST(KalmanPredict, ContinuousAsStepVanishes) {
  const auto ssm = LinearSSM::langevin(-0.5, 0.1, gh_default());
  std::mt19937_64 gen(1);
  const auto prior = random_state(gen, 0.0);
  double prev = std::numeric_limits<double>::infinity();
  for (double dt : {1e-1, 1e-3, 1e-5, 1e-7}) {
    const auto p = kalman_predict(prior, ssm, JumpSequence{Interval{0, dt}, {}}, 0, dt);
    const double d = (p.mu - prior.mu).norm() + (p.C - prior.C).norm();
    EXPECT_LT(d, prev);
    prev = d;
  }
  EXPECT_LT(prev, 1e-5);
}

TEST(KalmanPredict, CovarianceDominatesJumpCovariance) {
  const auto gh = gh_default(0.3);
  const auto ssm = LinearSSM::langevin(-0.5, 0.1, gh);
  std::mt19937_64 gen(2);
  for (int i = 0; i < 100; ++i) {
    RandomStream r(2, static_cast<std::uint64_t>(i));
    const auto prior = random_state(gen, 0.0);
    const auto seq = sample_gig(gh.gig, std::nullopt, Interval{0, 1.5}, TruncationBudget{200}, r);
    const auto p = kalman_predict(prior, ssm, seq, 0, 1.5);
    EXPECT_GE(min_eig(p.C - cond_moments(ssm, seq, 0, 1.5).S), -1e-10);
  }
}

TEST(KalmanCorrect, UninformativeObservation) {
  const auto ssm = LinearSSM::langevin(-0.5, 1e12, gh_default());
  std::mt19937_64 gen(3);
  const auto pred = random_state(gen, 1.0);
  const auto c = kalman_correct(pred, ssm, 5.0);
  EXPECT_LT((c.state.mu - pred.mu).norm(), 1e-20);
  EXPECT_LT((c.state.C - pred.C).norm(), 1e-20);
}

TEST(KalmanCorrect, ExactObservationLimit) {
  const auto ssm = LinearSSM::langevin(-0.5, 1e-8, gh_default());
  GaussianState pred{Vector::Zero(2), Matrix::Identity(2, 2) * 4.0, 1.0};
  const auto c = kalman_correct(pred, ssm, 2.5);
  EXPECT_NEAR(c.state.mu[0], 2.5, 1e-12);
  EXPECT_NEAR(c.state.mu[1], 0.0, 1e-12);
  EXPECT_NEAR(c.log_lik, -0.5 * (std::log(2 * std::numbers::pi * (4.0 + 1e-16)) + 2.5 * 2.5 / 4.0), 1e-12);
}

TEST(KalmanCorrect, LikelihoodProductEqualsJointGaussian) {
  // Five steps with fixed jumps: the product of one-step predictive densities
  // must equal the joint density of the stacked observations.
  const auto gh = gh_default(0.4);
  const auto ssm = LinearSSM::langevin(-0.7, 0.3, gh);
  const std::vector<double> t{0.0, 0.6, 1.1, 2.5, 2.9, 4.0};
  const std::vector<double> y{0.3, -0.2, 1.4, 0.9, -0.5};
  std::vector<JumpSequence> seqs;
  for (int k = 0; k < 5; ++k) {
    RandomStream r(4, static_cast<std::uint64_t>(k));
    seqs.push_back(sample_gig(gh.gig, std::nullopt, Interval{t[k], t[k + 1]}, TruncationBudget{100}, r));
  }
  GaussianState st{Vector::Zero(2), Matrix::Identity(2, 2) * 2.0, 0.0};
  const GaussianState init = st;
  double total = 0.0;
  for (int k = 0; k < 5; ++k) {
    const auto c = kalman_correct(kalman_predict(st, ssm, seqs[k], t[k], t[k + 1]), ssm, y[k]);
    total += c.log_lik;
    st = c.state;
  }

  // Brute force: state means/covariances without conditioning, then the full
  // observation covariance.
  std::vector<Matrix> F(5), P(5);
  std::vector<Vector> m(5);
  Vector mean = init.mu;
  Matrix cov = init.C;
  for (int k = 0; k < 5; ++k) {
    const auto mom = cond_moments(ssm, seqs[k], t[k], t[k + 1]);
    F[k] = ssm.transition(t[k + 1] - t[k]);
    mean = F[k] * mean + mom.m;
    cov = F[k] * cov * F[k].transpose() + mom.S;
    m[k] = mean;
    P[k] = cov;
  }
  const Matrix H = ssm.H();
  Vector ymean(5);
  Matrix ycov(5, 5);
  for (int k = 0; k < 5; ++k) {
    ymean[k] = (H * m[k])(0, 0);
    for (int l = k; l < 5; ++l) {
      Matrix phi = Matrix::Identity(2, 2);
      for (int j = k + 1; j <= l; ++j) phi = F[j] * phi;
      ycov(k, l) = ycov(l, k) = (H * phi * P[k] * H.transpose())(0, 0);
    }
    ycov(k, k) += ssm.sigma_eps() * ssm.sigma_eps();
  }
  Vector yv(5);
  for (int k = 0; k < 5; ++k) yv[k] = y[k];
  const Eigen::LLT<Matrix> llt(ycov);
  const Vector r = llt.matrixL().solve(yv - ymean);
  const double logdet = 2.0 * llt.matrixL().toDenseMatrix().diagonal().array().log().sum();
  const double joint = -0.5 * (5 * std::log(2 * std::numbers::pi) + logdet + r.squaredNorm());
  EXPECT_LT(std::fabs(std::expm1(total - joint)), 1e-8);
}

TEST(KalmanCorrect, CovarianceContractsOverLongRun) {
  const auto gh = gh_default();
  const auto ssm = LinearSSM::langevin(-0.5, 0.1, gh);
  RandomStream r(5);
  GaussianState st = default_initial_state(ssm);
  for (int k = 1; k <= 200; ++k) {
    const double t = 0.5 * k;
    const auto seq = sample_gig(gh.gig, std::nullopt, Interval{st.time, t}, TruncationBudget{200}, r);
    const auto pred = kalman_predict(st, ssm, seq, st.time, t);
    const auto c = kalman_correct(pred, ssm, r.normal());
    ASSERT_GE(min_eig(pred.C - c.state.C), -1e-10) << k;
    ASSERT_GE(min_eig(c.state.C), -1e-10) << k;
    st = c.state;
  }
}

TEST(MhAccept, DecisionRule) {
  for (double u : {1e-12, 0.3, 0.999999}) {
    EXPECT_TRUE(mh_accept(-3.0, -3.0, u));
    EXPECT_TRUE(mh_accept(-3.0, -1.0, u));
    EXPECT_FALSE(mh_accept(-3.0, -1e308, u));
    EXPECT_FALSE(mh_accept(-3.0, -std::numeric_limits<double>::infinity(), u));
    EXPECT_FALSE(mh_accept(-3.0, std::numeric_limits<double>::quiet_NaN(), u));
    EXPECT_TRUE(mh_accept(-std::numeric_limits<double>::infinity(), -1e300, u));
  }
  EXPECT_TRUE(mh_accept(0.0, std::log(0.5), 0.49));
  EXPECT_FALSE(mh_accept(0.0, std::log(0.5), 0.51));
}

TEST(MhStep, EqualLikelihoodAlwaysAccepts) {
  const auto ssm = LinearSSM::langevin(-0.5, 0.1, gh_default());
  const FixedProposal prop{{{0.5, 0.3}}};
  const GaussianState prior = default_initial_state(ssm);
  RandomStream r(6);
  auto cur = detail::propose(prior, ssm, 1.0, 0.4, prop, r);
  for (int i = 0; i < 1000; ++i) {
    auto res = mh_step(prior, ssm, 1.0, 0.4, cur, prop, r);
    ASSERT_TRUE(res.accepted);
    cur = res.state;
  }
}

TEST(MhStep, FlatLikelihoodAcceptsAlmostAll) {
  const auto gh = gh_default();
  const auto ssm = LinearSSM::langevin(-0.5, 1e6, gh);
  const GigPriorProposal prop{gh.gig, std::nullopt, TruncationBudget{200}};
  const GaussianState prior = default_initial_state(ssm);
  RandomStream r(7);
  auto cur = detail::propose(prior, ssm, 1.0, 0.4, prop, r);
  int acc = 0;
  for (int i = 0; i < 1000; ++i) {
    auto res = mh_step(prior, ssm, 1.0, 0.4, cur, prop, r);
    acc += res.accepted;
    cur = std::move(res.state);
  }
  EXPECT_GE(acc / 1000.0, 0.99);
}

TEST(MhStep, TwoPointChainTargetsPosterior) {
  const auto ssm = LinearSSM::langevin(-0.5, 0.5, gh_default());
  const TwoPointProposal prop{FixedProposal{{{0.5, 0.2}}}, FixedProposal{{{0.5, 3.0}}}};
  GaussianState prior{Vector::Zero(2), Matrix::Identity(2, 2) * 0.1, 0.0};
  const double t = 1.0, y = 1.0;
  RandomStream r(8);
  const auto la = detail::propose(prior, ssm, t, y, prop.a, r).log_lik;
  const auto lb = detail::propose(prior, ssm, t, y, prop.b, r).log_lik;
  const double post_a = 1.0 / (1.0 + std::exp(lb - la));
  ASSERT_GT(post_a, 0.1);
  ASSERT_LT(post_a, 0.9);
  auto cur = detail::propose(prior, ssm, t, y, prop, r);
  int in_a = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    cur = mh_step(prior, ssm, t, y, cur, prop, r).state;
    in_a += cur.jumps.records.front().z == 0.2;
  }
  EXPECT_NEAR(static_cast<double>(in_a) / n, post_a, 0.01);
}

TEST(Collapse, IdenticalEntries) {
  std::mt19937_64 gen(9);
  const auto g = random_state(gen, 2.0);
  const auto c = collapse({g, g, g});
  EXPECT_LT((c.mu - g.mu).norm(), 1e-15);
  EXPECT_LT((c.C - g.C).norm(), 1e-15);
  EXPECT_EQ(c.time, 2.0);
  EXPECT_THROW(collapse({}), std::invalid_argument);
}

TEST(Collapse, TwoPointSpread) {
  Vector a(2);
  a << 0.3, -1.2;
  const Matrix C = Matrix::Identity(2, 2) * 0.7;
  const auto c = collapse({{a, C, 0.0}, {-a, C, 0.0}});
  EXPECT_LT(c.mu.norm(), 1e-15);
  EXPECT_LT((c.C - (C + a * a.transpose())).norm(), 1e-15);
}

TEST(Collapse, MatchesMixtureSampleMoments) {
  std::mt19937_64 gen(10);
  std::vector<GaussianState> chain;
  for (int i = 0; i < 5; ++i) chain.push_back(random_state(gen, 0.0));
  const auto c = collapse(chain);
  std::vector<Matrix> roots;
  for (const auto& g : chain) roots.push_back(Eigen::LLT<Matrix>(g.C).matrixL());
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> pick(0, 4);
  Vector s = Vector::Zero(2);
  Matrix s2 = Matrix::Zero(2, 2);
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const int k = pick(gen);
    Vector z(2);
    z << nd(gen), nd(gen);
    const Vector x = chain[k].mu + roots[k] * z;
    s += x;
    s2 += x * x.transpose();
  }
  const Vector mean = s / n;
  const Matrix cov = s2 / n - mean * mean.transpose();
  EXPECT_LT((mean - c.mu).norm() / std::max(c.mu.norm(), std::sqrt(c.C.trace())), 0.01);
  EXPECT_LT((cov - c.C).norm() / c.C.norm(), 0.01);
}

TEST(FilterStep, SingleIterationIsOneKalmanPass) {
  const auto gh = gh_default();
  const auto ssm = LinearSSM::langevin(-0.5, 0.1, gh);
  FilterConfig cfg;
  cfg.n_iter = 1;
  cfg.budget = TruncationBudget{300};
  const GigPriorProposal prop{gh.gig, std::nullopt, cfg.budget};
  const auto prior = default_initial_state(ssm);
  RandomStream r1(11), r2(11);
  const auto res = filter_step(prior, ssm, 0.7, 0.5, cfg, prop, r1);
  const auto seq = prop(Interval{0, 0.5}, r2);
  const auto c = kalman_correct(kalman_predict(prior, ssm, seq, 0, 0.5), ssm, 0.7);
  EXPECT_EQ(res.collapsed.mu, c.state.mu);
  EXPECT_EQ(res.collapsed.C, c.state.C);
  EXPECT_EQ(res.log_marginal, c.log_lik);
  EXPECT_EQ(res.acceptance_rate, 1.0);
}

TEST(FilterStep, DeterministicGivenSeedAndStoresJumps) {
  const auto gh = gh_default();
  const auto ssm = LinearSSM::langevin(-0.5, 0.1, gh);
  FilterConfig cfg;
  cfg.n_iter = 20;
  cfg.burn_in = 5;
  cfg.store_jumps = true;
  cfg.budget = TruncationBudget{200};
  const GigPriorProposal prop{gh.gig, std::nullopt, cfg.budget};
  RandomStream a(12), b(12);
  const auto x = filter_step(default_initial_state(ssm), ssm, 0.2, 1.0, cfg, prop, a);
  const auto y = filter_step(default_initial_state(ssm), ssm, 0.2, 1.0, cfg, prop, b);
  EXPECT_EQ(x.collapsed.mu, y.collapsed.mu);
  EXPECT_EQ(x.collapsed.C, y.collapsed.C);
  EXPECT_EQ(x.log_marginal, y.log_marginal);
  ASSERT_TRUE(x.chain_jumps.has_value());
  EXPECT_EQ(x.chain_jumps->size(), 15u);
  EXPECT_GE(x.acceptance_rate, 0.0);
  EXPECT_LE(x.acceptance_rate, 1.0);
}

TEST(FilterStep, ConstantJumpsReduceToClassicalKalman) {
  // Every proposal has the same jumps, so S is fixed and the filter must
  // reproduce a textbook Kalman filter with process noise S.
  const auto gh = gh_default();
  const auto ssm = LinearSSM::langevin(-0.5, 0.2, gh);
  const FixedProposal prop{{{0.25, 0.5}, {0.5, 0.5}, {0.75, 0.5}}};
  FilterConfig cfg;
  cfg.n_iter = 30;
  std::vector<Observation> obs;
  RandomStream r(13);
  for (int k = 1; k <= 40; ++k) obs.push_back({0.5 * k, r.normal()});
  const auto res = run_filter(ssm, obs, cfg, prop);

  const Matrix F = langevin_expm(-0.5, 0.5);
  const auto Q = cond_moments(ssm, prop(Interval{0, 0.5}, r), 0, 0.5).S;
  Vector mu = Vector::Zero(2);
  Matrix P = 100.0 * Matrix::Identity(2, 2);
  const double R = 0.04;
  for (std::size_t k = 0; k < obs.size(); ++k) {
    mu = F * mu;
    P = F * P * F.transpose() + Q;
    const double s = P(0, 0) + R;
    const Vector K = P.col(0) / s;
    mu += K * (obs[k].value - mu[0]);
    P -= K * K.transpose() * s;
    EXPECT_LT((res[k].collapsed.mu - mu).norm(), 1e-8) << k;
    EXPECT_EQ(res[k].acceptance_rate, 1.0);
  }
}

TEST(RunFilter, EdgeCases) {
  const auto gh = gh_default();
  const auto ssm = LinearSSM::langevin(-0.5, 0.1, gh);
  FilterConfig cfg;
  cfg.n_iter = 5;
  cfg.budget = TruncationBudget{100};
  cfg.seed = 21;
  EXPECT_TRUE(run_filter(ssm, {}, cfg).empty());

  const auto one = run_filter(ssm, {{0.8, 0.1}}, cfg);
  ASSERT_EQ(one.size(), 1u);
  RandomStream r(21, 0);
  const auto direct = filter_step(default_initial_state(ssm), ssm, 0.1, 0.8, cfg,
                                  GigPriorProposal{gh.gig, std::nullopt, cfg.budget}, r);
  EXPECT_EQ(one[0].collapsed.mu, direct.collapsed.mu);
  EXPECT_EQ(one[0].log_marginal, direct.log_marginal);

  EXPECT_THROW(run_filter(ssm, {{1.0, 0.0}, {0.5, 0.0}}, cfg), std::invalid_argument);
  EXPECT_THROW(run_filter(ssm, {{1.0, 0.0}, {1.0, 0.0}}, cfg), std::invalid_argument);

  // Observation at the initial time: correction only.
  const auto at0 = run_filter(ssm, {{0.0, 0.3}, {0.5, 0.2}}, cfg);
  const auto c = kalman_correct(default_initial_state(ssm), ssm, 0.3);
  EXPECT_EQ(at0[0].collapsed.mu, c.state.mu);
  EXPECT_EQ(at0[0].log_marginal, c.log_lik);

  FilterConfig bad = cfg;
  bad.burn_in = 5;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
  bad = cfg;
  bad.n_iter = 0;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(RunFilter, LogMarginalIncrementsShrinkWithChainLength) {
  const auto gh = GHParams{GIGParams(-0.8, 1, 0.01)};
  const auto ssm = LinearSSM::langevin(-0.5, 0.1, gh);
  RandomStream sim(14);
  std::vector<double> times;
  for (int k = 1; k <= 20; ++k) times.push_back(0.5 * k);
  const auto path = simulate_path(ssm, Vector::Zero(2), times, TruncationBudget{200}, std::nullopt, sim);
  std::vector<Observation> obs;
  for (std::size_t k = 0; k < times.size(); ++k) obs.push_back({times[k], path.observations[k]});

  const std::vector<int> iters{10, 50, 200};
  std::vector<double> avg(iters.size(), 0.0);
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
    for (std::size_t i = 0; i < iters.size(); ++i) {
      FilterConfig cfg;
      cfg.n_iter = iters[i];
      cfg.seed = seed;
      cfg.budget = TruncationBudget{200};
      double total = 0.0;
      for (const auto& r : run_filter(ssm, obs, cfg)) total += r.log_marginal;
      avg[i] += total / 5.0;
    }
  EXPECT_LT(std::fabs(avg[2] - avg[1]), std::fabs(avg[1] - avg[0]));
}
