#include <gtest/gtest.h>

#include <cmath>
#include <deque>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ghssm/jumps/gig.hpp"
#include "ghssm/validation/ks.hpp"
#include "ghssm/validation/quadrature.hpp"
#include "oracles.hpp"

using namespace ghssm;
using validation::integrate;
using validation::integrate_to_infinity;

namespace {

// Replays fixed exponential draws (then a huge one to end the epoch stream);
// uniforms are fixed.
struct ScriptedSource {
  std::deque<double> exps;
  double u = 0.5;
  double uniform() { return u; }
  double normal() { return 0.0; }
  double exponential() {
    if (exps.empty()) return 1e300;
    const double e = exps.front();
    exps.pop_front();
    return e;
  }
};

struct MeanVar {
  double mean, var;
};

MeanVar mean_var(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return {m, s / static_cast<double>(v.size() - 1)};
}

// Levy density of the GIG subordinator for lambda < 0:
//   Q(x) = e^{-x gamma^2/2} / x * 2/pi^2 int_0^inf e^{-z^2 x/(2 delta^2)} / (z |H_nu(z)|^2) dz
double gig_levy_density(double x, double lambda, double delta, double gamma) {
  const double nu = std::fabs(lambda);
  auto inner = [&](double z) {
    if (!(z > 0.0)) return 0.0;
    return std::exp(-z * z * x / (2 * delta * delta)) / (z * numerics::hankel1_abs_sq(nu, z));
  };
  const double I = integrate_to_infinity(inner, 0.0, 0.0, 1e-10).value;
  return std::exp(-x * gamma * gamma / 2) / x * 2.0 / (std::numbers::pi * std::numbers::pi) * I;
}

}  // namespace

TEST(Params, Validation) {
  EXPECT_THROW(GIGParams(-0.4, 1, 1), std::domain_error);
  EXPECT_THROW(GIGParams(-1, 0, 1), std::domain_error);
  EXPECT_THROW(GIGParams(-1, 1, 0), std::domain_error);
  EXPECT_NO_THROW(GIGParams(-0.5, 1, 1));
  GHParams gh{GIGParams(-1, 1, 1)};
  gh.sigma_w = 0.0;
  EXPECT_THROW(gh.validate(), std::domain_error);
  EXPECT_THROW(TruncationBudget{0.0}.validate(), std::domain_error);
}

TEST(PoissonEpochs, CumulativeSums) {
  ScriptedSource s{{0.4, 0.7, 0.2}};
  const auto e = poisson_epochs(1.0, TruncationBudget{10.0}, s);
  ASSERT_EQ(e.size(), 3u);
  EXPECT_DOUBLE_EQ(e[0], 0.4);
  EXPECT_DOUBLE_EQ(e[1], 1.1);
  EXPECT_DOUBLE_EQ(e[2], 1.3);

  ScriptedSource s2{{0.4, 0.7, 0.2}};
  const auto h = poisson_epochs(2.0, TruncationBudget{10.0}, s2);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_DOUBLE_EQ(h[i], e[i] / 2.0);
}

TEST(PoissonEpochs, ExpectedCount) {
  const double G = 20.0;
  std::vector<double> counts;
  for (int i = 0; i < 10000; ++i) {
    RandomStream r(1, static_cast<std::uint64_t>(i));
    counts.push_back(static_cast<double>(poisson_epochs(1.0, TruncationBudget{G}, r).size()));
  }
  const auto mv = mean_var(counts);
  EXPECT_NEAR(mv.mean, G, 3.0 * std::sqrt(G / 10000.0));
  RandomStream r(0);
  EXPECT_THROW(poisson_epochs(0.0, TruncationBudget{}, r), std::domain_error);
}

TEST(TemperedStable, CandidateFormula) {
  ScriptedSource s{{1.0}};
  AcceptanceMonitor mon;
  s.u = 1e-300;
  const auto x = sample_tempered_stable(1.0, 0.5, 0.25, TruncationBudget{5.0}, s, &mon);
  ASSERT_EQ(x.size(), 1u);
  EXPECT_DOUBLE_EQ(x[0], 4.0);
  EXPECT_NEAR(mon[AcceptanceStage::TemperedStable].max, std::exp(-1.0), 1e-15);
}

TEST(TemperedStable, ZeroTemperingKeepsAll) {
  RandomStream r(4);
  ScriptedSource s{{0.3, 0.3, 0.3, 0.3}};
  s.u = 1.0 - 1e-16;
  EXPECT_EQ(sample_tempered_stable(1.0, 0.5, 0.0, TruncationBudget{10.0}, s).size(), 4u);
  EXPECT_THROW(sample_tempered_stable(1.0, 1.0, 0.0, TruncationBudget{}, r), std::domain_error);
  EXPECT_THROW(sample_tempered_stable(0.0, 0.5, 0.0, TruncationBudget{}, r), std::domain_error);
  EXPECT_THROW(sample_tempered_stable(1.0, 0.5, -1.0, TruncationBudget{}, r), std::domain_error);
}

TEST(TemperedStable, TruncatedFirstMoment) {
  const double C = 1, alpha = 0.5, beta = 1, eps = 0.01;
  const double expected =
      integrate_to_infinity([&](double x) { return C * std::pow(x, -alpha) * std::exp(-beta * x); }, eps).value;
  std::vector<double> sums;
  for (int i = 0; i < 10000; ++i) {
    RandomStream r(5, static_cast<std::uint64_t>(i));
    double s = 0.0;
    for (double x : sample_tempered_stable(C, alpha, beta, TruncationBudget{100.0}, r))
      if (x > eps) s += x;
    sums.push_back(s);
  }
  const auto mv = mean_var(sums);
  EXPECT_NEAR(mv.mean, expected, 3.0 * std::sqrt(mv.var / 10000.0));
}

TEST(GammaProcess, CandidateFormula) {
  ScriptedSource s{{std::log(2.0)}};
  s.u = 1e-300;
  AcceptanceMonitor mon;
  const auto x = sample_gamma_process(1.0, 1.0, TruncationBudget{5.0}, s, &mon);
  ASSERT_EQ(x.size(), 1u);
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(mon[AcceptanceStage::Gamma].max, 0.7357589, 1e-7);
}

TEST(GammaProcess, AcceptanceInUnitInterval) {
  AcceptanceMonitor mon;
  for (int i = 0; i < 50; ++i) {
    RandomStream r(6, static_cast<std::uint64_t>(i));
    (void)sample_gamma_process(0.7, 3.0, TruncationBudget{200.0}, r, &mon);
  }
  EXPECT_GT(mon[AcceptanceStage::Gamma].min, 0.0);
  EXPECT_LE(mon[AcceptanceStage::Gamma].max, 1.0);
}

TEST(GammaProcess, TruncatedFirstMoment) {
  const double C = 1, beta = 2, eps = 0.01;
  const double expected = C * std::exp(-beta * eps) / beta;
  std::vector<double> sums;
  for (int i = 0; i < 10000; ++i) {
    RandomStream r(7, static_cast<std::uint64_t>(i));
    double s = 0.0;
    for (double x : sample_gamma_process(C, beta, TruncationBudget{50.0}, r))
      if (x > eps) s += x;
    sums.push_back(s);
  }
  const auto mv = mean_var(sums);
  EXPECT_NEAR(mv.mean, expected, 3.0 * std::sqrt(mv.var / 10000.0));
}

TEST(Z1Bound, Values) {
  EXPECT_NEAR(z1_upper_bound(-1.0), 2.0 / std::numbers::pi, 1e-12);
  EXPECT_NEAR(z1_upper_bound(-0.8), 0.4925, 5e-4);
  for (double lam = -0.51; lam > -20.0; lam -= 0.37) EXPECT_GT(z1_upper_bound(lam), 0.0);
  EXPECT_THROW(z1_upper_bound(-0.5), std::domain_error);
}

TEST(TruncatedGamma, QuantilesInvertTheCdf) {
  for (double a : {0.5, 0.8, 1.5})
    for (double T : {1e-9, 0.01, 0.7, 5.0, 40.0})
      for (double u : {1e-9, 0.1, 0.5, 0.93, 1.0 - 1e-9}) {
        const auto lg = numerics::log_incomplete_gamma(a, T);
        const double tb = gamma_quantile_below(a, T, lg.log_p, u);
        EXPECT_GT(tb, 0.0);
        EXPECT_LE(tb, T);
        EXPECT_NEAR(numerics::log_incomplete_gamma(a, tb).log_p - lg.log_p, std::log(u), 1e-9) << a << T << u;
        const double ta = gamma_quantile_above(a, T, lg.log_q, u);
        EXPECT_GE(ta, T);
        EXPECT_NEAR(numerics::log_incomplete_gamma(a, ta).log_q - lg.log_q, std::log(u), 1e-9) << a << T << u;
      }
}

TEST(TruncatedGamma, HalfOrderFastPathAgrees) {
  for (double T : {0.0, 1e-12, 0.3, 4.0, 100.0})
    for (double u : {1e-6, 0.2, 0.5, 0.99}) {
      const double q = std::erfc(std::sqrt(T));
      const double fast = half_gamma_quantile_above(T, q, u);
      const double slow = gamma_quantile_above(0.5, T, numerics::log_incomplete_gamma(0.5, T).log_q, u);
      EXPECT_NEAR(fast, slow, 1e-10 * std::max(1.0, slow)) << T << ' ' << u;
    }
}

TEST(GigN1, AcceptanceProbabilitiesBounded) {
  const GIGParams p(-0.8, 1, 2);
  AcceptanceMonitor mon;
  std::size_t i = 0;
  while (mon[AcceptanceStage::GigN1Incomplete].count < 100000) {
    RandomStream r(8, i++);
    (void)sample_gig_n1(p, z1_upper_bound(-0.8), Interval{0, 1}, TruncationBudget{2000}, r, &mon);
  }
  for (auto st : {AcceptanceStage::GigN1Incomplete, AcceptanceStage::GigN1Hankel, AcceptanceStage::Gamma}) {
    EXPECT_GE(mon[st].min, 0.0);
    EXPECT_LE(mon[st].max, 1.0 + kAcceptanceTolerance);
  }
}

TEST(GigN1, HalfOrderRejected) {
  const GIGParams p(-0.5, 1, 2);
  RandomStream r(0);
  EXPECT_THROW(sample_gig_n1(p, 0.5, Interval{0, 1}, TruncationBudget{}, r), std::domain_error);
  EXPECT_THROW(sample_gig(p, std::nullopt, Interval{0, 1}, TruncationBudget{}, r), std::domain_error);
}

TEST(GigN1, RejectsZ1AboveBound) {
  const GIGParams p(-0.8, 1, 2);
  RandomStream r(0);
  EXPECT_THROW(sample_gig_n1(p, 1.1 * z1_upper_bound(-0.8), Interval{0, 1}, TruncationBudget{}, r), std::domain_error);
  EXPECT_THROW(sample_gig_n2(p, 0.5, Interval{1, 1}, TruncationBudget{}, r), std::invalid_argument);
}

TEST(GigN2, IncompleteGammaRatioBelowOne) {
  for (double y = 0.0; y <= 50.0; y += 0.5) {
    const double ratio = oracle::upper_incomplete_gamma(0.5, y) / (std::sqrt(std::numbers::pi) * std::exp(-y));
    EXPECT_LE(ratio, 1.0 + 1e-12) << y;
    EXPECT_NEAR(std::erfc(std::sqrt(y)) * std::exp(y), ratio, 1e-10 * ratio) << y;
  }
}

TEST(GigN2, HalfOrderHankelRatioIsOne) {
  for (double z = 1e-3; z < 1e4; z *= 1.3)
    EXPECT_NEAR(2.0 / (std::numbers::pi * z * numerics::hankel1_abs_sq(0.5, z)), 1.0, 1e-12) << z;
}

TEST(GigN2, AcceptanceProbabilitiesBounded) {
  AcceptanceMonitor mon;
  for (int i = 0; i < 50; ++i) {
    RandomStream r(9, static_cast<std::uint64_t>(i));
    (void)sample_gig_n2(GIGParams(-1.5, 2, 1), z1_upper_bound(-1.5), Interval{0, 1}, TruncationBudget{2000}, r, &mon);
  }
  EXPECT_GE(mon[AcceptanceStage::GigN2Incomplete].count, 100000u);
  for (auto st : {AcceptanceStage::GigN2Incomplete, AcceptanceStage::GigN2Hankel, AcceptanceStage::TemperedStable}) {
    EXPECT_GE(mon[st].min, 0.0);
    EXPECT_LE(mon[st].max, 1.0 + kAcceptanceTolerance);
  }
}

TEST(Gig, SequenceInvariantsAndDeterminism) {
  const GIGParams p(-0.8, 1, 2);
  RandomStream a(10), b(10);
  const auto s1 = sample_gig(p, std::nullopt, Interval{2, 3.5}, TruncationBudget{500}, a);
  const auto s2 = sample_gig(p, std::nullopt, Interval{2, 3.5}, TruncationBudget{500}, b);
  EXPECT_NO_THROW(s1.validate());
  ASSERT_EQ(s1.size(), s2.size());
  for (std::size_t i = 0; i < s1.size(); ++i) {
    EXPECT_EQ(s1.records[i].time, s2.records[i].time);
    EXPECT_EQ(s1.records[i].z, s2.records[i].z);
  }
}

TEST(Gig, TinyBudgetGivesEmptySequence) {
  RandomStream r(11);
  const auto s = sample_gig(GIGParams(-0.8, 1, 2), std::nullopt, Interval{0, 1}, TruncationBudget{1e-12}, r);
  EXPECT_TRUE(s.empty());
  EXPECT_EQ(s.total_z(), 0.0);
}

TEST(Gig, LargeJumpCountMatchesLevyMeasure) {
  const double lambda = -0.8, delta = 1, gamma = 2, eps = 0.1;
  const double expected = integrate_to_infinity(
                              [&](double x) { return x > 0 ? gig_levy_density(x, lambda, delta, gamma) : 0.0; }, eps,
                              0.0, 1e-8).value;
  std::vector<double> counts;
  const int n = 4000;
  for (int i = 0; i < n; ++i) {
    RandomStream r(12, static_cast<std::uint64_t>(i));
    const auto s = sample_gig(GIGParams(lambda, delta, gamma), std::nullopt, Interval{0, 1}, TruncationBudget{200}, r);
    double c = 0;
    for (const auto& rec : s.records) c += rec.z > eps ? 1.0 : 0.0;
    counts.push_back(c);
  }
  const auto mv = mean_var(counts);
  EXPECT_NEAR(mv.mean, expected, 3.0 * std::sqrt(mv.var / n));
  // Poisson counts: variance equals the mean.
  EXPECT_NEAR(mv.var, mv.mean, 3.0 * std::sqrt((mv.mean + 2.0 * mv.mean * mv.mean) / n));
}

TEST(Gig, MarginalLawKs) {
  const GIGParams p(-0.8, 1, 2);
  std::vector<double> totals;
  for (int i = 0; i < 2000; ++i) {
    RandomStream r(13, static_cast<std::uint64_t>(i));
    totals.push_back(sample_gig(p, std::nullopt, Interval{0, 1}, TruncationBudget{5000}, r).total_z());
  }
  EXPECT_GT(validation::ks_test_gig(totals, -0.8, 1, 2).p_value, 0.01);
}

TEST(GhJumps, DegenerateScale) {
  RandomStream r(14);
  auto s = sample_gig(GIGParams(-0.8, 1, 2), std::nullopt, Interval{0, 1}, TruncationBudget{200}, r);
  GHParams gh{GIGParams(-0.8, 1, 2), 0.7, 1e-12};
  const auto w = attach_gh_jumps(s, gh, r);
  ASSERT_EQ(w.size(), s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    EXPECT_EQ(w.records[i].z, s.records[i].z);
    EXPECT_NEAR(*w.records[i].w, 0.7 * s.records[i].z, 1e-11 * std::sqrt(s.records[i].z) * 10);
  }
}

TEST(GhJumps, StandardisedResidualsAreNormal) {
  RandomStream r(15);
  GHParams gh{GIGParams(-0.8, 1, 2)};
  std::vector<double> resid;
  while (resid.size() < 10000) {
    const auto s = attach_gh_jumps(sample_gig(gh.gig, std::nullopt, Interval{0, 1}, TruncationBudget{50}, r), gh, r);
    for (const auto& rec : s.records) resid.push_back(*rec.w / std::sqrt(rec.z));
  }
  resid.resize(10000);
  std::sort(resid.begin(), resid.end());
  std::vector<double> cdf;
  for (double x : resid) cdf.push_back(0.5 * std::erfc(-x / std::numbers::sqrt2));
  EXPECT_GT(validation::ks_from_cdf(cdf).p_value, 0.01);
}

TEST(GhJumps, MarginalLawKs) {
  for (double mu_w : {0.0, 0.5}) {
    GHParams gh{GIGParams(-0.8, 1, 2), mu_w, 1.0};
    std::vector<double> totals;
    for (int i = 0; i < 2000; ++i) {
      RandomStream r(16, static_cast<std::uint64_t>(i));
      const auto s =
          attach_gh_jumps(sample_gig(gh.gig, std::nullopt, Interval{0, 1}, TruncationBudget{5000}, r), gh, r);
      totals.push_back(shot_noise_path(s, 1.0));
    }
    EXPECT_GT(validation::ks_test_gh(totals, gh.to_distribution()).p_value, 0.01) << mu_w;
  }
}

TEST(ShotNoise, PathIsRightContinuousStepFunction) {
  JumpSequence empty{Interval{0, 1}, {}};
  EXPECT_EQ(shot_noise_path(empty, 0.7), 0.0);
  JumpSequence one{Interval{0, 1}, {{0.5, 1.0, 2.0}}};
  EXPECT_EQ(shot_noise_path(one, 0.49), 0.0);
  EXPECT_EQ(shot_noise_path(one, 0.5), 2.0);
  EXPECT_EQ(shot_noise_path(one, 3.0), 2.0);
  JumpSequence bare{Interval{0, 1}, {{0.5, 1.0, std::nullopt}}};
  EXPECT_THROW(shot_noise_path(bare, 1.0), std::logic_error);
}

TEST(JumpSequenceType, Validation) {
  JumpSequence bad_time{Interval{0, 1}, {{1.5, 1.0, std::nullopt}}};
  EXPECT_THROW(bad_time.validate(), std::invalid_argument);
  JumpSequence bad_z{Interval{0, 1}, {{0.5, 0.0, std::nullopt}}};
  EXPECT_THROW(bad_z.validate(), std::invalid_argument);
  JumpSequence unsorted{Interval{0, 1}, {{0.6, 1.0, std::nullopt}, {0.5, 1.0, std::nullopt}}};
  EXPECT_THROW(unsorted.validate(), std::invalid_argument);
  unsorted.sort_by_time();
  EXPECT_NO_THROW(unsorted.validate());
}
