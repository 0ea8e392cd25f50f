#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "telegraph/error.hpp"
#include "telegraph/state_model.hpp"

namespace telegraph {
namespace {

double poisson_pmf(double mean, int n) {
  return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
}

TEST(HiddenState, AcceptsOnlyZeroOneTwo) {
  EXPECT_EQ(HiddenState(0).value(), 0);
  EXPECT_EQ(HiddenState(2).value(), 2);
  EXPECT_EQ(HiddenState().value(), 2);
  EXPECT_THROW(HiddenState(3), Error);
  EXPECT_THROW(HiddenState(-1), Error);
}

TEST(BeliefVector, ArgmaxPrefersLowerIndexOnTies) {
  EXPECT_EQ((BeliefVector{{0.4, 0.4, 0.2}}).argmax(), 0);
  EXPECT_EQ((BeliefVector{{0.2, 0.4, 0.4}}).argmax(), 1);
  EXPECT_EQ(BeliefVector::delta(HiddenState::two()).argmax(), 2);
}

TEST(Normalize, Examples) {
  EXPECT_EQ(normalize({2, 2, 0}), (BeliefVector{{0.5, 0.5, 0.0}}));
  EXPECT_EQ(normalize({0, 0, 5}), (BeliefVector{{0.0, 0.0, 1.0}}));
  const auto third = normalize({1, 1, 1});
  for (int a = 0; a < 3; ++a) EXPECT_DOUBLE_EQ(third[a], 1.0 / 3.0);
}

TEST(Normalize, ErrorsOnZeroAndNegative) {
  try {
    normalize({0, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AllZero);
  }
  EXPECT_THROW(normalize({1e-310, 0, 0}), Error);
  EXPECT_THROW(normalize({-1, 2, 0}), Error);
  EXPECT_THROW(normalize({NAN, 1, 0}), Error);
}

TEST(Normalize, IdempotentAndUnitSumOnRandomInputs) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 10000; ++i) {
    const double scale = std::pow(10.0, 40.0 * u(gen) - 20.0);
    const std::array<double, 3> v{scale * u(gen), scale * u(gen), scale * u(gen)};
    const auto once = normalize(v);
    EXPECT_LE(std::abs(once.sum() - 1.0), 1e-12);
    EXPECT_EQ(normalize(once.p), once);
    for (double x : once.p) EXPECT_GE(x, 0.0);
  }
}

TEST(Likelihood, PoissonValues) {
  PhotonCountModel m;
  EXPECT_NEAR(likelihood(m, 0, HiddenState::two()), std::exp(-16.0), 1e-22);
  EXPECT_GT(likelihood(m, 28, HiddenState::one()), likelihood(m, 16, HiddenState::one()));
  for (int n : {0, 5, 16, 28, 40, 70}) {
    EXPECT_NEAR(likelihood(m, n, HiddenState::zero()), poisson_pmf(40, n), 1e-15);
  }
  EXPECT_EQ(log_likelihood(m, -1, HiddenState::one()), -INFINITY);
}

TEST(Likelihood, ZeroMeanIsDegenerate) {
  PhotonCountModel m;
  m.mean_counts = {10, 5, 0};
  EXPECT_EQ(likelihood(m, 0, HiddenState::two()), 1.0);
  EXPECT_EQ(likelihood(m, 1, HiddenState::two()), 0.0);
}

TEST(Likelihood, SumsToOneOverCounts) {
  for (auto family : {CountFamily::Poisson, CountFamily::OverDispersed}) {
    PhotonCountModel m;
    m.family = family;
    m.fano = family == CountFamily::Poisson ? 1.0 : 2.5;
    for (int a = 0; a < 3; ++a) {
      double s = 0.0;
      for (int n = 0; n < 1000; ++n) s += likelihood(m, n, HiddenState(a));
      EXPECT_NEAR(s, 1.0, 1e-9);
    }
  }
}

TEST(Likelihood, OverDispersedApproachesPoisson) {
  PhotonCountModel poisson;
  PhotonCountModel nb = poisson;
  nb.family = CountFamily::OverDispersed;
  nb.fano = 1.0 + 1e-6;
  double worst = 0.0;
  for (int a = 0; a < 3; ++a) {
    for (int n = 0; n < 200; ++n) {
      worst = std::max(worst, std::abs(likelihood(nb, n, HiddenState(a)) -
                                       likelihood(poisson, n, HiddenState(a))));
    }
  }
  EXPECT_LT(worst, 1e-6);
}

TEST(Likelihood, OverDispersedHasFanoVariance) {
  PhotonCountModel m;
  m.family = CountFamily::OverDispersed;
  m.fano = 2.0;
  double mean = 0.0, second = 0.0;
  for (int n = 0; n < 2000; ++n) {
    const double p = likelihood(m, n, HiddenState::one());
    mean += n * p;
    second += double(n) * n * p;
  }
  EXPECT_NEAR(mean, 28.0, 1e-9);
  EXPECT_NEAR((second - mean * mean) / mean, 2.0, 1e-9);
}

TEST(ScaledLikelihoods, EqualMeansAreUninformative) {
  PhotonCountModel m;
  m.mean_counts = {20, 20, 20};
  for (int n : {0, 7, 20, 90}) {
    const auto l = scaled_likelihoods(m, n);
    EXPECT_EQ(l[0], 1.0);
    EXPECT_EQ(l[1], 1.0);
    EXPECT_EQ(l[2], 1.0);
  }
}

TEST(ScaledLikelihoods, SurvivesExtremeCounts) {
  PhotonCountModel m;
  double log_scale = 0.0;
  const auto l = scaled_likelihoods(m, 5000, &log_scale);
  EXPECT_EQ(l[0], 1.0);
  EXPECT_GE(l[1], 0.0);
  EXPECT_LE(l[2], l[1]);
  EXPECT_LT(log_scale, -1000.0);
  EXPECT_NEAR(log_scale, log_likelihood(m, 5000, HiddenState::zero()), 1e-9);
}

TEST(PhotonCountModel, Validation) {
  PhotonCountModel m;
  EXPECT_NO_THROW(m.validate());
  m.mean_counts = {28, 40, 16};
  EXPECT_THROW(m.validate(), Error);
  m = PhotonCountModel{};
  m.family = CountFamily::OverDispersed;
  m.fano = 1.0;
  EXPECT_THROW(m.validate(), Error);
}

TEST(PhotonCountModel, RescaleKeepsRates) {
  const auto m = PhotonCountModel::from_rates({40000, 28000, 16000}, 1e-3);
  EXPECT_NEAR(m.mean_counts[1], 28.0, 1e-12);
  const auto r = m.rescaled(0.3e-3);
  EXPECT_NEAR(r.mean_counts[0], 12.0, 1e-12);
  EXPECT_NEAR(r.mean_counts[2], 4.8, 1e-12);
  EXPECT_EQ(r.bin_time, 0.3e-3);
}

TEST(TransitionRates, Validation) {
  EXPECT_NO_THROW((TransitionRates{35, 50, 59, 0}).validate());
  EXPECT_THROW((TransitionRates{-1, 50, 59, 0}).validate(), Error);
  EXPECT_THROW((TransitionRates{INFINITY, 50, 59, 0}).validate(), Error);
  EXPECT_EQ((TransitionRates{35, 50, 59, 7}).max_rate(), 59);
}

}  // namespace
}  // namespace telegraph
