#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "oracles.hpp"
#include "pairpref/errors.hpp"
#include "pairpref/model.hpp"
#include "pairpref/normal.hpp"

namespace pairpref {
namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Index>(v.size()));
  Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

TransformedParams phi_of(Vector alpha, Vector gamma) {
  return TransformedParams{std::move(alpha), std::move(gamma)};
}

TEST(ToTransformed, CenterMapsToOrigin) {
  const auto phi = to_transformed(UserParams{vec({0.5, 0.5}), vec({1.0, 1.0})});
  EXPECT_EQ(phi.alpha, Vector::Zero(2));
  EXPECT_EQ(phi.gamma, Vector::Zero(2));
}

TEST(ToTransformed, OneSigmaPoint) {
  const auto phi = to_transformed(UserParams{vec({0.8413}), vec({1.0})});
  EXPECT_NEAR(phi.alpha[0], oracle::phi_inv(0.8413), 1e-9);
  EXPECT_NEAR(phi.alpha[0], 1.0, 1e-3);
  EXPECT_EQ(phi.gamma[0], 0.0);
}

TEST(ToTransformed, RejectsBoundaryAndNonPositiveLambda) {
  EXPECT_THROW(to_transformed(UserParams{vec({1.0}), vec({1.0})}), DomainError);
  EXPECT_THROW(to_transformed(UserParams{vec({0.0}), vec({1.0})}), DomainError);
  EXPECT_THROW(to_transformed(UserParams{vec({0.3}), vec({0.0})}), DomainError);
  EXPECT_THROW(to_transformed(UserParams{vec({0.3}), vec({-1.0})}), DomainError);
  EXPECT_THROW(to_transformed(UserParams{vec({0.3, 0.4}), vec({1.0})}), DimensionMismatch);
  EXPECT_THROW(to_transformed(UserParams{Vector(), Vector()}), DomainError);
}

TEST(FromTransformed, OriginAndOneSigma) {
  const auto u = from_transformed(phi_of(Vector::Zero(2), Vector::Zero(2)));
  EXPECT_EQ(u.theta, vec({0.5, 0.5}));
  EXPECT_EQ(u.lambda, vec({1.0, 1.0}));
  EXPECT_NEAR(from_transformed(phi_of(vec({1.0}), vec({0.0}))).theta[0], oracle::phi(1.0),
              1e-12);
}

TEST(Transform, RoundTripOnBox) {
  Rng rng(11);
  std::uniform_real_distribution<double> th(0.01, 0.99);
  std::uniform_real_distribution<double> lg(-5.0, 5.0);
  for (int k = 0; k < 500; ++k) {
    UserParams u{Vector(3), Vector(3)};
    for (Index d = 0; d < 3; ++d) {
      u.theta[d] = th(rng);
      u.lambda[d] = std::exp(lg(rng));
    }
    const auto back = from_transformed(to_transformed(u));
    EXPECT_LT((back.theta - u.theta).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LT(((back.lambda - u.lambda).array() / u.lambda.array()).abs().maxCoeff(), 1e-9);
  }
}

TEST(Packing, LayoutIsAlphaThenGamma) {
  const auto phi = phi_of(vec({1, 2}), vec({3, 4}));
  EXPECT_EQ(phi.packed(), vec({1, 2, 3, 4}));
  const auto back = TransformedParams::unpack(vec({1, 2, 3, 4}));
  EXPECT_EQ(back.alpha, phi.alpha);
  EXPECT_EQ(back.gamma, phi.gamma);
  EXPECT_THROW(TransformedParams::unpack(vec({1, 2, 3})), DimensionMismatch);
}

TEST(PreferenceValue, ZeroAtOptimum) {
  const auto phi = phi_of(vec({0.3, -1.2}), vec({0.5, -0.4}));
  EXPECT_EQ(preference_value(phi.alpha, phi), 0.0);
  for (Index d = 0; d < 2; ++d) {
    Vector x = phi.alpha;
    x[d] += 1e-3;
    EXPECT_LT(preference_value(x, phi), 0.0);
  }
}

TEST(PreferenceValue, ThreeFourFive) {
  // Choose x so that Phi(x) - Phi(alpha) = (0.3, 0.4) with alpha = 0.
  const Vector x = vec({normal_quantile(0.8), normal_quantile(0.9)});
  const auto phi = phi_of(Vector::Zero(2), Vector::Zero(2));
  EXPECT_NEAR(preference_value(x, phi), -0.5, 1e-12);
}

TEST(PreferenceValue, SensitivityWeighting) {
  const Vector x = vec({normal_quantile(0.75), normal_quantile(0.25)});
  const auto phi = phi_of(vec({normal_quantile(0.25), normal_quantile(0.25)}),
                          vec({std::log(4.0), 0.0}));
  EXPECT_NEAR(preference_value(x, phi), -1.0, 1e-12);
}

TEST(PreferenceValue, NonPositiveEverywhere) {
  Rng rng(3);
  std::normal_distribution<double> n(0.0, 2.0);
  for (int k = 0; k < 1000; ++k) {
    const auto phi = phi_of(vec({n(rng), n(rng)}), vec({n(rng), n(rng)}));
    EXPECT_LE(preference_value(vec({n(rng), n(rng)}), phi), 0.0);
  }
  EXPECT_THROW(preference_value(vec({0.0}), phi_of(Vector::Zero(2), Vector::Zero(2))),
               DimensionMismatch);
}

TEST(ResponseProbability, EqualProposalsGiveHalf) {
  const auto phi = phi_of(vec({0.4}), vec({1.0}));
  EXPECT_EQ(response_probability(Trial{vec({0.7}), vec({0.7})}, phi), 0.5);
}

TEST(ResponseProbability, UnitDifference) {
  // alpha at x_alt and Phi(x_ref) == 0, so with lambda = 4:
  // f(ref) = -2 * |0 - 0.5| = -1.
  const auto phi = phi_of(vec({0.0}), vec({std::log(4.0)}));
  const Trial t{vec({-40.0}), vec({0.0})};
  EXPECT_NEAR(preference_value(t.x_ref, phi), -1.0, 1e-15);
  EXPECT_NEAR(response_probability(t, phi), oracle::phi(1.0), 1e-12);
  EXPECT_NEAR(response_probability(t, phi), 0.8413, 1e-4);
}

TEST(ResponseProbability, SwapSymmetryRandomized) {
  Rng rng(5);
  std::normal_distribution<double> n(0.0, 1.5);
  for (int k = 0; k < 2000; ++k) {
    const auto phi = phi_of(vec({n(rng), n(rng), n(rng)}), vec({n(rng), n(rng), n(rng)}));
    const Trial t{vec({n(rng), n(rng), n(rng)}), vec({n(rng), n(rng), n(rng)})};
    EXPECT_NEAR(response_probability(t, phi) + response_probability(t.swapped(), phi), 1.0,
                1e-12);
  }
}

TEST(ResponseProbability, MonotoneInValueDifference) {
  // Fix the reference and sweep the alternative towards the optimum.
  const auto phi = phi_of(vec({0.5}), vec({0.7}));
  const Vector x_ref = vec({-2.0});
  std::vector<std::pair<double, double>> pts;
  for (double x = -3.0; x <= 0.5; x += 0.05) {
    const Trial t{x_ref, vec({x})};
    pts.emplace_back(preference_value(t.x_alt, phi) - preference_value(t.x_ref, phi),
                     response_probability(t, phi));
  }
  std::sort(pts.begin(), pts.end());
  for (std::size_t i = 1; i < pts.size(); ++i) {
    if (pts[i].first > pts[i - 1].first) EXPECT_GT(pts[i].second, pts[i - 1].second);
  }
}

TEST(SampleResponse, FairCoinForEqualProposals) {
  const auto phi = phi_of(vec({0.2}), vec({0.0}));
  const Trial t{vec({1.0}), vec({1.0})};
  Rng rng(17);
  int ones = 0;
  for (int k = 0; k < 10000; ++k) ones += to_int(sample_response(t, phi, rng));
  EXPECT_NEAR(ones / 10000.0, 0.5, 0.02);
}

TEST(SampleResponse, NearCertainForLargeDifference) {
  // exp(gamma/2) = 12 and |Phi(ref) - Phi(alpha)| = 0.5 give f(ref) = -6.
  const auto phi = phi_of(vec({0.0}), vec({2.0 * std::log(12.0)}));
  const Trial t{vec({-40.0}), vec({0.0})};
  ASSERT_NEAR(preference_value(t.x_alt, phi) - preference_value(t.x_ref, phi), 6.0, 1e-12);
  Rng rng(19);
  int ones = 0;
  for (int k = 0; k < 10000; ++k) ones += to_int(sample_response(t, phi, rng));
  EXPECT_GT(ones / 10000.0, 0.999);
}

TEST(SampleResponse, DeterministicUnderSeed) {
  const auto phi = phi_of(vec({0.3, 0.1}), vec({0.2, -0.3}));
  const Trial t{vec({0.0, 0.5}), vec({0.4, -0.2})};
  Rng a(23);
  Rng b(23);
  for (int k = 0; k < 200; ++k) EXPECT_EQ(sample_response(t, phi, a), sample_response(t, phi, b));
}

TEST(LogLikelihood, EmptyHistoryIsZero) {
  const auto phi = phi_of(vec({0.3}), vec({0.2}));
  EXPECT_EQ(log_likelihood(std::span<const Observation>{}, phi), 0.0);
}

TEST(LogLikelihood, TiedTrialIsLogHalf) {
  const auto phi = phi_of(vec({0.3}), vec({0.2}));
  const Trial t{vec({0.9}), vec({0.9})};
  EXPECT_DOUBLE_EQ(log_likelihood(Observation{t, Response::kReference}, phi), std::log(0.5));
  EXPECT_DOUBLE_EQ(log_likelihood(Observation{t, Response::kAlternative}, phi), std::log(0.5));
}

TEST(LogLikelihood, MatchesProbabilityAndIsAdditive) {
  Rng rng(29);
  std::normal_distribution<double> n(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  const auto phi = phi_of(vec({n(rng), n(rng)}), vec({n(rng), n(rng)}));
  std::vector<Observation> hist;
  for (int k = 0; k < 25; ++k) {
    hist.push_back({Trial{vec({n(rng), n(rng)}), vec({n(rng), n(rng)})},
                    coin(rng) ? Response::kAlternative : Response::kReference});
  }
  double singles = 0.0;
  for (const auto& o : hist) {
    const double p = response_probability(o.trial, phi);
    const double expect = std::log(o.response == Response::kAlternative ? p : 1.0 - p);
    EXPECT_NEAR(log_likelihood(o, phi), expect, 1e-12);
    singles += log_likelihood(o, phi);
  }
  EXPECT_NEAR(log_likelihood(hist, phi), singles, 1e-10);
  for (std::size_t split : {3u, 11u, 20u}) {
    const std::span<const Observation> all(hist);
    EXPECT_NEAR(log_likelihood(all.first(split), phi) + log_likelihood(all.subspan(split), phi),
                log_likelihood(all, phi), 1e-10);
  }
}

TEST(LogLikelihood, ClampedAtProbabilityFloor) {
  // Difference of 40 in value: Phi(-40) underflows to 0 and must be floored.
  const auto phi = phi_of(vec({0.0}), vec({2.0 * std::log(80.0)}));
  const Trial t{vec({-40.0}), vec({0.0})};
  const double ll = log_likelihood(Observation{t, Response::kReference}, phi);
  EXPECT_TRUE(std::isfinite(ll));
  EXPECT_NEAR(ll, std::log(kProbabilityFloor), 1e-9);
}

TEST(ResponseCodec, IntegersOnly) {
  EXPECT_EQ(response_from_int(0), Response::kReference);
  EXPECT_EQ(response_from_int(1), Response::kAlternative);
  EXPECT_THROW(response_from_int(2), DomainError);
  EXPECT_THROW(response_from_int(-1), DomainError);
}

TEST(DeriveSeed, DistinctStreams) {
  EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
  EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
  EXPECT_EQ(derive_seed(42, 7), derive_seed(42, 7));
}

}  // namespace
}  // namespace pairpref
