#include <gtest/gtest.h>

#include <cmath>

#include "cascades/error.hpp"
#include "cascades/model.hpp"

using namespace cascades;

namespace {

const UrnParams kTwoOne = validate_params(2.0, 1.0);

ErrorCode code_of(double a, double b) {
  try {
    validate_params(a, b);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for (" << a << ", " << b << ")";
  return ErrorCode::DomainError;
}

}  // namespace

TEST(Params, ValidationErrors) {
  EXPECT_NO_THROW(validate_params(2.0, 1.0));
  EXPECT_NO_THROW(validate_params(2.5, 1.0));
  EXPECT_EQ(code_of(1.0, 1.0), ErrorCode::NotMajority);
  EXPECT_EQ(code_of(1.0, 2.0), ErrorCode::NotMajority);
  EXPECT_EQ(code_of(0.0, 1.0), ErrorCode::NonPositive);
  EXPECT_EQ(code_of(2.0, -1.0), ErrorCode::NonPositive);
  EXPECT_EQ(code_of(1.0 + 1e-12, 1.0), ErrorCode::NearDegenerate);
  EXPECT_EQ(code_of(NAN, 1.0), ErrorCode::DomainError);
  EXPECT_EQ(code_of(INFINITY, 1.0), ErrorCode::DomainError);
}

TEST(Params, SignalProbabilities) {
  EXPECT_DOUBLE_EQ(signal_error_prob(kTwoOne), 1.0 / 3.0);
  EXPECT_DOUBLE_EQ(signal_error_prob(validate_params(3.0, 2.0)), 0.4);
  EXPECT_LT(signal_error_prob(validate_params(1e9, 1.0)), 1e-8);
  EXPECT_DOUBLE_EQ(signal_likelihood(kTwoOne, Label::One, Label::One), 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(signal_likelihood(kTwoOne, Label::One, Label::Two), 1.0 / 3.0);
  for (Label h : {Label::One, Label::Two}) {
    EXPECT_DOUBLE_EQ(signal_likelihood(kTwoOne, h, Label::One) + signal_likelihood(kTwoOne, h, Label::Two), 1.0);
  }
}

// Reference values from tests/oracles/derive_constants.py (50-digit mpmath).
TEST(Constants, MatchHighPrecisionReference) {
  EXPECT_NEAR(kappa_star(kTwoOne), 11.618270289463410023, 1e-12);
  EXPECT_NEAR(lambda_star(kTwoOne), 0.52876637294489761425, 1e-14);
  EXPECT_NEAR(f_lambda(kTwoOne, lambda_star(kTwoOne)), 0.028690444018644735629, 1e-15);
  EXPECT_NEAR(kappa_star(validate_params(10.0, 1.0)), 0.41329298196670841989, 1e-13);
}

TEST(Constants, ScaleInvarianceAndOrdering) {
  for (double k : {0.001, 0.5, 3.0, 1e6}) {
    const UrnParams scaled = validate_params(2.0 * k, 1.0 * k);
    EXPECT_NEAR(kappa_star(scaled), kappa_star(kTwoOne), 1e-12);
    EXPECT_NEAR(lambda_star(scaled), lambda_star(kTwoOne), 1e-15);
  }
  EXPECT_LT(kappa_star(validate_params(10.0, 1.0)), kappa_star(kTwoOne));
  for (double r : {1.0 + 1e-6, 1.01, 1.5, 2.0, 10.0, 1e4}) {
    const double lam = lambda_star(validate_params(r, 1.0));
    EXPECT_GT(lam, 0.5) << r;
    EXPECT_LT(lam, 1.0) << r;
  }
}

TEST(Constants, NearDegenerateRatioStaysFinite) {
  const UrnParams p = validate_params(1.0 + 1e-6, 1.0);
  const double k = kappa_star(p);
  EXPECT_TRUE(std::isfinite(k));
  EXPECT_GT(k, 1e10);
}

TEST(FLambda, EndpointsAndDomain) {
  EXPECT_EQ(f_lambda(kTwoOne, 0.0), 0.0);
  EXPECT_EQ(f_lambda(kTwoOne, 1.0), 0.0);
  EXPECT_THROW(f_lambda(kTwoOne, -0.1), Error);
  EXPECT_THROW(f_lambda(kTwoOne, 1.5), Error);
  for (double r : {1.1, 1.5, 2.0, 3.0, 5.0, 10.0}) {
    const UrnParams p = validate_params(r, 1.0);
    EXPECT_NEAR(f_lambda(p, lambda_star(p)), p.minority_prob() / kappa_star(p), 1e-10) << r;
  }
}

TEST(Regimes, Classification) {
  const double l = std::log(2.0);
  EXPECT_EQ(classify(0.0, kTwoOne), Regime::Social);
  EXPECT_EQ(classify(l, kTwoOne), Regime::Social);
  EXPECT_EQ(classify(-l, kTwoOne), Regime::Social);
  EXPECT_EQ(classify(2 * l, kTwoOne), Regime::CascadeUp);
  EXPECT_EQ(classify(-2 * l, kTwoOne), Regime::CascadeDown);
  // accumulated rounding on the boundary stays Social
  EXPECT_EQ(classify(l + 1e-14, kTwoOne), Regime::Social);
  EXPECT_EQ(classify(LogRatioState(3 * l), kTwoOne), Regime::CascadeUp);
  EXPECT_THROW(LogRatioState{INFINITY}, Error);
}

TEST(Regimes, Decide) {
  EXPECT_EQ(decide(Regime::CascadeUp, Label::Two, false), Label::One);
  EXPECT_EQ(decide(Regime::CascadeUp, Label::Two, true), Label::Two);
  EXPECT_EQ(decide(Regime::CascadeDown, Label::One, false), Label::Two);
  for (Label x : {Label::One, Label::Two}) {
    EXPECT_EQ(decide(Regime::Social, x, false), x);
    EXPECT_EQ(decide(Regime::Social, x, true), x);
  }
}

TEST(ActionProbs, Examples) {
  EXPECT_DOUBLE_EQ(action_probs(Regime::Social, 0.5, Label::One, kTwoOne).prob_one, 2.0 / 3.0);
  EXPECT_EQ(action_probs(Regime::CascadeUp, 0.0, Label::One, kTwoOne).prob_one, 1.0);
  EXPECT_NEAR(action_probs(Regime::CascadeDown, 0.3, Label::One, kTwoOne).prob_one, 0.2, 1e-15);
  EXPECT_THROW(action_probs(Regime::Social, 1.2, Label::One, kTwoOne), Error);
}

TEST(LogUpdate, Examples) {
  const double l = std::log(2.0);
  EXPECT_DOUBLE_EQ(log_update_factor(Regime::Social, Label::One, 0.7, kTwoOne), l);
  EXPECT_DOUBLE_EQ(log_update_factor(Regime::CascadeUp, Label::Two, 0.3, kTwoOne), -l);
  EXPECT_EQ(log_update_factor(Regime::CascadeUp, Label::One, 0.0, kTwoOne), 0.0);
  EXPECT_DOUBLE_EQ(log_update_factor(Regime::CascadeUp, Label::One, 1.0, kTwoOne), l);
  EXPECT_DOUBLE_EQ(log_update_factor(Regime::CascadeDown, Label::Two, 0.4, kTwoOne),
                   -log_update_factor(Regime::CascadeUp, Label::One, 0.4, kTwoOne));
  try {
    log_update_factor(Regime::CascadeUp, Label::Two, 0.0, kTwoOne);
    FAIL() << "expected ImpossibleOutcome";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::ImpossibleOutcome);
  }
}

TEST(ConditionalMoment, ExamplesAndDirectSum) {
  EXPECT_NEAR(conditional_moment(Regime::Social, 0.3, 0.5, kTwoOne), 0.94280904158206336587, 1e-15);
  EXPECT_NEAR(conditional_moment(Regime::CascadeUp, 0.0, 0.7, kTwoOne), 1.0, 1e-15);
  EXPECT_NEAR(conditional_moment(Regime::Social, 0.3, 0.0, kTwoOne), 1.0, 1e-15);
  for (Regime g : {Regime::CascadeDown, Regime::Social, Regime::CascadeUp}) {
    for (double p : {0.0, 0.01, 0.5, 1.0}) {
      for (double lam : {0.0, 0.3, 0.5287, 1.0}) {
        EXPECT_NEAR(conditional_moment(g, p, lam, kTwoOne),
                    conditional_moment_direct(g, p, lam, kTwoOne), 1e-12)
            << g << " p=" << p << " lam=" << lam;
      }
    }
  }
  // lambda = 1 is the 1/R martingale: the moment is exactly one.
  for (Regime g : {Regime::CascadeDown, Regime::Social, Regime::CascadeUp}) {
    EXPECT_NEAR(conditional_moment_direct(g, 0.37, 1.0, kTwoOne), 1.0, 1e-14);
  }
}
