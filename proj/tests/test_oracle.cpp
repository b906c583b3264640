#include <gtest/gtest.h>

#include <cmath>

#include "cascades/error.hpp"
#include "cascades/oracle.hpp"

using namespace cascades;

namespace {
const UrnParams kTwoOne = validate_params(2.0, 1.0);
}

TEST(Oracle, ZeroScheduleRational) {
  const ExactErrorSeries s = enumerate_oracle_exact(kTwoOne, zero_schedule(), 5);
  EXPECT_EQ(s.at(1).error, mpq_class(1, 3));
  EXPECT_EQ(s.at(2).error, mpq_class(1, 3));
  EXPECT_EQ(s.at(3).error, mpq_class(7, 27));
  EXPECT_EQ(s.at(5).error, mpq_class(55, 243));
}

TEST(Oracle, AllRevealers) {
  const ErrorSeries s = enumerate_oracle(kTwoOne, constant_schedule(1.0), 5);
  for (const auto& r : s.rows) EXPECT_NEAR(r.error, 1.0 / 3.0, 1e-15);
}

TEST(Oracle, HorizonCap) {
  EXPECT_THROW(enumerate_oracle(kTwoOne, zero_schedule(), 25), Error);
  EXPECT_THROW(enumerate_oracle(kTwoOne, zero_schedule(), 0), Error);
}

TEST(Oracle, MatchesDynamicProgram) {
  for (auto [a, b] : {std::pair{2.0, 1.0}, std::pair{3.0, 2.0}}) {
    const UrnParams params = validate_params(a, b);
    for (const Schedule& s : {optimal_schedule(params), zero_schedule(), constant_schedule(0.3)}) {
      const ErrorSeries dp = error_series(params, s, 14);
      const ErrorSeries brute = enumerate_oracle(params, s, 14);
      for (std::int64_t t = 1; t <= 14; ++t) {
        EXPECT_NEAR(dp.at(t).error, brute.at(t).error, 1e-12) << a << "/" << b << " t=" << t;
        EXPECT_NEAR(dp.at(t).map_error, brute.at(t).map_error, 1e-12);
        EXPECT_NEAR(dp.at(t).prob_cascade_down, brute.at(t).prob_cascade_down, 1e-12);
        EXPECT_NEAR(dp.at(t).prob_social_or_down, brute.at(t).prob_social_or_down, 1e-12);
      }
    }
  }
}

TEST(Oracle, RationalMatchesDynamicProgramExactly) {
  const Schedule s = constant_schedule(0.5);
  const ExactErrorSeries dp = error_series_exact(kTwoOne, s, 10);
  const ExactErrorSeries brute = enumerate_oracle_exact(kTwoOne, s, 10);
  for (std::int64_t t = 1; t <= 10; ++t) EXPECT_EQ(dp.at(t).error, brute.at(t).error) << t;
}
