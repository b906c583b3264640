#pragma once

// Brute-force reference for the exact engine: sums over every action
// sequence, with each player's Bayesian guess taken straight from the
// likelihood comparison D1 vs D2 (ties follow the signal) and both states of
// the world weighted 1/2. Shares no transition code with the DP.

#include <cstdint>

#include "cascades/exact_engine.hpp"

namespace cascades {

inline constexpr std::int64_t kMaxOracleHorizon = 24;

// Throws DomainError unless 1 <= t_max <= kMaxOracleHorizon.
ErrorSeries enumerate_oracle(const UrnParams& params, const Schedule& schedule,
                             std::int64_t t_max);
ExactErrorSeries enumerate_oracle_exact(const UrnParams& params, const Schedule& schedule,
                                        std::int64_t t_max);

}  // namespace cascades
