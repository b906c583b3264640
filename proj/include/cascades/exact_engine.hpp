#pragma once

// Exact error series by dynamic programming over the law of the public
// log-likelihood ratio under theta = 1. The theta = 2 law is never propagated:
// a prefix with ratio R has P2 = P1 / R, and E_t is symmetric in theta.

#include <gmpxx.h>

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cascades/model.hpp"
#include "cascades/schedule.hpp"

namespace cascades {

enum class Arithmetic : std::uint8_t { Float, Rational };

struct EngineOptions {
  // Children closer than this in log-ratio (and in the same regime) are merged.
  double merge_tol = 1e-9;
  // Children with less P1 mass are dropped into pruned_mass.
  double prune_floor = 1e-15;
  std::size_t max_states = 5'000'000;
};

struct RatioState {
  double log_ratio;
  double p1_mass;
};

// Float-mode distribution. States are sorted by strictly increasing
// log_ratio.
struct RatioDistribution {
  std::int64_t t = 0;
  std::vector<RatioState> states;
  double pruned_mass = 0.0;
  // theta = 2 mass of the pruned states; keeps the 1/R martingale auditable.
  double pruned_p2_mass = 0.0;

  // P1 mass of the retained states; add pruned_mass for the conserved total.
  double total_mass() const;
  // sum of p1_mass * exp(-log_ratio): the retained theta = 2 mass.
  double p2_mass() const;
};

struct ExactRatioState {
  mpq_class ratio;
  mpq_class p1_mass;
};

// Rational-mode distribution: exact R and masses, sorted by increasing ratio,
// never pruned.
struct ExactRatioDistribution {
  std::int64_t t = 0;
  std::vector<ExactRatioState> states;

  mpq_class total_mass() const;
  mpq_class p2_mass() const;
};

RatioDistribution init_distribution();
ExactRatioDistribution init_exact_distribution();

// Advances dist from time t-1 to t using p_t = schedule(t).
RatioDistribution step(const RatioDistribution& dist, const Schedule& schedule,
                       const UrnParams& params, const EngineOptions& opts = {});
ExactRatioDistribution step(const ExactRatioDistribution& dist, const Schedule& schedule,
                            const UrnParams& params,
                            std::size_t max_states = EngineOptions{}.max_states);

// P1(MAP(Z_1..Z_{t-1}, X_t) = 2) from the time-(t-1) distribution. The true
// value lies within +-dist.pruned_mass of the result.
double map_error(const RatioDistribution& dist, const UrnParams& params);
mpq_class map_error(const ExactRatioDistribution& dist, const UrnParams& params);

// P1(R < b/a) and P1(R <= a/b).
double prob_cascade_down(const RatioDistribution& dist, const UrnParams& params);
double prob_social_or_down(const RatioDistribution& dist, const UrnParams& params);
mpq_class prob_cascade_down(const ExactRatioDistribution& dist, const UrnParams& params);
mpq_class prob_social_or_down(const ExactRatioDistribution& dist, const UrnParams& params);

template <class Num>
struct BasicErrorRow {
  std::int64_t t = 0;
  Num p_t{};
  Num map_error{};            // from the time-(t-1) distribution
  Num error{};                // E_t
  Num t_error{};              // t * E_t
  Num cumulative_errors{};    // NE_t
  Num prob_cascade_down{};    // P1(R_t < b/a)
  Num prob_social_or_down{};  // P1(R_t <= a/b)
  Num martingale_residual{};
  Num pruned_mass{};
};

template <class Num>
struct BasicErrorSeries {
  Arithmetic mode = Arithmetic::Float;
  std::vector<BasicErrorRow<Num>> rows;  // rows[i].t == i + 1
  std::size_t peak_states = 0;
  std::size_t final_states = 0;

  const BasicErrorRow<Num>& at(std::int64_t t) const { return rows.at(static_cast<std::size_t>(t - 1)); }
  std::int64_t t_max() const { return static_cast<std::int64_t>(rows.size()); }
};

using ErrorRow = BasicErrorRow<double>;
using ErrorSeries = BasicErrorSeries<double>;
using ExactErrorRow = BasicErrorRow<mpq_class>;
using ExactErrorSeries = BasicErrorSeries<mpq_class>;

ErrorSeries to_float(const ExactErrorSeries& series);

// Throws DomainError for t_max < 1 and ResourceLimit when the state count
// exceeds opts.max_states.
ErrorSeries error_series(const UrnParams& params, const Schedule& schedule, std::int64_t t_max,
                         const EngineOptions& opts = {});
ExactErrorSeries error_series_exact(const UrnParams& params, const Schedule& schedule,
                                    std::int64_t t_max,
                                    std::size_t max_states = EngineOptions{}.max_states);

}  // namespace cascades
