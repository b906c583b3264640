#pragma once

// Learning-rate fits, the Poisson total-variation heuristic, and the
// identity/invariant diagnostics suite.

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "cascades/exact_engine.hpp"
#include "cascades/model.hpp"

namespace cascades {

struct Window {
  std::int64_t first = 1;
  std::int64_t last = 1;
};

struct RateFit {
  Window window;
  std::size_t points = 0;       // regression points after geometric subsampling
  double tail_max_tEt = 0.0;    // max t * E_t over the whole window
  double loglog_slope = 0.0;    // d log E_t / d log t
  double loglog_constant = 0.0; // exp(intercept): E_t ~ constant * t^slope
  double reference_kappa = std::numeric_limits<double>::quiet_NaN();
};

// errors[k] is E_t for t = k + 1. Fits log E_t against log t on ~30 points per
// decade of the window; non-positive E_t are skipped. Throws DomainError if
// the window is outside the data, shorter than 10 points, or leaves fewer
// than two usable points.
RateFit fit_rate(std::span<const double> errors, Window window,
                 double reference_kappa = std::numeric_limits<double>::quiet_NaN());
RateFit fit_rate(const ErrorSeries& series, Window window,
                 double reference_kappa = std::numeric_limits<double>::quiet_NaN());

inline constexpr double kPoissonTailTol = 1e-12;

// Total-variation distance between Poisson(lambda1) and Poisson(lambda2).
// Throws DomainError on negative or non-finite rates.
double poisson_tv(double lambda1, double lambda2, double tail_tol = kPoissonTailTol);

// 1 - TV, summed directly as sum_k min(pmf1, pmf2) so small overlaps keep
// their relative precision.
double poisson_overlap(double lambda1, double lambda2, double tail_tol = kPoissonTailTol);

// 1 - TV(Poi(a/(a+b) C log t), Poi(b/(a+b) C log t)) for each t. Throws
// DomainError unless C > 0 and t_grid is strictly increasing with t >= 1.
std::vector<double> heuristic_tv_curve(const UrnParams& params, double c,
                                       std::span<const double> t_grid);

struct DiagnosticCheck {
  std::string name;
  bool passed = false;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct DiagnosticsReport {
  std::vector<DiagnosticCheck> checks;

  bool all_passed() const;
  std::size_t failures() const;
};

using KappaFn = std::function<double(const UrnParams&)>;

struct VerifyGrids {
  std::vector<double> ratios{1.1, 1.5, 2.0, 3.0, 5.0, 10.0};
  std::vector<double> lambdas{0.0, 0.25, 0.5, 0.75, 1.0};  // lambda_star is always added
  std::vector<double> reveal_probs{0.0, 0.01, 0.1, 0.5, 1.0};
  std::int64_t horizon = 64;         // exact-engine invariant runs
  std::int64_t oracle_horizon = 12;  // DP vs enumeration
  // Substitute for kappa_star in the identity check (negative controls).
  KappaFn kappa = nullptr;
};

// Runs the model identities and the exact-engine invariants. Failures are
// reported, never thrown. Throws DomainError only for empty grids.
DiagnosticsReport verify_identities(const VerifyGrids& grids = {});

}  // namespace cascades
