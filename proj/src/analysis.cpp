#include "cascades/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <sstream>

#include "cascades/error.hpp"
#include "cascades/format.hpp"
#include "cascades/oracle.hpp"
#include "cascades/schedule.hpp"

namespace cascades {

namespace {

constexpr double kPointsPerDecade = 30.0;

double log_pmf(double lambda, std::int64_t k) {
  if (lambda == 0.0) return k == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
  const double kd = static_cast<double>(k);
  return kd * std::log(lambda) - lambda - std::lgamma(kd + 1.0);
}

void check_rate(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::DomainError, "Poisson rate must be finite and >= 0");
  }
}

struct PoissonSums {
  double abs_diff = 0.0;
  double overlap = 0.0;
};

PoissonSums poisson_sums(double l1, double l2, double tail_tol) {
  check_rate(l1);
  check_rate(l2);
  const double hi = std::max(l1, l2);
  // Far past both means the pmfs are below any tolerance we care about.
  const auto hard_cap = static_cast<std::int64_t>(hi + 60.0 * std::sqrt(hi) + 200.0);
  PoissonSums sums;
  double cdf1 = 0.0;
  double cdf2 = 0.0;
  for (std::int64_t k = 0; k <= hard_cap; ++k) {
    const double p1 = std::exp(log_pmf(l1, k));
    const double p2 = std::exp(log_pmf(l2, k));
    cdf1 += p1;
    cdf2 += p2;
    sums.abs_diff += std::abs(p1 - p2);
    sums.overlap += std::min(p1, p2);
    if (static_cast<double>(k) >= hi && 1.0 - cdf1 < tail_tol && 1.0 - cdf2 < tail_tol) break;
  }
  return sums;
}

// ---- diagnostics helpers ----------------------------------------------

std::string tag(const std::string& name, double ratio) {
  return name + "[a/b=" + format_double(ratio) + "]";
}

struct CheckBuilder {
  DiagnosticsReport& report;

  void add(std::string name, double residual, double tolerance, std::string detail = {}) {
    const bool ok = std::isfinite(residual) && residual <= tolerance;
    report.checks.push_back({std::move(name), ok, residual, tolerance, std::move(detail)});
  }
  void fail(std::string name, std::string detail) {
    report.checks.push_back({std::move(name), false, std::numeric_limits<double>::infinity(), 0.0,
                             std::move(detail)});
  }
};

std::vector<double> with_lambda_star(std::vector<double> lambdas, double lam_star) {
  lambdas.push_back(lam_star);
  return lambdas;
}

// Largest |J| grid used for classification symmetry.
std::vector<double> log_ratio_grid(const UrnParams& params) {
  const double step = params.log_ratio();
  std::vector<double> grid;
  for (int i = -60; i <= 60; ++i) grid.push_back(step * i / 20.0);
  grid.push_back(step);
  grid.push_back(-step);
  return grid;
}

void check_model(CheckBuilder& out, const UrnParams& params, const VerifyGrids& grids) {
  const double ratio = params.ratio();
  const double kappa = grids.kappa ? grids.kappa(params) : kappa_star(params);
  const double lam_star = lambda_star(params);

  // f at lambda_star equals b / ((a+b) kappa).
  out.add(tag("kappa_lambda_identity", ratio),
          std::abs(f_lambda(params, lam_star) - params.minority_prob() / kappa), 1e-10);

  const bool in_range = lam_star > 0.5 && lam_star < 1.0;
  out.add(tag("lambda_star_in_open_half_unit", ratio), in_range ? 0.0 : 1.0, 0.0,
          "lambda_star = " + format_double(lam_star));

  {
    double best = -1.0;
    double argmax = 0.0;
    for (int i = 0; i <= 10000; ++i) {
      const double lam = i * 1e-4;
      const double v = f_lambda(params, lam);
      if (v > best) {
        best = v;
        argmax = lam;
      }
    }
    out.add(tag("lambda_star_is_argmax", ratio), std::abs(argmax - lam_star), 1e-3);
  }

  {
    double worst_neg = 0.0;
    double worst_convex = 0.0;
    const int n = 1000;
    std::vector<double> f(n + 1);
    for (int i = 0; i <= n; ++i) {
      f[static_cast<std::size_t>(i)] = f_lambda(params, static_cast<double>(i) / n);
      worst_neg = std::max(worst_neg, -f[static_cast<std::size_t>(i)]);
    }
    for (std::size_t i = 1; i < f.size() - 1; ++i) {
      worst_convex = std::max(worst_convex, f[i - 1] - 2.0 * f[i] + f[i + 1]);
    }
    out.add(tag("f_lambda_nonnegative", ratio), worst_neg, 0.0);
    out.add(tag("f_lambda_concave", ratio), worst_convex, 1e-12);
    out.add(tag("f_lambda_endpoints_zero", ratio),
            std::max(std::abs(f_lambda(params, 0.0)), std::abs(f_lambda(params, 1.0))), 0.0);
    for (double lam : grids.lambdas) {
      if (lam == 0.0 || lam == 1.0) {
        out.add(tag("f_lambda_zero_at_" + format_double(lam), ratio),
                std::abs(f_lambda(params, lam)), 0.0);
      }
    }
  }

  // Scale invariance under power-of-two rescaling (exact in binary).
  {
    double mismatches = 0.0;
    for (double k : {0.5, 2.0, 1024.0}) {
      const UrnParams scaled = validate_params(params.a() * k, params.b() * k);
      const auto same = [&](double x, double y) {
        if (x != y) mismatches += 1.0;
      };
      same(kappa_star(params), kappa_star(scaled));
      same(lambda_star(params), lambda_star(scaled));
      same(signal_error_prob(params), signal_error_prob(scaled));
      for (double j : log_ratio_grid(params)) {
        if (classify(j, params) != classify(j, scaled)) mismatches += 1.0;
      }
      for (double p : grids.reveal_probs) {
        for (Regime regime : {Regime::CascadeDown, Regime::Social, Regime::CascadeUp}) {
          for (Label hyp : {Label::One, Label::Two}) {
            const auto x = action_probs(regime, p, hyp, params);
            const auto y = action_probs(regime, p, hyp, scaled);
            same(x.prob_one, y.prob_one);
            same(x.prob_two, y.prob_two);
            for (Label z : {Label::One, Label::Two}) {
              if (action_probs(regime, p, Label::One, params).prob(z) == 0.0) continue;
              same(log_update_factor(regime, z, p, params),
                   log_update_factor(regime, z, p, scaled));
            }
          }
        }
      }
    }
    out.add(tag("scale_invariance", ratio), mismatches, 0.0);
  }

  // Mirror symmetry of the regimes and of the action law.
  {
    double mismatches = 0.0;
    for (double j : log_ratio_grid(params)) {
      const bool up = classify(j, params) == Regime::CascadeUp;
      const bool mirrored_down = classify(-j, params) == Regime::CascadeDown;
      if (up != mirrored_down) mismatches += 1.0;
    }
    const auto mirror = [](Regime r) {
      return r == Regime::CascadeUp ? Regime::CascadeDown
                                    : (r == Regime::CascadeDown ? Regime::CascadeUp : r);
    };
    double worst = 0.0;
    for (double p : grids.reveal_probs) {
      for (Regime regime : {Regime::CascadeDown, Regime::Social, Regime::CascadeUp}) {
        const auto two = action_probs(regime, p, Label::Two, params);
        const auto one = action_probs(mirror(regime), p, Label::One, params);
        worst = std::max({worst, std::abs(two.prob_one - one.prob_two),
                          std::abs(two.prob_two - one.prob_one)});
      }
    }
    out.add(tag("mirror_symmetry_regimes", ratio), mismatches, 0.0);
    out.add(tag("mirror_symmetry_action_probs", ratio), worst, 1e-15);
  }

  // Closed-form conditional moments against the two-outcome expectation, and
  // the lambda = 1 martingale increment.
  {
    double worst_moment = 0.0;
    double worst_martingale = 0.0;
    for (double p : grids.reveal_probs) {
      for (Regime regime : {Regime::CascadeDown, Regime::Social, Regime::CascadeUp}) {
        for (double lam : with_lambda_star(grids.lambdas, lam_star)) {
          worst_moment = std::max(worst_moment,
                                  std::abs(conditional_moment(regime, p, lam, params) -
                                           conditional_moment_direct(regime, p, lam, params)));
        }
        worst_martingale = std::max(
            worst_martingale, std::abs(conditional_moment_direct(regime, p, 1.0, params) - 1.0));
      }
    }
    out.add(tag("conditional_moment_closed_form", ratio), worst_moment, 1e-12);
    out.add(tag("martingale_increment", ratio), worst_martingale, 1e-14);
  }

  {
    double violations = 0.0;
    for (Regime regime : {Regime::CascadeDown, Regime::CascadeUp}) {
      if (decide(regime, Label::One, false) != decide(regime, Label::Two, false)) violations += 1.0;
    }
    for (Label x : {Label::One, Label::Two}) {
      if (decide(Regime::Social, x, false) != x || decide(Regime::CascadeUp, x, true) != x) {
        violations += 1.0;
      }
    }
    out.add(tag("decide_cascade_ignores_signal", ratio), violations, 0.0);
  }
}

// Walks all action prefixes up to `depth`, comparing the Bayesian guess
// from the raw likelihood comparison with decide(classify(J)). Returns the
// number of disagreements.
double map_rule_mismatches(const UrnParams& params, double p, int depth) {
  const double maj = params.majority_prob();
  const double mnr = params.minority_prob();
  double mismatches = 0.0;
  std::function<void(int, double, double)> walk = [&](int d, double like1, double like2) {
    if (d == depth) return;
    const Regime regime = classify(std::log(like1 / like2), params);
    double prob[2][2] = {{0, 0}, {0, 0}};
    for (int x = 0; x < 2; ++x) {
      const double d1 = like1 * (x == 0 ? maj : mnr);
      const double d2 = like2 * (x == 0 ? mnr : maj);
      const bool tie = std::abs(d1 - d2) <= kBoundaryTol * std::max(d1, d2);
      const int guess = tie ? x : (d1 > d2 ? 0 : 1);
      const Label signal = x == 0 ? Label::One : Label::Two;
      if (to_int(decide(regime, signal, false)) - 1 != guess) mismatches += 1.0;
      prob[0][x] += (x == 0 ? maj : mnr) * p;
      prob[1][x] += (x == 0 ? mnr : maj) * p;
      prob[0][guess] += (x == 0 ? maj : mnr) * (1.0 - p);
      prob[1][guess] += (x == 0 ? mnr : maj) * (1.0 - p);
    }
    for (int z = 0; z < 2; ++z) {
      if (prob[0][z] == 0.0) continue;
      walk(d + 1, like1 * prob[0][z], like2 * prob[1][z]);
    }
  };
  walk(0, 1.0, 1.0);
  return mismatches;
}

double max_series_diff(const ErrorSeries& x, const ErrorSeries& y) {
  double worst = 0.0;
  for (std::size_t i = 0; i < x.rows.size(); ++i) {
    const auto& r = x.rows[i];
    const auto& s = y.rows[i];
    worst = std::max({worst, std::abs(r.p_t - s.p_t), std::abs(r.map_error - s.map_error),
                      std::abs(r.error - s.error), std::abs(r.t_error - s.t_error),
                      std::abs(r.cumulative_errors - s.cumulative_errors),
                      std::abs(r.prob_cascade_down - s.prob_cascade_down),
                      std::abs(r.prob_social_or_down - s.prob_social_or_down)});
  }
  return worst;
}

void check_engine(CheckBuilder& out, const UrnParams& params, const VerifyGrids& grids) {
  const double ratio = params.ratio();
  std::vector<std::pair<std::string, Schedule>> schedules;
  schedules.emplace_back("optimal", optimal_schedule(params));
  schedules.emplace_back("zero", zero_schedule());
  for (double p : grids.reveal_probs) {
    schedules.emplace_back("const" + format_double(p), constant_schedule(p));
  }

  EngineOptions opts;
  opts.merge_tol = 1e-4;  // long runs; these invariants hold for any merge tolerance

  double worst_mass = 0.0;
  double worst_martingale = 0.0;
  double worst_sandwich = 0.0;
  double worst_lower = 0.0;
  double worst_first_two = 0.0;
  double lower_equality_violations = 0.0;
  const double step_size = params.log_ratio();
  const double maj = params.majority_prob();
  const double mnr = params.minority_prob();

  for (const auto& [name, schedule] : schedules) {
    RatioDistribution dist = init_distribution();
    double prev_down = 0.0;
    double prev_sod = 1.0;
    for (std::int64_t t = 1; t <= grids.horizon; ++t) {
      const double p = schedule.evaluate(t);
      const double map = map_error(dist, params);
      const double error = map * (1.0 - p) + mnr * p;
      worst_sandwich = std::max({worst_sandwich, prev_down - map, map - prev_sod});
      worst_lower = std::max(worst_lower, mnr * p - error);
      // Equality exactly when the Bayesian term vanishes.
      if (map == 0.0 || p == 1.0) {
        if (error != mnr * p) lower_equality_violations += 1.0;
      } else if (map * (1.0 - p) > 1e-15 && error <= mnr * p) {
        lower_equality_violations += 1.0;
      }

      dist = step(dist, schedule, params, opts);
      worst_mass = std::max(worst_mass, std::abs(dist.total_mass() + dist.pruned_mass - 1.0));
      worst_martingale =
          std::max(worst_martingale, std::abs(dist.p2_mass() + dist.pruned_p2_mass - 1.0));
      prev_down = prob_cascade_down(dist, params);
      prev_sod = prob_social_or_down(dist, params);

      if (t == 1 || t == 2) {
        const std::vector<RatioState> want =
            t == 1 ? std::vector<RatioState>{{-step_size, mnr}, {step_size, maj}}
                   : std::vector<RatioState>{
                         {-2 * step_size, mnr * mnr}, {0.0, 2 * maj * mnr}, {2 * step_size, maj * maj}};
        if (dist.states.size() != want.size()) {
          worst_first_two = std::numeric_limits<double>::infinity();
        } else {
          for (std::size_t i = 0; i < want.size(); ++i) {
            worst_first_two = std::max({worst_first_two,
                                        std::abs(dist.states[i].log_ratio - want[i].log_ratio),
                                        std::abs(dist.states[i].p1_mass - want[i].p1_mass)});
          }
        }
      }
    }
  }
  out.add(tag("mass_conservation", ratio), worst_mass, 1e-12);
  out.add(tag("martingale_inverse_ratio", ratio), worst_martingale, 1e-9);
  out.add(tag("map_error_sandwich", ratio), worst_sandwich, 1e-15);
  out.add(tag("error_lower_bound", ratio), worst_lower, 1e-15);
  out.add(tag("error_lower_bound_equality_cases", ratio), lower_equality_violations, 0.0);
  out.add(tag("first_two_follow_signals", ratio), worst_first_two, 1e-12);

  // Zero schedule: cascade mass never decreases and cascade states are fixed.
  {
    double worst = 0.0;
    const Schedule zero = zero_schedule();
    RatioDistribution dist = init_distribution();
    double prev_up = 0.0;
    double prev_down = 0.0;
    for (std::int64_t t = 1; t <= grids.horizon; ++t) {
      RatioDistribution next = step(dist, zero, params);
      for (const auto& s : dist.states) {
        if (classify(s.log_ratio, params) == Regime::Social) continue;
        const auto it = std::find_if(next.states.begin(), next.states.end(), [&](const RatioState& c) {
          return c.log_ratio == s.log_ratio;
        });
        worst = std::max(worst, it == next.states.end() ? 1.0 : s.p1_mass - it->p1_mass);
      }
      const double down = prob_cascade_down(next, params);
      const double up = 1.0 - prob_social_or_down(next, params) - next.pruned_mass;
      worst = std::max({worst, prev_down - down, prev_up - up});
      prev_down = down;
      prev_up = up;
      dist = std::move(next);
    }
    out.add(tag("zero_schedule_absorption", ratio), worst, 1e-15);
  }

  {
    double mismatches = 0.0;
    for (double p : grids.reveal_probs) mismatches += map_rule_mismatches(params, p, 8);
    out.add(tag("map_rule_matches_likelihood_comparison", ratio), mismatches, 0.0);
  }

  {
    double worst = 0.0;
    const std::int64_t horizon = std::min(grids.oracle_horizon, kMaxOracleHorizon);
    for (const Schedule& schedule :
         {optimal_schedule(params), zero_schedule(), constant_schedule(0.3)}) {
      worst = std::max(worst, max_series_diff(error_series(params, schedule, horizon),
                                              enumerate_oracle(params, schedule, horizon)));
    }
    out.add(tag("oracle_equivalence", ratio), worst, 1e-12);
  }
}

}  // namespace

RateFit fit_rate(std::span<const double> errors, Window window, double reference_kappa) {
  const auto n = static_cast<std::int64_t>(errors.size());
  if (window.first < 1 || window.last > n || window.last - window.first + 1 < 10) {
    throw Error(ErrorCode::DomainError, "rate-fit window must hold at least 10 points of the series");
  }
  RateFit fit;
  fit.window = window;
  fit.reference_kappa = reference_kappa;
  for (std::int64_t t = window.first; t <= window.last; ++t) {
    fit.tail_max_tEt = std::max(fit.tail_max_tEt, static_cast<double>(t) * errors[static_cast<std::size_t>(t - 1)]);
  }

  // Geometric subsample of the window.
  const double span = static_cast<double>(window.last) / static_cast<double>(window.first);
  const int count = std::max(2, static_cast<int>(std::ceil(kPointsPerDecade * std::log10(span))) + 1);
  std::vector<std::int64_t> ts;
  for (int k = 0; k < count; ++k) {
    const double frac = static_cast<double>(k) / (count - 1);
    auto t = static_cast<std::int64_t>(std::llround(static_cast<double>(window.first) * std::pow(span, frac)));
    t = std::clamp(t, window.first, window.last);
    if (ts.empty() || t != ts.back()) ts.push_back(t);
  }

  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  std::size_t used = 0;
  for (std::int64_t t : ts) {
    const double e = errors[static_cast<std::size_t>(t - 1)];
    if (!(e > 0.0)) continue;
    const double x = std::log(static_cast<double>(t));
    const double y = std::log(e);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++used;
  }
  if (used < 2) throw Error(ErrorCode::DomainError, "rate fit needs two positive error values");
  const double m = static_cast<double>(used);
  const double denom = m * sxx - sx * sx;
  fit.points = used;
  fit.loglog_slope = (m * sxy - sx * sy) / denom;
  fit.loglog_constant = std::exp((sy - fit.loglog_slope * sx) / m);
  return fit;
}

RateFit fit_rate(const ErrorSeries& series, Window window, double reference_kappa) {
  std::vector<double> errors;
  errors.reserve(series.rows.size());
  for (const auto& row : series.rows) errors.push_back(row.error);
  return fit_rate(std::span<const double>(errors), window, reference_kappa);
}

double poisson_tv(double lambda1, double lambda2, double tail_tol) {
  if (lambda1 == lambda2) {
    check_rate(lambda1);
    return 0.0;
  }
  return std::clamp(0.5 * poisson_sums(lambda1, lambda2, tail_tol).abs_diff, 0.0, 1.0);
}

double poisson_overlap(double lambda1, double lambda2, double tail_tol) {
  if (lambda1 == lambda2) {
    check_rate(lambda1);
    return 1.0;
  }
  return std::clamp(poisson_sums(lambda1, lambda2, tail_tol).overlap, 0.0, 1.0);
}

std::vector<double> heuristic_tv_curve(const UrnParams& params, double c,
                                       std::span<const double> t_grid) {
  if (!(c > 0.0) || !std::isfinite(c)) throw Error(ErrorCode::DomainError, "C must be positive");
  std::vector<double> out;
  out.reserve(t_grid.size());
  double prev = 0.0;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    if (!(t >= 1.0) || (i > 0 && !(t > prev))) {
      throw Error(ErrorCode::DomainError, "t grid must be strictly increasing with t >= 1");
    }
    prev = t;
    const double scale = c * std::log(t);
    out.push_back(poisson_overlap(params.majority_prob() * scale, params.minority_prob() * scale));
  }
  return out;
}

bool DiagnosticsReport::all_passed() const { return failures() == 0; }

std::size_t DiagnosticsReport::failures() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const DiagnosticCheck& c) { return !c.passed; }));
}

DiagnosticsReport verify_identities(const VerifyGrids& grids) {
  if (grids.ratios.empty() || grids.lambdas.empty() || grids.reveal_probs.empty()) {
    throw Error(ErrorCode::DomainError, "verification grids must be non-empty");
  }
  DiagnosticsReport report;
  CheckBuilder out{report};
  for (double ratio : grids.ratios) {
    std::optional<UrnParams> params;
    try {
      params = validate_params(ratio, 1.0);
    } catch (const Error& e) {
      out.fail(tag("params", ratio), e.what());
      out.fail(tag("kappa_lambda_identity", ratio), std::string(to_string(e.code())));
      continue;
    }
    try {
      check_model(out, *params, grids);
      check_engine(out, *params, grids);
    } catch (const Error& e) {
      out.fail(tag("unexpected_error", ratio), e.what());
    }
  }
  for (double lam : grids.lambdas) {
    if (!(lam >= 0.0 && lam <= 1.0)) out.fail("lambda_grid[" + format_double(lam) + "]", "outside [0, 1]");
  }
  for (double p : grids.reveal_probs) {
    if (!(p >= 0.0 && p <= 1.0)) out.fail("reveal_grid[" + format_double(p) + "]", "outside [0, 1]");
  }
  return report;
}

}  // namespace cascades
