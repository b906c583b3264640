#include "cascades/exact_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

#include "cascades/error.hpp"

namespace cascades {

namespace {

void check_t_max(std::int64_t t_max) {
  if (t_max < 1) throw Error(ErrorCode::DomainError, "t_max must be >= 1");
}

void check_state_cap(std::size_t count, std::size_t cap, std::int64_t t) {
  if (count > cap) {
    throw Error(ErrorCode::ResourceLimit, "state count " + std::to_string(count) +
                                              " exceeds cap " + std::to_string(cap) +
                                              " at t = " + std::to_string(t));
  }
}

// Per-regime weight of the MAP-wrong event under theta = 1.
template <class Num>
Num map_wrong_weight(Regime regime, const Num& minority) {
  switch (regime) {
    case Regime::CascadeDown: return Num(1);
    case Regime::Social: return minority;
    case Regime::CascadeUp: return Num(0);
  }
  return Num(0);
}

// ---- Rational helpers --------------------------------------------------

struct ExactParams {
  mpq_class a;
  mpq_class b;
  mpq_class low;   // b / a
  mpq_class high;  // a / b
  mpq_class majority;
  mpq_class minority;

  explicit ExactParams(const UrnParams& params)
      : a(params.a()), b(params.b()), low(b / a), high(a / b),
        majority(a / (a + b)), minority(b / (a + b)) {}

  Regime classify(const mpq_class& ratio) const {
    if (ratio < low) return Regime::CascadeDown;
    if (ratio > high) return Regime::CascadeUp;
    return Regime::Social;
  }
};

// P_hypothesis(Z = 1 | regime) in exact arithmetic.
mpq_class exact_prob_one(Regime regime, const mpq_class& p, bool hyp_one, const ExactParams& ep) {
  const mpq_class& q1 = hyp_one ? ep.majority : ep.minority;
  const mpq_class& q2 = hyp_one ? ep.minority : ep.majority;
  switch (regime) {
    case Regime::CascadeDown: return q1 * p;
    case Regime::Social: return q1;
    case Regime::CascadeUp: return 1 - q2 * p;
  }
  return 0;
}

// ---- Float helpers -----------------------------------------------------

std::vector<RatioState> merge_runs(std::vector<std::vector<RatioState>> runs) {
  const auto by_ratio = [](const RatioState& x, const RatioState& y) {
    return x.log_ratio < y.log_ratio;
  };
  runs.erase(std::remove_if(runs.begin(), runs.end(), [](const auto& r) { return r.empty(); }),
             runs.end());
  if (runs.empty()) return {};
  while (runs.size() > 1) {
    std::vector<std::vector<RatioState>> next;
    for (std::size_t i = 0; i + 1 < runs.size(); i += 2) {
      std::vector<RatioState> merged;
      merged.reserve(runs[i].size() + runs[i + 1].size());
      std::merge(runs[i].begin(), runs[i].end(), runs[i + 1].begin(), runs[i + 1].end(),
                 std::back_inserter(merged), by_ratio);
      next.push_back(std::move(merged));
    }
    if (runs.size() % 2 == 1) next.push_back(std::move(runs.back()));
    runs = std::move(next);
  }
  return std::move(runs.front());
}

}  // namespace

double RatioDistribution::total_mass() const {
  double sum = 0.0;
  for (const auto& s : states) sum += s.p1_mass;
  return sum;
}

double RatioDistribution::p2_mass() const {
  double sum = 0.0;
  for (const auto& s : states) sum += s.p1_mass * std::exp(-s.log_ratio);
  return sum;
}

mpq_class ExactRatioDistribution::total_mass() const {
  mpq_class sum = 0;
  for (const auto& s : states) sum += s.p1_mass;
  return sum;
}

mpq_class ExactRatioDistribution::p2_mass() const {
  mpq_class sum = 0;
  for (const auto& s : states) sum += s.p1_mass / s.ratio;
  return sum;
}

RatioDistribution init_distribution() {
  RatioDistribution dist;
  dist.states.push_back({0.0, 1.0});
  return dist;
}

ExactRatioDistribution init_exact_distribution() {
  ExactRatioDistribution dist;
  dist.states.push_back({mpq_class(1), mpq_class(1)});
  return dist;
}

RatioDistribution step(const RatioDistribution& dist, const Schedule& schedule,
                       const UrnParams& params, const EngineOptions& opts) {
  const std::int64_t t = dist.t + 1;
  const double p = schedule.evaluate(t);

  // Parents are sorted, so each regime is a contiguous block, and within a
  // (block, action) pair the log-ratio shift is constant: every such pair
  // yields an already-sorted run of children.
  std::vector<std::vector<RatioState>> runs;
  auto first = dist.states.begin();
  while (first != dist.states.end()) {
    const Regime regime = classify(first->log_ratio, params);
    auto last = std::find_if(first, dist.states.end(), [&](const RatioState& s) {
      return classify(s.log_ratio, params) != regime;
    });
    const ActionDistribution probs = action_probs(regime, p, Label::One, params);
    for (Label action : {Label::One, Label::Two}) {
      const double prob = probs.prob(action);
      if (prob <= 0.0) continue;
      const double shift = log_update_factor(regime, action, p, params);
      std::vector<RatioState> run;
      run.reserve(static_cast<std::size_t>(last - first));
      for (auto it = first; it != last; ++it) {
        run.push_back({it->log_ratio + shift, it->p1_mass * prob});
      }
      runs.push_back(std::move(run));
    }
    first = last;
  }
  const std::vector<RatioState> children = merge_runs(std::move(runs));

  RatioDistribution out;
  out.t = t;
  out.pruned_mass = dist.pruned_mass;
  out.pruned_p2_mass = dist.pruned_p2_mass;
  out.states.reserve(children.size());

  std::size_t i = 0;
  while (i < children.size()) {
    const double anchor = children[i].log_ratio;
    const Regime regime = classify(anchor, params);
    std::size_t j = i + 1;
    while (j < children.size() && children[j].log_ratio - anchor <= opts.merge_tol &&
           classify(children[j].log_ratio, params) == regime) {
      ++j;
    }
    RatioState merged = children[i];
    if (j - i > 1) {
      // Keep the cluster's P1 and P2 totals: the merged ratio is their quotient.
      double mass = 0.0;
      double rel_p2 = 0.0;
      for (std::size_t k = i; k < j; ++k) {
        mass += children[k].p1_mass;
        rel_p2 += children[k].p1_mass * std::exp(-(children[k].log_ratio - anchor));
      }
      const double ratio = anchor + std::log(mass / rel_p2);
      merged = {std::clamp(ratio, anchor, children[j - 1].log_ratio), mass};
    }
    if (merged.p1_mass < opts.prune_floor) {
      out.pruned_mass += merged.p1_mass;
      out.pruned_p2_mass += merged.p1_mass * std::exp(-merged.log_ratio);
    } else {
      out.states.push_back(merged);
    }
    i = j;
  }
  check_state_cap(out.states.size(), opts.max_states, t);
  return out;
}

ExactRatioDistribution step(const ExactRatioDistribution& dist, const Schedule& schedule,
                            const UrnParams& params, std::size_t max_states) {
  const std::int64_t t = dist.t + 1;
  const ExactParams ep(params);
  const mpq_class p(schedule.evaluate(t));

  std::map<mpq_class, mpq_class> children;
  for (const auto& parent : dist.states) {
    const Regime regime = ep.classify(parent.ratio);
    const mpq_class p1_one = exact_prob_one(regime, p, true, ep);
    const mpq_class p2_one = exact_prob_one(regime, p, false, ep);
    const std::array<std::pair<mpq_class, mpq_class>, 2> branches{
        std::pair{p1_one, p2_one}, std::pair{mpq_class(1 - p1_one), mpq_class(1 - p2_one)}};
    for (const auto& [prob1, prob2] : branches) {
      if (sgn(prob1) == 0) continue;
      children[parent.ratio * prob1 / prob2] += parent.p1_mass * prob1;
    }
  }
  check_state_cap(children.size(), max_states, t);

  ExactRatioDistribution out;
  out.t = t;
  out.states.reserve(children.size());
  for (auto& [ratio, mass] : children) out.states.push_back({ratio, mass});
  return out;
}

double map_error(const RatioDistribution& dist, const UrnParams& params) {
  double sum = 0.0;
  for (const auto& s : dist.states) {
    sum += s.p1_mass * map_wrong_weight(classify(s.log_ratio, params), params.minority_prob());
  }
  return sum;
}

mpq_class map_error(const ExactRatioDistribution& dist, const UrnParams& params) {
  const ExactParams ep(params);
  mpq_class sum = 0;
  for (const auto& s : dist.states) {
    sum += s.p1_mass * map_wrong_weight(ep.classify(s.ratio), ep.minority);
  }
  return sum;
}

double prob_cascade_down(const RatioDistribution& dist, const UrnParams& params) {
  double sum = 0.0;
  for (const auto& s : dist.states) {
    if (classify(s.log_ratio, params) == Regime::CascadeDown) sum += s.p1_mass;
  }
  return sum;
}

double prob_social_or_down(const RatioDistribution& dist, const UrnParams& params) {
  double sum = 0.0;
  for (const auto& s : dist.states) {
    if (classify(s.log_ratio, params) != Regime::CascadeUp) sum += s.p1_mass;
  }
  return sum;
}

mpq_class prob_cascade_down(const ExactRatioDistribution& dist, const UrnParams& params) {
  const ExactParams ep(params);
  mpq_class sum = 0;
  for (const auto& s : dist.states) {
    if (ep.classify(s.ratio) == Regime::CascadeDown) sum += s.p1_mass;
  }
  return sum;
}

mpq_class prob_social_or_down(const ExactRatioDistribution& dist, const UrnParams& params) {
  const ExactParams ep(params);
  mpq_class sum = 0;
  for (const auto& s : dist.states) {
    if (ep.classify(s.ratio) != Regime::CascadeUp) sum += s.p1_mass;
  }
  return sum;
}

ErrorSeries to_float(const ExactErrorSeries& series) {
  ErrorSeries out;
  out.mode = series.mode;
  out.peak_states = series.peak_states;
  out.final_states = series.final_states;
  out.rows.reserve(series.rows.size());
  for (const auto& r : series.rows) {
    out.rows.push_back({r.t, r.p_t.get_d(), r.map_error.get_d(), r.error.get_d(),
                        r.t_error.get_d(), r.cumulative_errors.get_d(),
                        r.prob_cascade_down.get_d(), r.prob_social_or_down.get_d(),
                        r.martingale_residual.get_d(), r.pruned_mass.get_d()});
  }
  return out;
}

ErrorSeries error_series(const UrnParams& params, const Schedule& schedule, std::int64_t t_max,
                         const EngineOptions& opts) {
  check_t_max(t_max);
  ErrorSeries series;
  series.mode = Arithmetic::Float;
  series.rows.reserve(static_cast<std::size_t>(t_max));
  RatioDistribution dist = init_distribution();
  series.peak_states = dist.states.size();
  double cumulative = 0.0;
  for (std::int64_t t = 1; t <= t_max; ++t) {
    ErrorRow row;
    row.t = t;
    row.p_t = schedule.evaluate(t);
    row.map_error = map_error(dist, params);
    row.error = row.map_error * (1.0 - row.p_t) + params.minority_prob() * row.p_t;
    row.t_error = static_cast<double>(t) * row.error;
    cumulative += row.error;
    row.cumulative_errors = cumulative;

    dist = step(dist, schedule, params, opts);
    row.prob_cascade_down = prob_cascade_down(dist, params);
    row.prob_social_or_down = prob_social_or_down(dist, params);
    row.martingale_residual = std::abs(dist.p2_mass() + dist.pruned_p2_mass - 1.0);
    row.pruned_mass = dist.pruned_mass;
    series.rows.push_back(row);
    series.peak_states = std::max(series.peak_states, dist.states.size());
  }
  series.final_states = dist.states.size();
  return series;
}

ExactErrorSeries error_series_exact(const UrnParams& params, const Schedule& schedule,
                                    std::int64_t t_max, std::size_t max_states) {
  check_t_max(t_max);
  const ExactParams ep(params);
  ExactErrorSeries series;
  series.mode = Arithmetic::Rational;
  ExactRatioDistribution dist = init_exact_distribution();
  series.peak_states = dist.states.size();
  mpq_class cumulative = 0;
  for (std::int64_t t = 1; t <= t_max; ++t) {
    ExactErrorRow row;
    row.t = t;
    row.p_t = mpq_class(schedule.evaluate(t));
    row.map_error = map_error(dist, params);
    row.error = row.map_error * (1 - row.p_t) + ep.minority * row.p_t;
    row.t_error = row.error * t;
    cumulative += row.error;
    row.cumulative_errors = cumulative;

    dist = step(dist, schedule, params, max_states);
    row.prob_cascade_down = prob_cascade_down(dist, params);
    row.prob_social_or_down = prob_social_or_down(dist, params);
    row.martingale_residual = abs(mpq_class(dist.p2_mass() - 1));
    row.pruned_mass = 0;
    series.rows.push_back(row);
    series.peak_states = std::max(series.peak_states, dist.states.size());
  }
  series.final_states = dist.states.size();
  return series;
}

}  // namespace cascades
