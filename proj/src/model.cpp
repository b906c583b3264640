#include "cascades/model.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

#include "cascades/error.hpp"

namespace cascades {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonPositive: return "NonPositive";
    case ErrorCode::NotMajority: return "NotMajority";
    case ErrorCode::NearDegenerate: return "NearDegenerate";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ImpossibleOutcome: return "ImpossibleOutcome";
    case ErrorCode::ResourceLimit: return "ResourceLimit";
    case ErrorCode::ParseError: return "ParseError";
  }
  return "Unknown";
}

namespace {

void check_unit_interval(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) {
    std::ostringstream msg;
    msg << name << " = " << x << " outside [0, 1]";
    throw Error(ErrorCode::DomainError, msg.str());
  }
}

// g = (r - 1) / log r, the mean of the two cascade step sizes ratio. Long
// double keeps kappa_star's vanishing denominator accurate for r near 1.
long double step_ratio(const UrnParams& params) {
  const long double r_minus_1 = static_cast<long double>(params.ratio()) - 1.0L;
  return r_minus_1 / std::log1p(r_minus_1);
}

}  // namespace

UrnParams::UrnParams(double a, double b)
    : a_(a),
      b_(b),
      ratio_(a / b),
      log_ratio_(std::log(ratio_)),
      majority_(ratio_ / (ratio_ + 1.0)),
      minority_(1.0 / (ratio_ + 1.0)) {}

UrnParams validate_params(double a, double b) {
  if (!std::isfinite(a) || !std::isfinite(b)) {
    throw Error(ErrorCode::DomainError, "urn weights must be finite");
  }
  if (a <= 0.0 || b <= 0.0) {
    throw Error(ErrorCode::NonPositive, "urn weights must be positive");
  }
  if (a <= b) {
    throw Error(ErrorCode::NotMajority, "need a > b");
  }
  if (a / b < kMinRatio) {
    throw Error(ErrorCode::NearDegenerate, "a/b must be at least 1 + 1e-9");
  }
  return UrnParams(a, b);
}

double signal_error_prob(const UrnParams& params) { return params.minority_prob(); }

double signal_likelihood(const UrnParams& params, Label hypothesis, Label signal) {
  return signal == hypothesis ? params.majority_prob() : params.minority_prob();
}

double kappa_star(const UrnParams& params) {
  const long double g = step_ratio(params);
  const long double denom = 1.0L + g * (std::log(g) - 1.0L);
  if (!(denom > 0.0L)) {
    throw Error(ErrorCode::NearDegenerate, "kappa_star denominator is not positive");
  }
  return static_cast<double>(1.0L / denom);
}

double lambda_star(const UrnParams& params) {
  const long double r_minus_1 = static_cast<long double>(params.ratio()) - 1.0L;
  return static_cast<double>(std::log(step_ratio(params)) / std::log1p(r_minus_1));
}

double f_lambda(const UrnParams& params, double lam) {
  check_unit_interval(lam, "lambda");
  if (lam == 0.0 || lam == 1.0) return 0.0;
  const long double r = params.ratio();
  const long double l = lam;
  // lam*r + (1 - lam) - r^lam, rewritten to avoid cancellation near r = 1.
  const long double num = l * (r - 1.0L) - std::expm1(l * std::log(r));
  const double value = static_cast<double>(num / (r + 1.0L));
  return value < 0.0 ? 0.0 : value;
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::CascadeDown: return "CascadeDown";
    case Regime::Social: return "Social";
    case Regime::CascadeUp: return "CascadeUp";
  }
  return "Unknown";
}

std::ostream& operator<<(std::ostream& os, Regime regime) { return os << to_string(regime); }

LogRatioState::LogRatioState(double log_ratio) : log_ratio_(log_ratio) {
  if (!std::isfinite(log_ratio)) {
    throw Error(ErrorCode::DomainError, "log-likelihood ratio must be finite");
  }
}

Regime classify(double log_ratio, const UrnParams& params, double tol) {
  const double edge = params.log_ratio();
  if (log_ratio < -edge - tol) return Regime::CascadeDown;
  if (log_ratio > edge + tol) return Regime::CascadeUp;
  return Regime::Social;
}

Regime classify(const LogRatioState& state, const UrnParams& params, double tol) {
  return classify(state.log_ratio(), params, tol);
}

Label decide(Regime regime, Label signal, bool is_revealer) {
  if (is_revealer) return signal;
  switch (regime) {
    case Regime::CascadeUp: return Label::One;
    case Regime::CascadeDown: return Label::Two;
    case Regime::Social: return signal;
  }
  return signal;
}

ActionDistribution action_probs(Regime regime, double reveal_prob, Label hypothesis,
                                const UrnParams& params) {
  check_unit_interval(reveal_prob, "reveal probability");
  // Probability of drawing signal 1 under the hypothesis.
  const double q1 = hypothesis == Label::One ? params.majority_prob() : params.minority_prob();
  const double q2 = hypothesis == Label::One ? params.minority_prob() : params.majority_prob();
  ActionDistribution dist;
  switch (regime) {
    case Regime::CascadeDown:
      dist.prob_one = q1 * reveal_prob;
      dist.prob_two = 1.0 - dist.prob_one;
      break;
    case Regime::Social:
      dist.prob_one = q1;
      dist.prob_two = q2;
      break;
    case Regime::CascadeUp:
      dist.prob_two = q2 * reveal_prob;
      dist.prob_one = 1.0 - dist.prob_two;
      break;
  }
  return dist;
}

double log_update_factor(Regime regime, Label action, double reveal_prob,
                         const UrnParams& params) {
  check_unit_interval(reveal_prob, "reveal probability");
  const double step = params.log_ratio();
  const double maj = params.majority_prob();
  const double mnr = params.minority_prob();

  // Inside a cascade the action against the cascade is a revealer's signal,
  // so it carries a full signal step; the cascade action carries
  // log[(1 - mnr*p) / (1 - maj*p)] toward the cascade.
  auto with_cascade = [&]() {
    if (reveal_prob == 1.0) return step;
    return std::log1p(-mnr * reveal_prob) - std::log1p(-maj * reveal_prob);
  };
  auto against_cascade = [&]() {
    if (reveal_prob == 0.0) {
      throw Error(ErrorCode::ImpossibleOutcome,
                  "action against a cascade with no revealers has probability zero");
    }
    return step;
  };

  switch (regime) {
    case Regime::Social:
      return action == Label::One ? step : -step;
    case Regime::CascadeUp:
      return action == Label::One ? with_cascade() : -against_cascade();
    case Regime::CascadeDown:
      return action == Label::Two ? -with_cascade() : against_cascade();
  }
  return 0.0;
}

double conditional_moment(Regime regime, double reveal_prob, double lam,
                          const UrnParams& params) {
  check_unit_interval(reveal_prob, "reveal probability");
  check_unit_interval(lam, "lambda");
  const double r = params.ratio();
  const double maj = params.majority_prob();
  const double mnr = params.minority_prob();
  const double p = reveal_prob;
  // a^x b^(1-x) / (a+b) = r^x / (r+1)
  auto scaled_power = [&](double x) { return std::pow(r, x) * mnr; };

  switch (regime) {
    case Regime::CascadeDown:
      return scaled_power(1.0 - lam) * p +
             std::pow(1.0 - maj * p, 1.0 - lam) * std::pow(1.0 - mnr * p, lam);
    case Regime::Social:
      return scaled_power(1.0 - lam) + scaled_power(lam);
    case Regime::CascadeUp:
      return scaled_power(lam) * p +
             std::pow(1.0 - mnr * p, 1.0 - lam) * std::pow(1.0 - maj * p, lam);
  }
  return 0.0;
}

double conditional_moment_direct(Regime regime, double reveal_prob, double lam,
                                 const UrnParams& params) {
  check_unit_interval(lam, "lambda");
  const ActionDistribution dist = action_probs(regime, reveal_prob, Label::One, params);
  double total = 0.0;
  for (Label z : {Label::One, Label::Two}) {
    const double prob = dist.prob(z);
    if (prob == 0.0) continue;
    total += prob * std::exp(-lam * log_update_factor(regime, z, reveal_prob, params));
  }
  return total;
}

}  // namespace cascades
