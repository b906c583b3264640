#pragma once

// Urn signal model, rate constants, and the one-step law of the public
// log-likelihood ratio J = log(P1(actions) / P2(actions)).

#include <cstdint>
#include <iosfwd>
#include <string_view>

namespace cascades {

// Ratios a/b below this are rejected: kappa_star's denominator vanishes at 1.
inline constexpr double kMinRatio = 1.0 + 1e-9;

// Absolute log-space slack used when classifying J against +-log(a/b).
inline constexpr double kBoundaryTol = 1e-12;

// A ball type, state of the world, private signal, or action. All four live
// in the same two-point set {1, 2}.
enum class Label : std::uint8_t { One = 1, Two = 2 };

constexpr Label opposite(Label x) { return x == Label::One ? Label::Two : Label::One; }
constexpr int to_int(Label x) { return static_cast<int>(x); }

class UrnParams {
 public:
  double a() const { return a_; }
  double b() const { return b_; }
  // a / b
  double ratio() const { return ratio_; }
  // log(a / b), the size of one signal-following step of J.
  double log_ratio() const { return log_ratio_; }
  // a / (a + b), probability that a private signal matches the state.
  double majority_prob() const { return majority_; }
  // b / (a + b)
  double minority_prob() const { return minority_; }

  friend UrnParams validate_params(double a, double b);

 private:
  UrnParams(double a, double b);

  double a_;
  double b_;
  double ratio_;
  double log_ratio_;
  double majority_;
  double minority_;
};

// Throws Error{NonPositive | NotMajority | NearDegenerate}.
UrnParams validate_params(double a, double b);

double signal_error_prob(const UrnParams& params);

// phi_hypothesis(signal): the probability of drawing `signal` when the state is
// `hypothesis`.
double signal_likelihood(const UrnParams& params, Label hypothesis, Label signal);

double kappa_star(const UrnParams& params);
double lambda_star(const UrnParams& params);

// (lam*a + (1-lam)*b - a^lam b^(1-lam)) / (a+b); concave on [0,1], zero at
// both endpoints. Throws DomainError for lam outside [0,1].
double f_lambda(const UrnParams& params, double lam);

enum class Regime : std::uint8_t { CascadeDown, Social, CascadeUp };

std::string_view to_string(Regime regime);
std::ostream& operator<<(std::ostream& os, Regime regime);

class LogRatioState {
 public:
  explicit LogRatioState(double log_ratio);
  double log_ratio() const { return log_ratio_; }

 private:
  double log_ratio_;
};

// Social is the closed interval [-log(a/b), log(a/b)] widened by `tol`.
Regime classify(double log_ratio, const UrnParams& params, double tol = kBoundaryTol);
Regime classify(const LogRatioState& state, const UrnParams& params,
                double tol = kBoundaryTol);

// Action of a player facing public regime `regime` with private `signal`.
// Bayesian ties (posterior equality on the Social boundary) follow the signal.
Label decide(Regime regime, Label signal, bool is_revealer);

struct ActionDistribution {
  double prob_one = 0.0;
  double prob_two = 0.0;

  double prob(Label action) const { return action == Label::One ? prob_one : prob_two; }
};

// P_hypothesis(Z_t = . | regime of R_{t-1}) when player t reveals with
// probability `reveal_prob`.
ActionDistribution action_probs(Regime regime, double reveal_prob, Label hypothesis,
                                const UrnParams& params);

// log[P1(Z_t = action) / P2(Z_t = action)] given the regime. Throws
// ImpossibleOutcome when the action has probability zero.
double log_update_factor(Regime regime, Label action, double reveal_prob,
                         const UrnParams& params);

// E_1[(R_t / R_{t-1})^(-lam) | regime], closed form.
double conditional_moment(Regime regime, double reveal_prob, double lam,
                          const UrnParams& params);

// Same quantity summed directly over the two outcomes; used as a cross-check.
double conditional_moment_direct(Regime regime, double reveal_prob, double lam,
                                 const UrnParams& params);

}  // namespace cascades
