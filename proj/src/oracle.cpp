#include "cascades/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "cascades/error.hpp"

namespace cascades {

namespace {

// Float ties: equal within the same relative slack the DP applies in log space.
int compare(double x, double y) {
  if (std::abs(x - y) <= kBoundaryTol * std::max(std::abs(x), std::abs(y))) return 0;
  return x < y ? -1 : 1;
}

int compare(const mpq_class& x, const mpq_class& y) { return cmp(x, y); }

bool is_zero(double x) { return x == 0.0; }
bool is_zero(const mpq_class& x) { return sgn(x) == 0; }

template <class Num>
class Enumerator {
 public:
  Enumerator(const UrnParams& params, const Schedule& schedule, std::int64_t t_max)
      : t_max_(t_max),
        a_(params.a()),
        b_(params.b()),
        majority_(a_ / (a_ + b_)),
        minority_(b_ / (a_ + b_)),
        half_(Num(1) / Num(2)) {
    const auto n = static_cast<std::size_t>(t_max + 1);
    reveal_.resize(n);
    for (std::int64_t t = 1; t <= t_max; ++t) reveal_[t] = Num(schedule.evaluate(t));
    map_error_.assign(n, Num(0));
    error_.assign(n, Num(0));
    down_.assign(n, Num(0));
    social_or_down_.assign(n, Num(0));
    p2_.assign(n, Num(0));
    histories_.assign(n, 0);
  }

  BasicErrorSeries<Num> run() {
    visit(0, Num(1), Num(1));
    BasicErrorSeries<Num> series;
    Num cumulative(0);
    for (std::int64_t t = 1; t <= t_max_; ++t) {
      BasicErrorRow<Num> row;
      row.t = t;
      row.p_t = reveal_[t];
      row.map_error = map_error_[t];
      row.error = error_[t];
      row.t_error = error_[t] * Num(static_cast<double>(t));
      cumulative += error_[t];
      row.cumulative_errors = cumulative;
      row.prob_cascade_down = down_[t];
      row.prob_social_or_down = social_or_down_[t];
      const Num diff = p2_[t] - Num(1);
      row.martingale_residual = diff < Num(0) ? Num(-diff) : diff;
      row.pruned_mass = Num(0);
      series.rows.push_back(row);
      series.peak_states = std::max<std::size_t>(series.peak_states, histories_[t]);
    }
    series.final_states = histories_[t_max_];
    return series;
  }

 private:
  // like1 / like2: probability of the current action prefix under theta = 1 / 2.
  void visit(std::int64_t depth, const Num& like1, const Num& like2) {
    if (depth >= 1 && !is_zero(like1)) {
      ++histories_[depth];
      if (compare(Num(a_ * like1), Num(b_ * like2)) < 0) down_[depth] += like1;
      if (compare(Num(b_ * like1), Num(a_ * like2)) <= 0) social_or_down_[depth] += like1;
      p2_[depth] += like2;
    }
    if (depth == t_max_) return;

    const std::int64_t t = depth + 1;
    const Num& p = reveal_[t];
    // prob[h][z]: P_h(Z_t = z | prefix), z = 0 for action 1.
    Num prob[2][2] = {{Num(0), Num(0)}, {Num(0), Num(0)}};
    for (int x = 0; x < 2; ++x) {
      const Num& phi1 = x == 0 ? majority_ : minority_;
      const Num& phi2 = x == 0 ? minority_ : majority_;
      const int c = compare(Num(like1 * phi1), Num(like2 * phi2));
      const int guess = c > 0 ? 0 : (c < 0 ? 1 : x);
      const Num revealer_share = p;
      const Num bayesian_share = Num(1) - p;
      prob[0][x] += phi1 * revealer_share;
      prob[1][x] += phi2 * revealer_share;
      prob[0][guess] += phi1 * bayesian_share;
      prob[1][guess] += phi2 * bayesian_share;
      if (guess == 1) map_error_[t] += half_ * like1 * phi1;
      if (guess == 0) map_error_[t] += half_ * like2 * phi2;
    }
    error_[t] += half_ * like1 * prob[0][1] + half_ * like2 * prob[1][0];

    for (int z = 0; z < 2; ++z) {
      const Num next1 = like1 * prob[0][z];
      const Num next2 = like2 * prob[1][z];
      if (is_zero(next1) && is_zero(next2)) continue;
      visit(t, next1, next2);
    }
  }

  std::int64_t t_max_;
  Num a_, b_, majority_, minority_, half_;
  std::vector<Num> reveal_;
  std::vector<Num> map_error_, error_, down_, social_or_down_, p2_;
  std::vector<std::size_t> histories_;
};

void check_horizon(std::int64_t t_max) {
  if (t_max < 1 || t_max > kMaxOracleHorizon) {
    throw Error(ErrorCode::DomainError, "oracle horizon must lie in [1, 24]");
  }
}

}  // namespace

ErrorSeries enumerate_oracle(const UrnParams& params, const Schedule& schedule,
                             std::int64_t t_max) {
  check_horizon(t_max);
  ErrorSeries series = Enumerator<double>(params, schedule, t_max).run();
  series.mode = Arithmetic::Float;
  return series;
}

ExactErrorSeries enumerate_oracle_exact(const UrnParams& params, const Schedule& schedule,
                                        std::int64_t t_max) {
  check_horizon(t_max);
  ExactErrorSeries series = Enumerator<mpq_class>(params, schedule, t_max).run();
  series.mode = Arithmetic::Rational;
  return series;
}

}  // namespace cascades
