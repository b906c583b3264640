#pragma once

// Revealing-probability sequences p_t, t = 1, 2, ...

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "cascades/model.hpp"

namespace cascades {

inline constexpr double kDefaultEpsilon = 0.1;

class Schedule {
 public:
  // p_t = min{scale / t, 1} with scale = (1 + epsilon) (a+b)/b kappa_star.
  struct Optimal {
    UrnParams params;
    double epsilon;
    double scale;
  };
  // p_t = min{c / t^alpha, 1}
  struct Power {
    double c;
    double alpha;
  };
  struct Constant {
    double p;
  };
  struct Zero {};
  // Stored prefix for t = 1..values.size(), then tail_value.
  struct Explicit {
    std::vector<double> values;
    double tail_value = 0.0;
    std::string source;  // file path when loaded from disk, else empty
  };
  using Family = std::variant<Optimal, Power, Constant, Zero, Explicit>;

  explicit Schedule(Family family) : family_(std::move(family)) {}

  // p_t for t >= 1; always in [0, 1].
  double evaluate(std::int64_t t) const;
  double operator()(std::int64_t t) const { return evaluate(t); }

  const Family& family() const { return family_; }

  // Spec string in the CLI grammar; Explicit schedules without a source
  // render as "explicit" and do not parse back.
  std::string to_spec() const;

 private:
  Family family_;
};

// Throws DomainError if epsilon <= 0.
Schedule optimal_schedule(const UrnParams& params, double epsilon = kDefaultEpsilon);
// Throws DomainError if c < 0.
Schedule power_schedule(double c, double alpha);
// Throws DomainError if p is outside [0, 1].
Schedule constant_schedule(double p);
Schedule zero_schedule();
// Throws DomainError if any value or the tail is outside [0, 1].
Schedule explicit_schedule(std::vector<double> values, double tail_value = 0.0,
                           std::string source = {});

// M_t = p_1 + ... + p_t (compensated summation).
double cumulative_mass(const Schedule& schedule, std::int64_t t);

// Smallest t <= t_cap with M_t >= s, or nullopt.
std::optional<std::int64_t> tau(const Schedule& schedule, double s, std::int64_t t_cap);

// Grammar: "optimal[:eps=E]", "power:c=C,alpha=A", "const:p=P", "zero",
// "file:<path>". Throws ParseError (DomainError for out-of-range values).
Schedule parse_schedule(std::string_view spec, const UrnParams& params);

// One decimal per line; blank lines are skipped. Throws ParseError.
std::vector<double> read_schedule_file(const std::string& path);

}  // namespace cascades
