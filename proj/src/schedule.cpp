#include "cascades/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>

#include "cascades/error.hpp"
#include "cascades/format.hpp"

namespace cascades {

namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

bool in_unit(double x) { return x >= 0.0 && x <= 1.0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// "k1=v1,k2=v2" -> map; rejects unknown keys.
std::map<std::string, double> parse_args(std::string_view args, std::string_view spec,
                                         std::initializer_list<std::string_view> allowed) {
  std::map<std::string, double> out;
  while (!args.empty()) {
    const auto comma = args.find(',');
    const std::string_view item = trim(args.substr(0, comma));
    args = comma == std::string_view::npos ? std::string_view{} : args.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) {
      throw Error(ErrorCode::ParseError, "expected key=value in schedule '" + std::string(spec) + "'");
    }
    const std::string key(trim(item.substr(0, eq)));
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::ParseError, "unknown key '" + key + "' in schedule '" + std::string(spec) + "'");
    }
    double value = 0.0;
    if (!parse_double(trim(item.substr(eq + 1)), value) || !std::isfinite(value)) {
      throw Error(ErrorCode::ParseError, "bad number for '" + key + "' in schedule '" + std::string(spec) + "'");
    }
    out[key] = value;
  }
  return out;
}

double require(const std::map<std::string, double>& args, const std::string& key,
               std::string_view spec) {
  const auto it = args.find(key);
  if (it == args.end()) {
    throw Error(ErrorCode::ParseError, "missing '" + key + "' in schedule '" + std::string(spec) + "'");
  }
  return it->second;
}

}  // namespace

double Schedule::evaluate(std::int64_t t) const {
  if (t < 1) throw Error(ErrorCode::DomainError, "schedule index must be >= 1");
  const double td = static_cast<double>(t);
  return std::visit(
      Overloaded{
          [&](const Optimal& s) { return std::min(s.scale / td, 1.0); },
          [&](const Power& s) {
            if (s.c == 0.0) return 0.0;
            return std::min(s.c / std::pow(td, s.alpha), 1.0);
          },
          [&](const Constant& s) { return s.p; },
          [&](const Zero&) { return 0.0; },
          [&](const Explicit& s) {
            const auto idx = static_cast<std::size_t>(t - 1);
            return idx < s.values.size() ? s.values[idx] : s.tail_value;
          },
      },
      family_);
}

std::string Schedule::to_spec() const {
  return std::visit(
      Overloaded{
          [](const Optimal& s) { return "optimal:eps=" + format_double(s.epsilon); },
          [](const Power& s) {
            return "power:c=" + format_double(s.c) + ",alpha=" + format_double(s.alpha);
          },
          [](const Constant& s) { return "const:p=" + format_double(s.p); },
          [](const Zero&) { return std::string("zero"); },
          [](const Explicit& s) {
            return s.source.empty() ? std::string("explicit") : "file:" + s.source;
          },
      },
      family_);
}

Schedule optimal_schedule(const UrnParams& params, double epsilon) {
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::DomainError, "epsilon must be positive");
  }
  const double scale = (1.0 + epsilon) * (params.ratio() + 1.0) * kappa_star(params);
  return Schedule(Schedule::Optimal{params, epsilon, scale});
}

Schedule power_schedule(double c, double alpha) {
  if (!(c >= 0.0) || !std::isfinite(c) || !std::isfinite(alpha)) {
    throw Error(ErrorCode::DomainError, "power schedule needs finite c >= 0 and alpha");
  }
  return Schedule(Schedule::Power{c, alpha});
}

Schedule constant_schedule(double p) {
  if (!in_unit(p)) throw Error(ErrorCode::DomainError, "constant schedule needs p in [0, 1]");
  return Schedule(Schedule::Constant{p});
}

Schedule zero_schedule() { return Schedule(Schedule::Zero{}); }

Schedule explicit_schedule(std::vector<double> values, double tail_value, std::string source) {
  if (!in_unit(tail_value) || !std::all_of(values.begin(), values.end(), in_unit)) {
    throw Error(ErrorCode::DomainError, "explicit schedule values must lie in [0, 1]");
  }
  return Schedule(Schedule::Explicit{std::move(values), tail_value, std::move(source)});
}

double cumulative_mass(const Schedule& schedule, std::int64_t t) {
  // Neumaier summation.
  double sum = 0.0;
  double carry = 0.0;
  for (std::int64_t i = 1; i <= t; ++i) {
    const double x = schedule.evaluate(i);
    const double next = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - next) + x : (x - next) + sum;
    sum = next;
  }
  return sum + carry;
}

std::optional<std::int64_t> tau(const Schedule& schedule, double s, std::int64_t t_cap) {
  double sum = 0.0;
  double carry = 0.0;
  for (std::int64_t i = 1; i <= t_cap; ++i) {
    const double x = schedule.evaluate(i);
    const double next = sum + x;
    carry += std::abs(sum) >= std::abs(x) ? (sum - next) + x : (x - next) + sum;
    sum = next;
    if (sum + carry >= s) return i;
  }
  return std::nullopt;
}

std::vector<double> read_schedule_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open schedule file '" + path + "'");
  std::vector<double> values;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string_view text = trim(line);
    if (text.empty()) continue;
    double value = 0.0;
    if (!parse_double(text, value) || !in_unit(value)) {
      std::ostringstream msg;
      msg << path << ":" << lineno << ": expected a probability in [0, 1], got '" << text << "'";
      throw Error(ErrorCode::ParseError, msg.str());
    }
    values.push_back(value);
  }
  return values;
}

Schedule parse_schedule(std::string_view spec, const UrnParams& params) {
  const std::string_view text = trim(spec);
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  const std::string_view rest =
      colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);

  if (kind == "file") {
    if (rest.empty()) throw Error(ErrorCode::ParseError, "file schedule needs a path");
    std::string path(rest);
    return explicit_schedule(read_schedule_file(path), 0.0, path);
  }
  if (kind == "zero") {
    if (!rest.empty()) throw Error(ErrorCode::ParseError, "zero schedule takes no arguments");
    return zero_schedule();
  }
  if (kind == "optimal") {
    const auto args = parse_args(rest, spec, {"eps"});
    const auto it = args.find("eps");
    return optimal_schedule(params, it == args.end() ? kDefaultEpsilon : it->second);
  }
  if (kind == "power") {
    const auto args = parse_args(rest, spec, {"c", "alpha"});
    return power_schedule(require(args, "c", spec), require(args, "alpha", spec));
  }
  if (kind == "const") {
    const auto args = parse_args(rest, spec, {"p"});
    return constant_schedule(require(args, "p", spec));
  }
  throw Error(ErrorCode::ParseError, "unknown schedule '" + std::string(spec) + "'");
}

}  // namespace cascades
