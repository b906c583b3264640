#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "cascades/error.hpp"
#include "cascades/format.hpp"
#include "cascades/oracle.hpp"

namespace cascades::cli {

using nlohmann::json;

namespace {

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

template <class T>
T get_field(const json& obj, const char* key, T fallback) {
  const auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return fallback;
  try {
    return it->get<T>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("config field '") + key + "': " + e.what());
  }
}

json rate_fit_json(const RateFit& fit) {
  return {{"window", {fit.window.first, fit.window.last}},
          {"points", fit.points},
          {"tail_max_tEt", number_or_null(fit.tail_max_tEt)},
          {"loglog_slope", number_or_null(fit.loglog_slope)},
          {"loglog_constant", number_or_null(fit.loglog_constant)},
          {"reference_kappa", number_or_null(fit.reference_kappa)}};
}

// Default fit window: the last decade of the run.
std::optional<RateFit> default_fit(const std::vector<double>& errors, double kappa) {
  const auto t_max = static_cast<std::int64_t>(errors.size());
  const Window window{std::max<std::int64_t>(1, t_max / 10), t_max};
  try {
    return fit_rate(std::span<const double>(errors), window, kappa);
  } catch (const Error&) {
    return std::nullopt;
  }
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) continue;
    double v = 0.0;
    if (!parse_double(item, v)) throw Error(ErrorCode::ParseError, "bad number '" + item + "'");
    values.push_back(v);
  }
  return values;
}

int write_text(const std::string& path, const std::string& text, std::ostream& out,
               std::ostream& err) {
  if (path.empty()) {
    out << text;
    return kOk;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) {
    err << "error: cannot write '" << path << "'\n";
    return kUsage;
  }
  file << text;
  return kOk;
}

int exit_code_for(const Error& e) {
  return e.code() == ErrorCode::ResourceLimit ? kResourceLimit : kUsage;
}

}  // namespace

const char* to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Exact: return "exact";
    case RunMode::Oracle: return "oracle";
    case RunMode::MonteCarlo: return "mc";
  }
  return "exact";
}

RunMode parse_mode(const std::string& text) {
  if (text == "exact") return RunMode::Exact;
  if (text == "oracle") return RunMode::Oracle;
  if (text == "mc") return RunMode::MonteCarlo;
  throw Error(ErrorCode::ParseError, "unknown mode '" + text + "' (exact | oracle | mc)");
}

json to_json(const RunConfig& c) {
  return {{"a", c.a},
          {"b", c.b},
          {"schedule", c.schedule},
          {"t_max", c.t_max},
          {"mode", to_string(c.mode)},
          {"trials", c.trials},
          {"seed", c.seed ? json(*c.seed) : json(nullptr)},
          {"workers", c.workers},
          {"stratified", c.stratified},
          {"merge_tol", c.merge_tol},
          {"prune_floor", c.prune_floor},
          {"max_states", c.max_states},
          {"rational", c.rational},
          {"out", c.out},
          {"summary", c.summary}};
}

RunConfig config_from_json(const json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  const json& obj = doc.contains("config") ? doc.at("config") : doc;
  if (!obj.is_object()) throw Error(ErrorCode::ParseError, "config must be a JSON object");
  RunConfig c;
  c.a = get_field(obj, "a", c.a);
  c.b = get_field(obj, "b", c.b);
  c.schedule = get_field(obj, "schedule", c.schedule);
  c.t_max = get_field(obj, "t_max", c.t_max);
  c.mode = parse_mode(get_field<std::string>(obj, "mode", to_string(c.mode)));
  c.trials = get_field(obj, "trials", c.trials);
  if (obj.contains("seed") && !obj.at("seed").is_null()) {
    c.seed = get_field<std::uint64_t>(obj, "seed", 0);
  }
  c.workers = get_field(obj, "workers", c.workers);
  c.stratified = get_field(obj, "stratified", c.stratified);
  c.merge_tol = get_field(obj, "merge_tol", c.merge_tol);
  c.prune_floor = get_field(obj, "prune_floor", c.prune_floor);
  c.max_states = get_field(obj, "max_states", c.max_states);
  c.rational = get_field(obj, "rational", c.rational);
  c.out = get_field(obj, "out", c.out);
  c.summary = get_field(obj, "summary", c.summary);
  return c;
}

void write_csv(std::ostream& os, const ErrorSeries& series) {
  os << kExactCsvHeader << '\n';
  for (const auto& r : series.rows) {
    os << r.t << ',' << format_double(r.p_t) << ',' << format_double(r.map_error) << ','
       << format_double(r.error) << ',' << format_double(r.t_error) << ','
       << format_double(r.cumulative_errors) << ',' << format_double(r.prob_cascade_down) << ','
       << format_double(r.prob_social_or_down) << ',' << format_double(r.martingale_residual)
       << ',' << format_double(r.pruned_mass) << '\n';
  }
}

void write_csv(std::ostream& os, const ErrorEstimate& estimate, const Schedule& schedule) {
  os << kMonteCarloCsvHeader << '\n';
  double cumulative = 0.0;
  for (std::int64_t t = 1; t <= estimate.t_max(); ++t) {
    const double mean = estimate.mean(t);
    cumulative += mean;
    os << t << ',' << format_double(schedule.evaluate(t)) << ',' << format_double(mean) << ','
       << format_double(estimate.stderr_of_mean(t)) << ','
       << format_double(static_cast<double>(t) * mean) << ',' << format_double(cumulative) << '\n';
  }
}

RunOutcome execute_run(const RunConfig& config) {
  RunOutcome outcome;
  const auto start = std::chrono::steady_clock::now();
  try {
    if (config.t_max < 1) throw Error(ErrorCode::DomainError, "t_max must be >= 1");
    const UrnParams params = validate_params(config.a, config.b);
    const Schedule schedule = parse_schedule(config.schedule, params);
    std::ostringstream csv;
    json states = nullptr;

    if (config.mode == RunMode::MonteCarlo) {
      if (!config.seed) throw Error(ErrorCode::DomainError, "mc mode requires --seed");
      if (config.rational) throw Error(ErrorCode::DomainError, "--rational applies to exact/oracle modes");
      const ErrorEstimate est =
          estimate_errors(params, schedule, config.t_max, config.trials, *config.seed,
                          config.workers,
                          config.stratified ? ThetaSampling::Stratified : ThetaSampling::PerTrial);
      write_csv(csv, est, schedule);
      for (std::int64_t t = 1; t <= est.t_max(); ++t) outcome.errors.push_back(est.mean(t));
    } else {
      ErrorSeries series;
      if (config.mode == RunMode::Oracle) {
        series = config.rational ? to_float(enumerate_oracle_exact(params, schedule, config.t_max))
                                 : enumerate_oracle(params, schedule, config.t_max);
      } else if (config.rational) {
        series = to_float(error_series_exact(params, schedule, config.t_max, config.max_states));
      } else {
        EngineOptions opts;
        opts.merge_tol = config.merge_tol;
        opts.prune_floor = config.prune_floor;
        opts.max_states = config.max_states;
        series = error_series(params, schedule, config.t_max, opts);
      }
      write_csv(csv, series);
      for (const auto& r : series.rows) outcome.errors.push_back(r.error);
      states = {{"peak", series.peak_states}, {"final", series.final_states}};
    }

    double cumulative = 0.0;
    for (double e : outcome.errors) cumulative += e;
    const auto fit = default_fit(outcome.errors, kappa_star(params));
    const double runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    outcome.csv = csv.str();
    outcome.summary = {{"config", to_json(config)},
                       {"kappa_star", kappa_star(params)},
                       {"NE_t_max", cumulative},
                       {"rate_fit", fit ? rate_fit_json(*fit) : json(nullptr)},
                       {"runtime_seconds", runtime},
                       {"states", states}};
  } catch (const Error& e) {
    outcome.exit_code = exit_code_for(e);
    outcome.message = e.what();
  }
  return outcome;
}

int cmd_constants(double a, double b, std::ostream& out, std::ostream& err) {
  try {
    const UrnParams params = validate_params(a, b);
    const double kappa = kappa_star(params);
    const double lam = lambda_star(params);
    const double f = f_lambda(params, lam);
    const json record = {{"a", a},
                         {"b", b},
                         {"kappa_star", kappa},
                         {"lambda_star", lam},
                         {"f_at_lambda_star", f},
                         {"identity_residual", std::abs(f - params.minority_prob() / kappa)}};
    out << record.dump(2) << '\n';
    return kOk;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
}

int cmd_run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  const RunOutcome outcome = execute_run(config);
  if (outcome.exit_code != kOk) {
    err << "error: " << outcome.message << '\n';
    if (outcome.exit_code == kResourceLimit) {
      err << "hint: raise --merge-tol (e.g. 1e-4) or --prune-floor for long horizons\n";
    }
    return outcome.exit_code;
  }
  if (int rc = write_text(config.out, outcome.csv, out, err); rc != kOk) return rc;
  if (!config.summary.empty()) {
    return write_text(config.summary, outcome.summary.dump(2) + "\n", out, err);
  }
  return kOk;
}

int cmd_verify(const VerifyGrids& grids, std::ostream& out, std::ostream& err) {
  DiagnosticsReport report;
  try {
    report = verify_identities(grids);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  json checks = json::array();
  for (const auto& c : report.checks) {
    checks.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"residual", number_or_null(c.residual)},
                      {"tolerance", c.tolerance},
                      {"detail", c.detail}});
    if (!c.passed) err << "FAILED " << c.name << " residual=" << c.residual << " " << c.detail << '\n';
  }
  const json doc = {{"passed", report.all_passed()},
                    {"checks_run", report.checks.size()},
                    {"failures", report.failures()},
                    {"checks", checks}};
  out << doc.dump(2) << '\n';
  return report.all_passed() ? kOk : kVerifyFailed;
}

int cmd_sweep(const SweepRequest& request, std::ostream& out, std::ostream& err) {
  static const std::vector<std::string> kParams{"epsilon", "c", "alpha", "a_over_b"};
  if (std::find(kParams.begin(), kParams.end(), request.parameter) == kParams.end()) {
    err << "error: sweep parameter must be one of epsilon, c, alpha, a_over_b\n";
    return kUsage;
  }
  if (request.values.empty()) {
    err << "error: sweep needs at least one value\n";
    return kUsage;
  }
  std::error_code ec;
  std::filesystem::create_directories(request.out_dir, ec);
  if (ec) {
    err << "error: cannot create '" << request.out_dir << "': " << ec.message() << '\n';
    return kUsage;
  }

  // Pull c / alpha off a power template so a sweep over one keeps the other.
  double power_c = 1.0;
  double power_alpha = 1.0;
  if (request.base.schedule.rfind("power:", 0) == 0) {
    try {
      const auto sched = parse_schedule(request.base.schedule, validate_params(2.0, 1.0));
      const auto& power = std::get<Schedule::Power>(sched.family());
      power_c = power.c;
      power_alpha = power.alpha;
    } catch (const Error& e) {
      err << "error: " << e.what() << '\n';
      return kUsage;
    }
  }

  json results = json::array();
  int first_failure = kOk;
  for (double value : request.values) {
    RunConfig config = request.base;
    config.summary.clear();
    if (request.parameter == "epsilon") {
      config.schedule = "optimal:eps=" + format_double(value);
    } else if (request.parameter == "c") {
      config.schedule = "power:c=" + format_double(value) + ",alpha=" + format_double(power_alpha);
    } else if (request.parameter == "alpha") {
      config.schedule = "power:c=" + format_double(power_c) + ",alpha=" + format_double(value);
    } else {
      config.a = value * config.b;
    }
    const std::string stem = request.parameter + "_" + format_double(value);
    const std::filesystem::path csv_path = std::filesystem::path(request.out_dir) / (stem + ".csv");
    config.out = csv_path.string();

    const RunOutcome outcome = execute_run(config);
    json item = {{"value", value}, {"config", to_json(config)}, {"exit_code", outcome.exit_code}};
    if (outcome.exit_code == kOk) {
      write_text(config.out, outcome.csv, out, err);
      const auto& fit = outcome.summary.at("rate_fit");
      double tail = 0.0;
      for (std::size_t k = 0; k < outcome.errors.size(); ++k) {
        tail = std::max(tail, static_cast<double>(k + 1) * outcome.errors[k]);
      }
      item["csv"] = config.out;
      item["tail_max_tEt"] = fit.is_null() ? json(tail) : fit.at("tail_max_tEt");
      item["NE_t_max"] = outcome.summary.at("NE_t_max");
      item["rate_fit"] = fit;
    } else {
      item["error"] = outcome.message;
      err << "error: " << request.parameter << "=" << value << ": " << outcome.message << '\n';
      if (first_failure == kOk) first_failure = outcome.exit_code;
    }
    results.push_back(item);
  }

  const json aggregate = {{"parameter", request.parameter}, {"results", results}};
  const auto agg_path = std::filesystem::path(request.out_dir) / "sweep.json";
  if (int rc = write_text(agg_path.string(), aggregate.dump(2) + "\n", out, err); rc != kOk) return rc;
  out << agg_path.string() << '\n';
  return first_failure;
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Simulate and exactly analyze sequential social learning with revealers"};
  app.require_subcommand(1);

  double const_a = 0.0;
  double const_b = 0.0;
  auto* constants = app.add_subcommand("constants", "Print kappa*, lambda*, f(lambda*) and the identity residual");
  constants->add_option("--a", const_a, "majority weight")->required();
  constants->add_option("--b", const_b, "minority weight")->required();

  RunConfig config;
  std::string mode_text = "exact";
  std::string config_path;
  std::uint64_t seed = 0;
  auto add_run_options = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "JSON config or run summary to start from");
    cmd->add_option("--a", config.a, "majority weight");
    cmd->add_option("--b", config.b, "minority weight");
    cmd->add_option("--schedule", config.schedule,
                    "optimal[:eps=E] | power:c=C,alpha=A | const:p=P | zero | file:<path>");
    cmd->add_option("--t-max", config.t_max, "horizon");
    cmd->add_option("--mode", mode_text, "exact | oracle | mc");
    cmd->add_option("--trials", config.trials, "Monte Carlo trials");
    cmd->add_option("--seed", seed, "Monte Carlo master seed (required in mc mode)");
    cmd->add_option("--workers", config.workers, "Monte Carlo worker threads");
    cmd->add_flag("--stratified", config.stratified, "half the trials per state of the world");
    cmd->add_option("--merge-tol", config.merge_tol, "log-ratio merge tolerance");
    cmd->add_option("--prune-floor", config.prune_floor, "mass below which states are pruned");
    cmd->add_option("--max-states", config.max_states, "state-count cap");
    cmd->add_flag("--rational", config.rational, "exact rational arithmetic");
    cmd->add_option("--out", config.out, "CSV output path (default stdout)");
    cmd->add_option("--summary", config.summary, "JSON summary path");
  };
  auto* run = app.add_subcommand("run", "Compute one error series as CSV");
  add_run_options(run);

  std::string ratios, lambdas, probs;
  std::int64_t horizon = VerifyGrids{}.horizon;
  auto* verify = app.add_subcommand("verify", "Run the identity and invariant diagnostics");
  verify->add_option("--ratios", ratios, "comma-separated a/b grid");
  verify->add_option("--lambdas", lambdas, "comma-separated lambda grid");
  verify->add_option("--ps", probs, "comma-separated revealing-probability grid");
  verify->add_option("--horizon", horizon, "exact-engine horizon");

  SweepRequest sweep_req;
  std::string sweep_values;
  auto* sweep = app.add_subcommand("sweep", "Run one series per parameter value");
  add_run_options(sweep);
  sweep->add_option("--param", sweep_req.parameter, "epsilon | c | alpha | a_over_b")->required();
  sweep->add_option("--values", sweep_values, "comma-separated values")->required();
  sweep->add_option("--out-dir", sweep_req.out_dir, "directory for CSVs and sweep.json")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kOk : kUsage;
  }

  auto resolve_config = [&](CLI::App* cmd) -> RunConfig {
    RunConfig resolved = config;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw Error(ErrorCode::ParseError, "cannot open config '" + config_path + "'");
      json doc;
      try {
        in >> doc;
      } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("config: ") + e.what());
      }
      resolved = config_from_json(doc);
      // Flags given on the command line override the file.
      const RunConfig& flags = config;
      auto given = [&](const char* name) { return cmd->get_option(name)->count() > 0; };
      if (given("--a")) resolved.a = flags.a;
      if (given("--b")) resolved.b = flags.b;
      if (given("--schedule")) resolved.schedule = flags.schedule;
      if (given("--t-max")) resolved.t_max = flags.t_max;
      if (given("--trials")) resolved.trials = flags.trials;
      if (given("--workers")) resolved.workers = flags.workers;
      if (given("--stratified")) resolved.stratified = flags.stratified;
      if (given("--merge-tol")) resolved.merge_tol = flags.merge_tol;
      if (given("--prune-floor")) resolved.prune_floor = flags.prune_floor;
      if (given("--max-states")) resolved.max_states = flags.max_states;
      if (given("--rational")) resolved.rational = flags.rational;
      if (given("--out")) resolved.out = flags.out;
      if (given("--summary")) resolved.summary = flags.summary;
      if (given("--mode")) resolved.mode = parse_mode(mode_text);
      if (given("--seed")) resolved.seed = seed;
    } else {
      resolved.mode = parse_mode(mode_text);
      if (cmd->get_option("--seed")->count() > 0) resolved.seed = seed;
    }
    return resolved;
  };

  try {
    if (*constants) return cmd_constants(const_a, const_b, out, err);
    if (*run) return cmd_run(resolve_config(run), out, err);
    if (*verify) {
      VerifyGrids grids;
      if (verify->get_option("--ratios")->count() > 0) grids.ratios = parse_list(ratios);
      if (verify->get_option("--lambdas")->count() > 0) grids.lambdas = parse_list(lambdas);
      if (verify->get_option("--ps")->count() > 0) grids.reveal_probs = parse_list(probs);
      grids.horizon = horizon;
      if (grids.horizon < 3) throw Error(ErrorCode::DomainError, "--horizon must be >= 3");
      return cmd_verify(grids, out, err);
    }
    if (*sweep) {
      sweep_req.base = resolve_config(sweep);
      sweep_req.values = parse_list(sweep_values);
      return cmd_sweep(sweep_req, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e);
  }
  return kUsage;
}

}  // namespace cascades::cli
