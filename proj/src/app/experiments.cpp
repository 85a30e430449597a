#include "madm/app/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "madm/diagnostics.hpp"
#include "madm/error.hpp"
#include "madm/io.hpp"

#ifndef MADM_VERSION
#define MADM_VERSION "unknown"
#endif

namespace madm::app {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::size_t as_size(const Config& cfg, const std::string& key) { return static_cast<std::size_t>(cfg.get_u64(key)); }

Vector constant_vector(const Config& cfg) {
  const auto dim = static_cast<Index>(cfg.get_u64("target.dim"));
  if (dim < 1) throw ConfigError("target.dim must be at least 1");
  return Vector::Constant(dim, cfg.get_double("target.mean"));
}

json level_json(const LevelStats& s) {
  return {{"t", s.t},
          {"h", s.h},
          {"proposals", s.proposals},
          {"accepted", s.accepted},
          {"acceptance", s.acceptance_rate()},
          {"mean_rounds", s.mean_rounds()},
          {"mean_queries", s.mean_queries()},
          {"fallbacks", s.fallbacks},
          {"esjd", s.esjd()}};
}

std::filesystem::path arm_dir(const std::filesystem::path& out, const std::string& arm, std::size_t arms) {
  return arms > 1 ? out / arm : out;
}

json config_echo(const Config& cfg) {
  json entries = json::object();
  for (const auto& [k, v] : cfg.entries()) entries[k] = v;
  return entries;
}

json pc_experiment(const Config& cfg, const std::filesystem::path& out) {
  const auto results = run_pc_arms(cfg);
  json arms = json::array();
  std::uint64_t total = 0;
  std::vector<std::vector<std::string>> summary;
  if (const auto data = build_dataset(cfg)) {
    const auto reference = generate_dataset(data->name, as_size(cfg, "metrics.reference_size"),
                                            cfg.get_u64("metrics.reference_seed"));
    write_samples_csv(out / "reference.csv", reference.points);
  }
  for (const auto& r : results) {
    const auto dir = arm_dir(out, r.arm, results.size());
    write_samples_csv(dir / "samples.csv", r.report.samples);
    write_csv(dir / "diagnostics.csv", level_header(), level_rows(r.report.levels));
    json levels = json::array();
    for (const auto& s : r.report.levels) levels.push_back(level_json(s));
    json arm = {{"arm", r.arm},
                {"samples", r.report.samples.cols()},
                {"predictor_queries", r.report.predictor_queries},
                {"corrector_queries", r.report.corrector_queries},
                {"total_queries", r.report.total_queries()},
                {"wall_seconds", r.report.wall_seconds},
                {"levels", levels}};
    std::vector<std::string> row = {r.arm, std::to_string(r.report.total_queries())};
    if (r.containment) {
      arm["containment_quantile"] = cfg.get_double("metrics.quantile");
      arm["containment_distance"] = r.containment->quantile_distance;
      arm["mean_distance"] = r.containment->mean_distance;
      row.push_back(format_double(r.containment->quantile_distance));
      row.push_back(format_double(r.containment->mean_distance));
    } else {
      row.insert(row.end(), {"", ""});
    }
    summary.push_back(row);
    total += r.report.total_queries();
    arms.push_back(arm);
  }
  write_csv_cells(out / "summary.csv", {"arm", "total_queries", "containment_distance", "mean_distance"}, summary);
  return {{"arms", arms}, {"total_queries", total}};
}

json stationary_experiment(const Config& cfg, const std::filesystem::path& out) {
  const auto results = run_stationary_arms(cfg);
  const double h = cfg.get_double("stationary.h");
  json arms = json::array();
  std::uint64_t total = 0;
  std::vector<std::vector<std::string>> summary;
  const std::vector<std::string> header = {"steps",        "h",           "variance", "variance_se", "mean", "acceptance",
                                           "mean_rounds", "mean_queries", "esjd"};
  for (const auto& r : results) {
    const auto dir = arm_dir(out, r.arm, results.size());
    Matrix thinned(1, static_cast<Index>(r.thinned.size()));
    for (std::size_t i = 0; i < r.thinned.size(); ++i) thinned(0, static_cast<Index>(i)) = r.thinned[i];
    write_samples_csv(dir / "samples.csv", thinned);
    const std::vector<double> row = {static_cast<double>(r.steps), h, r.variance.mean, r.variance.standard_error,
                                     r.mean, r.stats.acceptance_rate(), r.stats.mean_rounds(),
                                     r.stats.mean_queries(), r.stats.esjd()};
    write_csv(dir / "diagnostics.csv", header, {row});
    std::vector<std::string> cells = {r.arm};
    for (double v : row) cells.push_back(format_double(v));
    summary.push_back(cells);
    total += r.stats.queries;
    arms.push_back({{"arm", r.arm},
                    {"steps", r.steps},
                    {"variance", r.variance.mean},
                    {"variance_se", r.variance.standard_error},
                    {"mean", r.mean},
                    {"acceptance", r.stats.acceptance_rate()},
                    {"mean_rounds", r.stats.mean_rounds()},
                    {"mean_queries", r.stats.mean_queries()},
                    {"total_queries", r.stats.queries},
                    {"wall_seconds", r.wall_seconds}});
  }
  std::vector<std::string> summary_header = {"arm"};
  summary_header.insert(summary_header.end(), header.begin(), header.end());
  write_csv_cells(out / "summary.csv", summary_header, summary);
  json doc = {{"arms", arms}, {"total_queries", total}};
  if (cfg.get("target.kind") == "gaussian") doc["ula_theory_variance"] = ula_gaussian_variance(h, cfg.get_double("target.variance"));
  return doc;
}

json quad_experiment(const Config& cfg, const std::filesystem::path& out) {
  const auto result = run_quad_order(cfg);
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : result.rows) rows.push_back({r.rule, format_double(r.h), format_double(r.mean_error)});
  write_csv_cells(out / "quad_order.csv", {"rule", "h", "mean_error"}, rows);
  std::vector<std::vector<std::string>> fits;
  json fit_json = json::object();
  for (const auto& [rule, fit] : result.fits) {
    fits.push_back({rule, format_double(fit.slope), format_double(fit.intercept), format_double(fit.residual_rms)});
    fit_json[rule] = {{"slope", fit.slope}, {"intercept", fit.intercept}, {"residual_rms", fit.residual_rms}};
  }
  write_csv_cells(out / "quad_fits.csv", {"rule", "slope", "intercept", "residual_rms"}, fits);
  // Two endpoint scores plus the interior nodes, per proposal and rule.
  std::uint64_t total = 0;
  const auto proposals = cfg.get_u64("quad.proposals");
  for (const auto& r : result.rows) total += proposals * (2 + quadrature_rule_from_string(r.rule).interior_nodes());
  return {{"fits", fit_json}, {"total_queries", total}};
}

json scaling_experiment(const Config& cfg, const std::filesystem::path& out) {
  const auto result = run_scaling(cfg);
  std::vector<std::vector<double>> curve;
  for (const auto& p : result.curve.points) curve.push_back({p.ell, p.acceptance, p.efficiency});
  write_csv(out / "scaling_curve.csv", {"ell", "acceptance", "efficiency"}, curve);
  std::vector<std::vector<std::string>> rows;
  json empirical = json::array();
  std::uint64_t total = 0;
  for (const auto& row : result.empirical) {
    const auto& p = row.point;
    rows.push_back({std::to_string(p.dim), format_double(p.ell), format_double(p.h), std::to_string(p.proposals),
                    format_double(p.acceptance), format_double(p.acceptance_se),
                    format_double(p.mean_barker_probability), format_double(p.esjd), format_double(p.mean_rounds),
                    format_double(p.mean_queries), row.status});
    empirical.push_back({{"dim", p.dim},
                         {"ell", p.ell},
                         {"h", p.h},
                         {"proposals", p.proposals},
                         {"acceptance", p.acceptance},
                         {"acceptance_se", p.acceptance_se},
                         {"mean_barker_probability", p.mean_barker_probability},
                         {"status", row.status}});
    total += static_cast<std::uint64_t>(std::llround(p.mean_queries * static_cast<double>(p.proposals)));
  }
  write_csv_cells(out / "scaling_empirical.csv",
                  {"dim", "ell", "h", "proposals", "acceptance", "acceptance_se", "mean_barker_probability", "esjd",
                   "mean_rounds", "mean_queries", "status"},
                  rows);
  return {{"optimal_ell", result.curve.best.ell},
          {"optimal_acceptance", result.curve.best.acceptance},
          {"optimal_efficiency", result.curve.best.efficiency},
          {"empirical", empirical},
          {"total_queries", total}};
}

// Exact draw from p(x) ~ exp(-x^4 / (4a) - eps cos x) by rejection from
// N(0, 1); the log-ratio to the envelope is at most a / 4 + |eps|.
double quartic_draw(double a, double eps, Rng& rng) {
  for (;;) {
    const double x = rng.normal();
    const double log_accept = -x * x * x * x / (4.0 * a) + 0.5 * x * x - eps * std::cos(x) - a / 4.0 - std::abs(eps);
    if (std::log(rng.uniform()) <= log_accept) return x;
  }
}

}  // namespace

const std::vector<std::string>& known_arms() {
  static const std::vector<std::string> arms = {"none",      "ula",    "two-coin",  "trapezoid",    "simpson13",
                                                "simpson38", "hybrid", "oracle-mh", "oracle-barker"};
  return arms;
}

std::size_t arm_index(const std::string& arm) {
  const auto& arms = known_arms();
  const auto it = std::find(arms.begin(), arms.end(), arm);
  if (it == arms.end()) {
    std::string names;
    for (const auto& a : arms) names += (names.empty() ? "" : ", ") + a;
    throw ConfigError("unknown corrector '" + arm + "' (expected one of " + names + ")");
  }
  return static_cast<std::size_t>(it - arms.begin());
}

NoiseSchedule build_schedule(const Config& cfg) {
  switch (schedule_kind_from_string(cfg.get("schedule.kind"))) {
    case ScheduleKind::VpDiscrete: {
      const auto T = as_size(cfg, "schedule.T");
      if (T < 1) throw ConfigError("schedule.T must be at least 1");
      return NoiseSchedule::vp_discrete(T, cfg.get_double("schedule.beta_min"), cfg.get_double("schedule.beta_max"));
    }
    case ScheduleKind::VpContinuous:
      return NoiseSchedule::vp_continuous(cfg.get_double("schedule.beta_min"), cfg.get_double("schedule.beta_max"));
    case ScheduleKind::Edm:
      return NoiseSchedule::edm();
  }
  throw ConfigError("unsupported schedule");
}

std::optional<Dataset2D> build_dataset(const Config& cfg) {
  if (cfg.get("target.kind") != "dataset") return std::nullopt;
  return generate_dataset(cfg.get("target.dataset"), as_size(cfg, "target.size"), cfg.get_u64("target.data_seed"));
}

ScoreModelPtr build_pc_target(const Config& cfg, const NoiseSchedule& schedule) {
  const auto& kind = cfg.get("target.kind");
  if (kind == "dataset") return diffused_empirical_model(*build_dataset(cfg), schedule);
  if (kind == "gaussian") return diffused_gaussian_model(constant_vector(cfg), cfg.get_double("target.variance"), schedule);
  if (kind == "quartic") throw ConfigError("the quartic target has no diffused form; use run.mode = stationary");
  throw ConfigError("unknown target.kind '" + kind + "' (expected dataset, gaussian or quartic)");
}

ScoreModelPtr build_stationary_target(const Config& cfg) {
  const auto& kind = cfg.get("target.kind");
  if (kind == "gaussian") return gaussian_model(constant_vector(cfg), cfg.get_double("target.variance"));
  if (kind == "quartic") return quartic_model(cfg.get_double("target.scale"), cfg.get_double("target.perturbation"));
  if (kind == "dataset") throw ConfigError("stationary mode needs an analytic target (gaussian or quartic)");
  throw ConfigError("unknown target.kind '" + kind + "' (expected dataset, gaussian or quartic)");
}

CorrectorSpec build_corrector(const Config& cfg, const std::string& arm) {
  arm_index(arm);
  CorrectorSpec spec;
  spec.steps = as_size(cfg, "corrector.steps");
  spec.step_rule = step_rule_from_string(cfg.get("corrector.step_rule"));
  spec.c = cfg.get_double("corrector.c");
  spec.rule = quadrature_rule_from_string(cfg.get("corrector.rule"));
  spec.hybrid_rounds = cfg.get_u64("corrector.hybrid_rounds");
  spec.bound.strategy = bound_strategy_from_string(cfg.get("corrector.bound"));
  if (!cfg.get("corrector.bound_value").empty()) spec.bound.value = cfg.get_double("corrector.bound_value");
  spec.two_coin.max_rounds = cfg.get_u64("corrector.max_rounds");
  spec.two_coin.lazy_product = cfg.get_bool("corrector.lazy_product");
  if (arm == "trapezoid" || arm == "simpson13" || arm == "simpson38") {
    spec.kind = CorrectorKind::Quadrature;
    spec.rule = quadrature_rule_from_string(arm);
  } else {
    spec.kind = corrector_kind_from_string(arm);
  }
  if (spec.kind == CorrectorKind::None) spec.steps = 0;
  return spec;
}

std::vector<std::string> corrector_arms(const Config& cfg) {
  auto arms = cfg.get_list("corrector.kind");
  if (arms.empty()) throw ConfigError("corrector.kind lists no corrector");
  for (const auto& a : arms) arm_index(a);
  return arms;
}

RunConfig build_run(const Config& cfg, const std::string& arm) {
  RunConfig run;
  run.schedule = build_schedule(cfg);
  run.target = build_pc_target(cfg, run.schedule);
  run.predictor.kind = predictor_kind_from_string(cfg.get("predictor.kind"));
  run.predictor.steps = as_size(cfg, "predictor.steps");
  run.corrector = build_corrector(cfg, arm);
  run.chains = as_size(cfg, "run.chains");
  run.seed = cfg.get_u64("run.seed");
  run.threads = std::max<std::size_t>(1, as_size(cfg, "run.threads"));
  return run;
}

std::vector<std::string> level_header() {
  return {"t", "h", "proposals", "accepted", "acceptance", "mean_rounds", "mean_queries", "fallbacks", "esjd"};
}

std::vector<std::vector<double>> level_rows(const std::vector<LevelStats>& levels) {
  std::vector<std::vector<double>> rows;
  for (const auto& s : levels) {
    rows.push_back({s.t, s.h, static_cast<double>(s.proposals), static_cast<double>(s.accepted), s.acceptance_rate(),
                    s.mean_rounds(), s.mean_queries(), static_cast<double>(s.fallbacks), s.esjd()});
  }
  return rows;
}

std::vector<PcArmResult> run_pc_arms(const Config& cfg) {
  const auto arms = corrector_arms(cfg);
  std::optional<Matrix> reference;
  if (const auto data = build_dataset(cfg)) {
    reference = generate_dataset(data->name, as_size(cfg, "metrics.reference_size"),
                                 cfg.get_u64("metrics.reference_seed"))
                    .points;
  }
  std::vector<PcArmResult> results;
  for (const auto& arm : arms) {
    PcArmResult r;
    r.arm = arm;
    r.report = run_pc(build_run(cfg, arm));
    if (reference) r.containment = containment_distance(r.report.samples, *reference, cfg.get_double("metrics.quantile"));
    results.push_back(std::move(r));
  }
  return results;
}

double ula_gaussian_variance(double h, double v) {
  const double a = 1.0 - h / (2.0 * v);
  return h / (1.0 - a * a);
}

std::vector<StationaryArmResult> run_stationary_arms(const Config& cfg) {
  const auto model = build_stationary_target(cfg);
  const double h = cfg.get_double("stationary.h");
  const double burn = cfg.get_double("stationary.burn_in_fraction");
  if (!(burn >= 0.0 && burn < 1.0)) throw ConfigError("stationary.burn_in_fraction must lie in [0, 1)");
  const auto thin = std::max<std::size_t>(1, as_size(cfg, "stationary.thin"));
  std::vector<StationaryArmResult> results;
  for (const auto& arm : corrector_arms(cfg)) {
    const auto start = Clock::now();
    auto spec = build_corrector(cfg, arm);
    spec.step_rule = StepRule::Constant;
    spec.c = h;
    StationaryArmResult r;
    r.arm = arm;
    r.steps = as_size(cfg, arm == "two-coin" ? "stationary.two_coin_steps" : "stationary.steps");
    const auto burn_in = static_cast<std::size_t>(burn * static_cast<double>(r.steps));
    ScoreOracle oracle(model);
    Rng rng(cfg.get_u64("run.seed"), arm_index(arm));
    Vector x0 = Vector::Zero(model->dim());
    if (cfg.get("target.kind") == "gaussian") x0 = constant_vector(cfg);
    const auto chain = run_corrector_chain(oracle, spec, 0.0, h, x0, r.steps, burn_in, rng);
    r.variance = stationary_variance(chain.trace, as_size(cfg, "stationary.batches"));
    r.mean = sample_mean(chain.trace);
    r.stats = chain.stats;
    for (std::size_t i = 0; i < chain.trace.size(); i += thin) r.thinned.push_back(chain.trace[i]);
    r.wall_seconds = seconds_since(start);
    results.push_back(std::move(r));
  }
  return results;
}

QuadOrderResult run_quad_order(const Config& cfg) {
  const double scale = cfg.get_double("quad.scale");
  const double eps = cfg.get_double("quad.perturbation");
  if (!(scale > 0.0)) throw ConfigError("quad.scale must be positive");
  const auto model = quartic_model(scale, eps);
  const auto k_min = cfg.get_u64("quad.k_min");
  const auto k_max = cfg.get_u64("quad.k_max");
  if (k_max < k_min) throw ConfigError("quad.k_max must be at least quad.k_min");
  const auto proposals = cfg.get_u64("quad.proposals");
  if (proposals < 1) throw ConfigError("quad.proposals must be positive");
  QuadOrderResult result;
  for (const auto& name : cfg.get_list("quad.rules")) {
    const auto rule = quadrature_rule_from_string(name);
    std::vector<std::pair<double, double>> pairs;
    for (auto k = k_min; k <= k_max; ++k) {
      const double h = std::ldexp(1.0, -static_cast<int>(k));
      ScoreOracle oracle(model);
      Rng rng(cfg.get_u64("run.seed"), k);
      double total = 0.0;
      for (std::uint64_t i = 0; i < proposals; ++i) {
        Vector x(1);
        x(0) = quartic_draw(scale, eps, rng);
        const auto p = ula_propose(x, oracle, 0.0, h, rng);
        const double exact = exact_log_acceptance_ratio(p, oracle) - log_H(p);
        total += std::abs(quadrature_log_ratio(p, oracle, rule) - exact);
      }
      const double mean = total / static_cast<double>(proposals);
      result.rows.push_back({name, h, mean});
      pairs.emplace_back(h, mean);
    }
    result.fits.emplace_back(name, order_fit(pairs));
  }
  return result;
}

ScalingResult run_scaling(const Config& cfg) {
  const double lo = cfg.get_double("scaling.ell_min");
  const double hi = cfg.get_double("scaling.ell_max");
  const auto n = as_size(cfg, "scaling.ell_points");
  if (!(lo > 0.0 && hi > lo) || n < 2) throw ConfigError("scaling grid needs 0 < ell_min < ell_max and ell_points >= 2");
  std::vector<double> grid(n);
  for (std::size_t i = 0; i < n; ++i) grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  ScalingResult result;
  result.curve = optimal_scaling_curve(grid);
  const auto decision = scaling_decision_from_string(cfg.get("scaling.decision"));
  const auto proposals = as_size(cfg, "scaling.proposals");
  for (const double d : cfg.get_double_list("scaling.dims")) {
    if (!(d >= 1.0) || d != std::floor(d)) throw ConfigError("scaling.dims must list positive integers");
    const auto dim = static_cast<std::size_t>(d);
    EmpiricalScalingRow row;
    row.point.dim = dim;
    row.point.ell = result.curve.best.ell;
    row.point.h = result.curve.best.ell * result.curve.best.ell / std::cbrt(d);
    row.status = "ok";
    try {
      row.point = empirical_scaling(dim, result.curve.best.ell, proposals, decision, cfg.get_u64("run.seed") + dim,
                                    cfg.get_u64("scaling.max_rounds"));
    } catch (const NonTerminationError& e) {
      row.status = e.what();
      row.point.acceptance = std::nan("");
      row.point.acceptance_se = std::nan("");
      row.point.mean_barker_probability = std::nan("");
      row.point.esjd = std::nan("");
      row.point.mean_rounds = std::nan("");
      row.point.mean_queries = std::nan("");
    }
    result.empirical.push_back(row);
  }
  return result;
}

json run_experiment(const Config& cfg, const std::filesystem::path& out) {
  const auto start = Clock::now();
  const auto& mode = cfg.get("run.mode");
  json body;
  if (mode == "pc") {
    body = pc_experiment(cfg, out);
  } else if (mode == "stationary") {
    body = stationary_experiment(cfg, out);
  } else if (mode == "quad-order") {
    body = quad_experiment(cfg, out);
  } else if (mode == "scaling") {
    body = scaling_experiment(cfg, out);
  } else {
    throw ConfigError("unknown run.mode '" + mode + "' (expected pc, stationary, scaling or quad-order)");
  }
  json report = {{"seed", cfg.get_u64("run.seed")},
                 {"mode", mode},
                 {"version", version()},
                 {"config", config_echo(cfg)},
                 {"config_text", cfg.to_text()}};
  report.update(body);
  report["wall_seconds"] = seconds_since(start);
  write_text(out / "report.json", report.dump(2) + "\n");
  return report;
}

std::string version() { return MADM_VERSION; }

}  // namespace madm::app
