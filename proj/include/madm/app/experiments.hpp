#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "madm/config.hpp"
#include "madm/datasets.hpp"
#include "madm/diagnostics.hpp"
#include "madm/sampler.hpp"

namespace madm::app {

using json = nlohmann::json;

// Every corrector arm name accepted by `corrector.kind` and --corrector.
const std::vector<std::string>& known_arms();
// Position in known_arms(); keys the random stream of an arm so results do
// not depend on which other arms run alongside it.
std::size_t arm_index(const std::string& arm);

NoiseSchedule build_schedule(const Config& cfg);
// Training cloud of a dataset target; empty for analytic targets.
std::optional<Dataset2D> build_dataset(const Config& cfg);
// Diffused target for predictor–corrector runs.
ScoreModelPtr build_pc_target(const Config& cfg, const NoiseSchedule& schedule);
// Time-invariant target for stationary corrector chains.
ScoreModelPtr build_stationary_target(const Config& cfg);
CorrectorSpec build_corrector(const Config& cfg, const std::string& arm);
std::vector<std::string> corrector_arms(const Config& cfg);
RunConfig build_run(const Config& cfg, const std::string& arm);

// Header and rows of the per-level diagnostics table.
std::vector<std::string> level_header();
std::vector<std::vector<double>> level_rows(const std::vector<LevelStats>& levels);

struct PcArmResult {
  std::string arm;
  RunReport report;
  std::optional<ContainmentResult> containment;
};

// One predictor–corrector run per arm; containment against a fresh draw of
// the dataset when the target is a 2D dataset.
std::vector<PcArmResult> run_pc_arms(const Config& cfg);

struct StationaryArmResult {
  std::string arm;
  std::size_t steps = 0;
  BatchMeans variance;
  double mean = 0.0;
  LevelStats stats;
  std::vector<double> thinned;
  double wall_seconds = 0.0;
};

std::vector<StationaryArmResult> run_stationary_arms(const Config& cfg);
// h / (1 - (1 - h / (2 v))^2): stationary variance of ULA on N(m, v).
double ula_gaussian_variance(double h, double v);

struct QuadOrderRow {
  std::string rule;
  double h = 0.0;
  double mean_error = 0.0;
};

struct QuadOrderResult {
  std::vector<QuadOrderRow> rows;
  std::vector<std::pair<std::string, OrderFit>> fits;
};

// Mean |estimate - log r| over ULA proposals from states drawn from the
// quartic target itself, for h = 2^-k_min ... 2^-k_max.
QuadOrderResult run_quad_order(const Config& cfg);

struct EmpiricalScalingRow {
  EmpiricalScalingPoint point;
  std::string status;  // "ok" or the failure message
};

struct ScalingResult {
  ScalingCurve curve;
  std::vector<EmpiricalScalingRow> empirical;
};

ScalingResult run_scaling(const Config& cfg);

/// Runs the experiment selected by run.mode and writes its files under `out`.
/// Returns the report.json document.
json run_experiment(const Config& cfg, const std::filesystem::path& out);

// Version string baked in at build time.
std::string version();

}  // namespace madm::app
