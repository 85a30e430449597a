#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "madm/app/experiments.hpp"
#include "madm/app/verify.hpp"
#include "madm/diagnostics.hpp"
#include "madm/error.hpp"
#include "madm/io.hpp"

namespace fs = std::filesystem;
using madm::Config;
using madm::ConfigError;
using nlohmann::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct ConfigFlags {
  std::string config_path;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> threads;
  std::string corrector;
  std::vector<std::string> overrides;
  std::string out = "madm_out";
};

void add_config_flags(CLI::App* cmd, ConfigFlags& f) {
  cmd->add_option("--config", f.config_path, "Config file ([section] key = value)");
  cmd->add_option("--preset", f.preset, "Named preset");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--out", f.out, "Output directory (MADM_OUT overrides)");
  cmd->add_option("--threads", f.threads, "Worker threads; 1 is deterministic");
  cmd->add_option("--corrector", f.corrector,
                  "Corrector arm(s): none, ula, two-coin, trapezoid, simpson13, simpson38, hybrid, oracle-mh, "
                  "oracle-barker");
  cmd->add_option("--set", f.overrides, "Override section.key=value (repeatable)");
}

Config resolve_config(const ConfigFlags& f, const std::string& default_preset = "") {
  const std::string preset = f.preset.empty() ? default_preset : f.preset;
  Config cfg = preset.empty() ? Config() : Config::preset(preset);
  if (!f.config_path.empty()) cfg.merge_file(f.config_path);
  if (f.seed) cfg.set("run.seed", std::to_string(*f.seed));
  if (f.threads) cfg.set("run.threads", std::to_string(*f.threads));
  if (!f.corrector.empty()) cfg.set("corrector.kind", f.corrector);
  for (const auto& o : f.overrides) cfg.apply_override(o);
  return cfg;
}

fs::path output_dir(const ConfigFlags& f) {
  if (const char* env = std::getenv("MADM_OUT"); env && *env) return env;
  return f.out;
}

void summarise(const json& report, const fs::path& out) {
  std::cout << "mode " << report["mode"].get<std::string>() << ", seed " << report["seed"] << ", "
            << report["total_queries"] << " score queries, " << report["wall_seconds"].get<double>() << " s\n";
  if (report.contains("arms")) {
    for (const auto& arm : report["arms"]) {
      std::cout << "  " << arm["arm"].get<std::string>();
      if (arm.contains("containment_distance")) {
        std::cout << ": containment " << arm["containment_distance"].get<double>() << ", mean distance "
                  << arm["mean_distance"].get<double>();
      }
      if (arm.contains("variance")) {
        std::cout << ": variance " << arm["variance"].get<double>() << " (se " << arm["variance_se"].get<double>()
                  << "), acceptance " << arm["acceptance"].get<double>();
      }
      std::cout << '\n';
    }
  }
  if (report.contains("optimal_ell")) {
    std::cout << "  optimal ell " << report["optimal_ell"].get<double>() << ", acceptance "
              << report["optimal_acceptance"].get<double>() << '\n';
  }
  if (report.contains("fits")) {
    for (const auto& [rule, fit] : report["fits"].items()) {
      std::cout << "  " << rule << ": slope " << fit["slope"].get<double>() << '\n';
    }
  }
  std::cout << "wrote " << out.string() << '\n';
}

int cmd_sample(const ConfigFlags& f, const std::string& default_preset, const std::string& forced_mode) {
  Config cfg = resolve_config(f, default_preset);
  if (!forced_mode.empty()) cfg.set("run.mode", forced_mode);
  const auto out = output_dir(f);
  const json report = madm::app::run_experiment(cfg, out);
  summarise(report, out);
  return 0;
}

int cmd_verify(const std::string& suite, std::uint64_t seed, const std::string& out) {
  const auto& known = madm::app::verify_suites();
  std::vector<std::string> suites = known;
  if (suite != "all") {
    if (std::find(known.begin(), known.end(), suite) == known.end()) {
      std::string names;
      for (const auto& s : known) names += (names.empty() ? "" : ", ") + s;
      throw ConfigError("unknown verify suite '" + suite + "' (valid suites: all, " + names + ")");
    }
    suites = {suite};
  }
  json verdicts = json::array();
  bool pass = true;
  for (const auto& name : suites) {
    const json v = madm::app::run_verify_suite(name, seed);
    std::cout << (v["pass"].get<bool>() ? "PASS " : "FAIL ") << name << '\n';
    pass = pass && v["pass"].get<bool>();
    verdicts.push_back(v);
  }
  const json doc = {{"seed", seed}, {"version", madm::app::version()}, {"pass", pass}, {"verdicts", verdicts}};
  std::cout << doc.dump(2) << '\n';
  if (!out.empty()) madm::write_text(fs::path(out) / "verify.json", doc.dump(2) + "\n");
  return pass ? 0 : 1;
}

int cmd_plotdata(const fs::path& run_dir, fs::path out, double quantile) {
  if (out.empty()) out = run_dir / "plot";
  const auto ref_path = run_dir / "reference.csv";
  if (!fs::exists(ref_path)) throw ConfigError("'" + run_dir.string() + "' has no reference.csv (run a 2D dataset preset)");
  const madm::Matrix reference = madm::read_samples_csv(ref_path);
  madm::write_csv(out / "true_cloud.csv", {"x", "y"}, [&] {
    std::vector<std::vector<double>> rows;
    for (madm::Index j = 0; j < reference.cols(); ++j) rows.push_back({reference(0, j), reference(1, j)});
    return rows;
  }());
  std::vector<std::pair<std::string, fs::path>> arms;
  if (fs::exists(run_dir / "samples.csv")) arms.emplace_back("samples", run_dir / "samples.csv");
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "samples.csv")) subdirs.push_back(entry.path());
  }
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& d : subdirs) arms.emplace_back(d.filename().string(), d / "samples.csv");
  if (arms.empty()) throw ConfigError("'" + run_dir.string() + "' holds no samples.csv");
  std::vector<std::vector<std::string>> metrics;
  for (const auto& [name, path] : arms) {
    const madm::Matrix samples = madm::read_samples_csv(path);
    if (samples.rows() != 2) throw ConfigError("plotdata needs 2D samples; " + path.string() + " has other shape");
    const auto c = madm::containment_distance(samples, reference, quantile);
    std::vector<std::vector<double>> rows;
    for (madm::Index j = 0; j < samples.cols(); ++j) {
      rows.push_back({samples(0, j), samples(1, j), c.distances[static_cast<std::size_t>(j)]});
    }
    madm::write_csv(out / (name + "_samples.csv"), {"x", "y", "nn_distance"}, rows);
    metrics.push_back({name, madm::format_double(c.quantile_distance), madm::format_double(c.mean_distance)});
    std::cout << name << ": containment " << c.quantile_distance << ", mean distance " << c.mean_distance << '\n';
  }
  madm::write_csv_cells(out / "metrics.csv", {"arm", "containment_distance", "mean_distance"}, metrics);
  std::cout << "wrote " << out.string() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Metropolis-adjusted corrector sampling for score-based diffusion models"};
  app.require_subcommand(1);
  app.set_version_flag("--version", madm::app::version());

  ConfigFlags sample_flags;
  auto* sample = app.add_subcommand("sample", "Run an experiment and write samples.csv, diagnostics.csv, report.json");
  add_config_flags(sample, sample_flags);

  ConfigFlags scaling_flags;
  auto* scaling = app.add_subcommand("scaling", "Optimal-scaling curve and empirical acceptance by dimension");
  add_config_flags(scaling, scaling_flags);

  std::string suite;
  std::uint64_t verify_seed = 0;
  std::string verify_out;
  auto* verify = app.add_subcommand("verify", "Run a property suite (or 'all') and print JSON verdicts");
  verify->add_option("suite", suite, "Suite name")->required();
  verify->add_option("--seed", verify_seed, "Seed");
  verify->add_option("--out", verify_out, "Directory for verify.json");

  std::string run_dir, plot_out;
  double quantile = 0.95;
  auto* plot = app.add_subcommand("plotdata", "Gnuplot-ready CSVs for a 2D run directory");
  plot->add_option("run_dir", run_dir, "Output directory of a sample run")->required();
  plot->add_option("--out", plot_out, "Destination (default RUN_DIR/plot)");
  plot->add_option("--quantile", quantile, "Containment quantile");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*sample) return cmd_sample(sample_flags, "", "");
    if (*scaling) return cmd_sample(scaling_flags, "scaling", "scaling");
    if (*verify) return cmd_verify(suite, verify_seed, verify_out);
    if (*plot) return cmd_plotdata(run_dir, plot_out, quantile);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
