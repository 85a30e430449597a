#include "madm/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "madm/error.hpp"

namespace madm {

namespace {

const std::vector<std::pair<std::string, std::string>>& defaults() {
  static const std::vector<std::pair<std::string, std::string>> table = {
      {"run.mode", "pc"},
      {"run.seed", "0"},
      {"run.chains", "1000"},
      {"run.threads", "1"},
      {"run.verbosity", "1"},
      {"target.kind", "dataset"},
      {"target.dataset", "checkerboard"},
      {"target.size", "2000"},
      {"target.data_seed", "0"},
      {"target.dim", "1"},
      {"target.mean", "0"},
      {"target.variance", "1"},
      {"target.scale", "1"},
      {"target.perturbation", "0"},
      {"schedule.kind", "vp-discrete"},
      {"schedule.beta_min", "0.005"},
      {"schedule.beta_max", "0.5"},
      {"schedule.T", "20"},
      {"predictor.kind", "ancestral"},
      {"predictor.steps", "20"},
      {"corrector.kind", "none"},
      {"corrector.rule", "simpson13"},
      {"corrector.steps", "0"},
      {"corrector.step_rule", "beta"},
      {"corrector.c", "0.1"},
      {"corrector.hybrid_rounds", "10"},
      {"corrector.bound", "bounded-denoiser"},
      {"corrector.bound_value", ""},
      {"corrector.max_rounds", "1000000"},
      {"corrector.lazy_product", "false"},
      {"metrics.reference_size", "10000"},
      {"metrics.reference_seed", "1"},
      {"metrics.quantile", "0.95"},
      {"stationary.h", "0.5"},
      {"stationary.steps", "1000000"},
      {"stationary.two_coin_steps", "1000000"},
      {"stationary.burn_in_fraction", "0.1"},
      {"stationary.thin", "1000"},
      {"stationary.batches", "50"},
      {"scaling.ell_min", "0.1"},
      {"scaling.ell_max", "4"},
      {"scaling.ell_points", "40"},
      {"scaling.dims", "10,100,1000"},
      {"scaling.proposals", "100000"},
      {"scaling.decision", "barker"},
      {"scaling.max_rounds", "1000000"},
      {"quad.rules", "trapezoid,simpson13,simpson38"},
      {"quad.k_min", "3"},
      {"quad.k_max", "9"},
      {"quad.proposals", "1000"},
      {"quad.scale", "1"},
      {"quad.perturbation", "0.1"},
  };
  return table;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// 2D dataset preset: ancestral predictor, ancestral-only arm against the
// hybrid corrector arm.
std::string dataset_preset(const std::string& dataset, int steps, double beta_min, double beta_max,
                           int corrector_steps, const std::string& c) {
  std::ostringstream out;
  out << "[run]\nmode = pc\nchains = 1000\n"
      << "[target]\nkind = dataset\ndataset = " << dataset << "\nsize = 1000\n"
      << "[schedule]\nkind = vp-discrete\nT = " << steps << "\nbeta_min = " << beta_min
      << "\nbeta_max = " << beta_max << "\n"
      << "[predictor]\nkind = ancestral\nsteps = " << steps << "\n"
      << "[corrector]\nkind = none,hybrid\nrule = simpson13\nsteps = " << corrector_steps
      << "\nstep_rule = beta\nc = " << c << "\nhybrid_rounds = 10\nbound = bounded-denoiser\nlazy_product = true\n";
  return out.str();
}

std::string preset_text(const std::string& name) {
  if (name == "fig1-checkerboard") {
    return "[run]\nmode = pc\nchains = 10000\n"
           "[target]\nkind = dataset\ndataset = checkerboard\nsize = 1000\n"
           "[schedule]\nkind = vp-discrete\nT = 10\nbeta_min = 0.01\nbeta_max = 0.6\n"
           "[predictor]\nkind = pf-ode-euler\nsteps = 10\n"
           "[corrector]\nkind = ula,hybrid\nrule = simpson13\nsteps = 10\nstep_rule = beta\nc = 1\n"
           "hybrid_rounds = 10\nbound = bounded-denoiser\nlazy_product = true\n";
  }
  if (name == "spiral") return dataset_preset("spiral", 40, 0.0025, 0.5, 20, "0.1");
  if (name == "funnel") return dataset_preset("funnel", 10, 0.01, 0.6, 20, "1");
  if (name == "sierpinski") return dataset_preset("sierpinski", 20, 0.005, 0.5, 30, "0.01");
  if (name == "pinwheel") return dataset_preset("pinwheel", 20, 0.005, 0.5, 30, "0.01");
  if (name == "gaussian-bias") {
    return "[run]\nmode = stationary\nchains = 1\n"
           "[target]\nkind = gaussian\ndim = 1\nmean = 0\nvariance = 1\n"
           "[corrector]\nkind = ula,two-coin,oracle-mh,simpson13\nbound = affine-endpoint\n"
           "max_rounds = 100000000\nlazy_product = true\n"
           "[stationary]\nh = 0.5\nsteps = 1000000\ntwo_coin_steps = 50000\nburn_in_fraction = 0.1\n";
  }
  if (name == "scaling") {
    return "[run]\nmode = scaling\n"
           "[scaling]\nell_min = 0.1\nell_max = 4\nell_points = 40\ndims = 10,100,1000\nproposals = 100000\n"
           "decision = barker\n";
  }
  if (name == "quad-order") {
    return "[run]\nmode = quad-order\n"
           "[quad]\nrules = trapezoid,simpson13,simpson38\nk_min = 3\nk_max = 9\nproposals = 1000\nscale = 1\n"
           "perturbation = 0.1\n";
  }
  std::string names;
  for (const auto& n : Config::preset_names()) names += (names.empty() ? "" : ", ") + n;
  throw ConfigError("unknown preset '" + name + "' (expected " + names + ")");
}

}  // namespace

Config::Config() {
  for (const auto& [k, v] : defaults()) values_[k] = v;
}

std::vector<std::string> Config::preset_names() {
  return {"fig1-checkerboard", "spiral", "funnel", "sierpinski", "pinwheel", "gaussian-bias", "scaling", "quad-order"};
}

Config Config::preset(const std::string& name) {
  Config cfg;
  cfg.merge_text(preset_text(name), "preset " + name);
  return cfg;
}

Config Config::from_file(const std::filesystem::path& path) {
  Config cfg;
  cfg.merge_file(path);
  return cfg;
}

void Config::merge_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  merge_text(buf.str(), path.string());
}

void Config::merge_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    line = trim(hash == std::string::npos ? line : line.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected 'key = value'");
    if (section.empty()) throw ConfigError(where + "key outside a [section]");
    const std::string key = section + "." + trim(line.substr(0, eq));
    try {
      set(key, trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(where + e.what());
    }
  }
}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

void Config::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("override '" + assignment + "' is not of the form key=value");
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const auto& v = get(key);
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
  }
}

std::uint64_t Config::get_u64(const std::string& key) const {
  const auto& v = get(key);
  try {
    std::size_t used = 0;
    if (!v.empty() && v.front() == '-') throw std::invalid_argument(v);
    const auto n = std::stoull(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return n;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a nonnegative integer");
  }
}

bool Config::get_bool(const std::string& key) const {
  std::string v = get(key);
  std::transform(v.begin(), v.end(), v.begin(), [](unsigned char c) { return std::tolower(c); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("config key '" + key + "': '" + get(key) + "' is not a boolean");
}

std::vector<std::string> Config::get_list(const std::string& key) const {
  std::vector<std::string> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<double> Config::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const auto& item : get_list(key)) {
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ConfigError("config key '" + key + "': '" + item + "' is not a number");
    }
  }
  return out;
}

std::string Config::to_text() const {
  std::ostringstream out;
  std::string section;
  for (const auto& [key, value] : values_) {
    const auto dot = key.find('.');
    const std::string s = key.substr(0, dot);
    if (s != section) {
      out << (section.empty() ? "" : "\n") << '[' << s << "]\n";
      section = s;
    }
    out << key.substr(dot + 1) << " = " << value << '\n';
  }
  return out.str();
}

}  // namespace madm
