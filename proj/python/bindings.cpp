#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "madm/app/experiments.hpp"
#include "madm/app/verify.hpp"
#include "madm/diagnostics.hpp"
#include "madm/error.hpp"
#include "madm/sampler.hpp"

namespace py = pybind11;
using namespace madm;

namespace {

// JSON documents cross the boundary as text and are parsed by the Python side.
// pybind11 holders cannot point to const, so models cross the boundary as
// mutable shared pointers. The library never mutates a model.
using PyModelPtr = std::shared_ptr<ScoreModel>;

PyModelPtr expose(ScoreModelPtr model) { return std::const_pointer_cast<ScoreModel>(std::move(model)); }

std::string run_experiment_json(const Config& cfg, const std::filesystem::path& out) {
  return app::run_experiment(cfg, out).dump();
}

}  // namespace

PYBIND11_MODULE(_madm, m) {
  m.doc() = "Metropolis-adjusted corrector sampling for score-based diffusion models";
  m.attr("__version__") = app::version();

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  auto domain = py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<DegenerateMixtureError>(m, "DegenerateMixtureError", domain.ptr());
  auto numerical = py::register_exception<NumericalError>(m, "NumericalError", base.ptr());
  py::register_exception<NonTerminationError>(m, "NonTerminationError", numerical.ptr());
  py::register_exception<BoundViolationError>(m, "BoundViolationError", numerical.ptr());

  py::class_<Rng>(m, "Rng")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream") = 0)
      .def("uniform", &Rng::uniform)
      .def("normal", &Rng::normal)
      .def("normal_vector", &Rng::normal_vector, py::arg("dim"));

  py::class_<NoiseSchedule>(m, "NoiseSchedule")
      .def_static("vp_discrete", &NoiseSchedule::vp_discrete, py::arg("steps"), py::arg("beta_min"),
                  py::arg("beta_max"))
      .def_static("vp_continuous", &NoiseSchedule::vp_continuous, py::arg("beta_min") = 0.1,
                  py::arg("beta_max") = 20.0)
      .def_static("edm", &NoiseSchedule::edm)
      .def_property_readonly("kind", [](const NoiseSchedule& s) { return to_string(s.kind()); })
      .def_property_readonly("steps", &NoiseSchedule::steps)
      .def_property_readonly("betas",
                             [](const NoiseSchedule& s) { return std::vector<double>(s.betas().begin(), s.betas().end()); })
      .def("marginal",
           [](const NoiseSchedule& s, double t) {
             const auto p = s.marginal(t);
             return py::make_tuple(p.r, p.sigma);
           },
           py::arg("t"), "(r_t, sigma_t)")
      .def("drift", &NoiseSchedule::drift, py::arg("t"))
      .def("diffusion_sq", &NoiseSchedule::diffusion_sq, py::arg("t"))
      .def("effective_beta", &NoiseSchedule::effective_beta, py::arg("t_lo"), py::arg("t_hi"));

  m.def("beta_schedule", &beta_schedule, py::arg("steps"), py::arg("beta_min"), py::arg("beta_max"));

  py::class_<ScoreModel, PyModelPtr>(m, "ScoreModel")
      .def_property_readonly("name", &ScoreModel::name)
      .def_property_readonly("dim", &ScoreModel::dim)
      .def("score", &ScoreModel::score, py::arg("x"), py::arg("t") = 0.0)
      .def_property_readonly("has_log_density", &ScoreModel::has_log_density)
      .def("log_density", &ScoreModel::log_density, py::arg("x"), py::arg("t") = 0.0);

  py::class_<ScoreOracle>(m, "ScoreOracle")
      .def(py::init([](PyModelPtr model) { return ScoreOracle(std::move(model)); }), py::arg("model"))
      .def("score", &ScoreOracle::score, py::arg("x"), py::arg("t") = 0.0)
      .def_property_readonly("queries", &ScoreOracle::queries)
      .def("reset_queries", &ScoreOracle::reset_queries)
      .def_property_readonly("dim", &ScoreOracle::dim)
      .def("log_density", &ScoreOracle::log_density, py::arg("x"), py::arg("t") = 0.0);

  m.def(
      "gaussian_model", [](const Vector& mean, double variance) { return expose(gaussian_model(mean, variance)); },
      py::arg("mean"), py::arg("variance"));
  m.def(
      "quartic_model",
      [](double scale, double perturbation) { return expose(quartic_model(scale, perturbation)); },
      py::arg("scale"), py::arg("perturbation") = 0.0);
  m.def(
      "diffused_gaussian_model",
      [](const Vector& mean, double data_variance, const NoiseSchedule& schedule) {
        return expose(diffused_gaussian_model(mean, data_variance, schedule));
      },
      py::arg("mean"), py::arg("data_variance"), py::arg("schedule"));
  m.def(
      "diffused_empirical_model",
      [](const Matrix& data, const NoiseSchedule& schedule) {
        return expose(diffused_empirical_model(data, schedule));
      },
      py::arg("data"), py::arg("schedule"), "Mixture over the columns of data (dim x n).");

  m.def(
      "generate_dataset",
      [](const std::string& name, std::size_t n, std::uint64_t seed) -> Matrix {
        return generate_dataset(name, n, seed).points;
      },
      py::arg("name"), py::arg("n"), py::arg("seed"), "2 x n point cloud.");

  py::class_<LangevinProposal>(m, "LangevinProposal")
      .def_readonly("x", &LangevinProposal::x)
      .def_readonly("x_new", &LangevinProposal::x_new)
      .def_readonly("delta", &LangevinProposal::delta)
      .def_readonly("h", &LangevinProposal::h)
      .def_readonly("t", &LangevinProposal::t)
      .def_readonly("score_x", &LangevinProposal::score_x)
      .def_readonly("score_new", &LangevinProposal::score_new);

  m.def("ula_propose", &ula_propose, py::arg("x"), py::arg("oracle"), py::arg("t"), py::arg("h"), py::arg("rng"));
  m.def("make_proposal", &make_proposal, py::arg("x"), py::arg("x_new"), py::arg("oracle"), py::arg("t"),
        py::arg("h"));
  m.def("log_H", &log_H, py::arg("proposal"));
  m.def("line_integrand", &line_integrand, py::arg("proposal"), py::arg("oracle"), py::arg("u"));

  py::class_<Decision>(m, "Decision")
      .def_property_readonly("accepted", &Decision::accepted)
      .def_readonly("rounds", &Decision::rounds)
      .def_readonly("poisson_total", &Decision::poisson_total)
      .def_readonly("score_queries", &Decision::score_queries)
      .def_readonly("w_last", &Decision::w_last)
      .def_property_readonly("path", [](const Decision& d) { return to_string(d.path); });

  m.def(
      "bound_C",
      [](const LangevinProposal& p, const std::string& strategy, std::optional<double> value,
         const ScoreOracle& oracle) { return bound_C(p, {bound_strategy_from_string(strategy), value}, oracle); },
      py::arg("proposal"), py::arg("strategy"), py::arg("value") = py::none(), py::arg("oracle"));
  m.def("poisson_product_W", py::overload_cast<const LangevinProposal&, ScoreOracle&, double, Rng&>(&poisson_product_W),
        py::arg("proposal"), py::arg("oracle"), py::arg("C"), py::arg("rng"));
  m.def(
      "two_coin_decision",
      [](const LangevinProposal& p, ScoreOracle& oracle, double C, Rng& rng, std::uint64_t max_rounds, bool lazy) {
        return two_coin_decision(p, oracle, C, rng, {max_rounds, lazy});
      },
      py::arg("proposal"), py::arg("oracle"), py::arg("C"), py::arg("rng"), py::arg("max_rounds") = 1'000'000,
      py::arg("lazy_product") = false);
  m.def(
      "two_coin_decide",
      [](double log_h, double C, const Integrand& f, Rng& rng, std::uint64_t max_rounds, bool lazy) {
        return two_coin_decide(log_h, C, f, rng, {max_rounds, lazy});
      },
      py::arg("log_h"), py::arg("C"), py::arg("f"), py::arg("rng"), py::arg("max_rounds") = 1'000'000,
      py::arg("lazy_product") = false);
  m.def("expected_queries", &expected_queries, py::arg("C"), py::arg("H"), py::arg("r"));
  m.def("expected_rounds", &expected_rounds, py::arg("C"), py::arg("H"), py::arg("r"));
  m.def("barker_acceptance", &barker_acceptance, py::arg("log_ratio"));

  py::class_<QuadratureRule>(m, "QuadratureRule")
      .def_static("from_name", &quadrature_rule_from_string, py::arg("name"))
      .def_static("composite", &QuadratureRule::composite, py::arg("base"), py::arg("panels"))
      .def_readonly("name", &QuadratureRule::name)
      .def_readonly("nodes", &QuadratureRule::nodes)
      .def_readonly("weights", &QuadratureRule::weights);
  m.def("quadrature_log_ratio", &quadrature_log_ratio, py::arg("proposal"), py::arg("oracle"), py::arg("rule"));
  m.def("exact_log_acceptance_ratio", &exact_log_acceptance_ratio, py::arg("proposal"), py::arg("oracle"));

  m.def("barker_limit_A", &barker_limit_A, py::arg("ell"));
  m.def("maximise_efficiency", &maximise_efficiency, py::arg("lo"), py::arg("hi"), py::arg("tol") = 1e-10);
  m.def("esjd", py::overload_cast<const std::vector<double>&>(&esjd), py::arg("chain"));
  m.def(
      "containment_distance",
      [](const Matrix& samples, const Matrix& reference, double q) {
        const auto c = containment_distance(samples, reference, q);
        return py::make_tuple(c.quantile_distance, c.mean_distance);
      },
      py::arg("samples"), py::arg("reference"), py::arg("q") = 0.95,
      "(q-quantile nearest-neighbour distance, mean distance); points are columns.");

  py::class_<Config>(m, "Config")
      .def(py::init<>())
      .def_static("preset", &Config::preset, py::arg("name"))
      .def_static("preset_names", &Config::preset_names)
      .def_static("from_file", &Config::from_file, py::arg("path"))
      .def("apply_override", &Config::apply_override, py::arg("assignment"))
      .def("entries", &Config::entries)
      .def("set", &Config::set, py::arg("key"), py::arg("value"))
      .def("get", &Config::get, py::arg("key"))
      .def("merge_text", &Config::merge_text, py::arg("text"), py::arg("origin") = "<text>")
      .def("to_text", &Config::to_text);

  m.def(
      "_run_experiment", [](const Config& cfg, const std::string& out) { return run_experiment_json(cfg, out); },
      py::arg("config"), py::arg("out"), py::call_guard<py::gil_scoped_release>());
  m.def(
      "_run_verify_suite", [](const std::string& name, std::uint64_t seed) { return app::run_verify_suite(name, seed).dump(); },
      py::arg("name"), py::arg("seed") = 0, py::call_guard<py::gil_scoped_release>());
  m.def("verify_suites", &app::verify_suites);
  m.def(
      "sample",
      [](const Config& cfg, const std::string& arm) {
        const auto report = [&] {
          py::gil_scoped_release release;
          return run_pc(app::build_run(cfg, arm));
        }();
        py::dict out;
        out["samples"] = report.samples;
        out["predictor_queries"] = report.predictor_queries;
        out["corrector_queries"] = report.corrector_queries;
        py::list levels;
        for (const auto& s : report.levels) {
          py::dict level;
          level["t"] = s.t;
          level["h"] = s.h;
          level["acceptance"] = s.acceptance_rate();
          level["mean_rounds"] = s.mean_rounds();
          level["mean_queries"] = s.mean_queries();
          level["esjd"] = s.esjd();
          levels.append(level);
        }
        out["levels"] = levels;
        return out;
      },
      py::arg("config"), py::arg("arm"), "Predictor-corrector run for one corrector arm; samples are columns.");
}
