#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "wanpm/error.hpp"
#include "wanpm/experiment.hpp"
#include "wanpm/random.hpp"
#include "wanpm/stats.hpp"
#include "wanpm/test_functions.hpp"

namespace py = pybind11;
using namespace wanpm;

namespace {

std::vector<double> stable_samples(double alpha, double scale, double location, std::size_t count, std::uint64_t seed) {
    validate(StableParams{alpha, scale, location});
    auto stream = RandomStream::substream(seed, stream_domain::kTest, 0);
    std::vector<double> out(count);
    for (auto& x : out) x = sample_stable({alpha, scale, location}, stream);
    return out;
}

RunConfig config_from(const std::string& experiment, const std::string& preset, std::uint64_t seed,
                      const std::vector<std::string>& overrides) {
    return resolve_config(experiment, preset, std::nullopt, seed, overrides);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Weak adversarial solver for fractional Fokker-Planck equations.";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<NumericError>(m, "NumericError", PyExc_ArithmeticError);
    py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);

    m.def("stable_samples", &stable_samples, py::arg("alpha"), py::arg("scale") = 1.0, py::arg("location") = 0.0,
          py::arg("count") = 1000, py::arg("seed") = 0, "Symmetric alpha-stable draws.");
    m.def("frac_multiplier", &frac_multiplier, py::arg("w"), py::arg("alpha"));
    m.def("stable_cf", &stable_cf_theory, py::arg("alpha"), py::arg("theta"), py::arg("mu"), py::arg("xi"),
          "Stationary characteristic function of the fractional OU process.");
    m.def("fou_stationary_scale", &fou_stationary_scale, py::arg("alpha"), py::arg("theta"));
    m.def("stable_quantile", &stable_quantile_oracle, py::arg("alpha"), py::arg("scale"), py::arg("location"),
          py::arg("p"));

    py::class_<RobustSummary>(m, "RobustSummary")
        .def_readonly("median", &RobustSummary::median)
        .def_readonly("iqr", &RobustSummary::iqr)
        .def_readonly("mad", &RobustSummary::mad)
        .def_readonly("p10", &RobustSummary::p10)
        .def_readonly("p90", &RobustSummary::p90)
        .def_readonly("mean", &RobustSummary::mean)
        .def_readonly("std", &RobustSummary::std)
        .def_readonly("std_reliable", &RobustSummary::std_reliable);
    m.def(
        "robust_summary", [](const std::vector<double>& x, double alpha) { return robust_summary(x, alpha); },
        py::arg("samples"), py::arg("alpha") = 2.0);

    py::class_<RunConfig>(m, "RunConfig")
        .def_readonly("seed", &RunConfig::seed)
        .def("to_json", &config_to_json);
    m.def("resolve_config", &config_from, py::arg("experiment"), py::arg("preset") = "desk", py::arg("seed") = 0,
          py::arg("overrides") = std::vector<std::string>{});

    m.def("train", &cmd_train, py::arg("config"), py::arg("out"), py::call_guard<py::gil_scoped_release>());
    m.def("simulate", &cmd_simulate, py::arg("config"), py::arg("out"), py::call_guard<py::gil_scoped_release>());
    m.def("evaluate", &cmd_evaluate, py::arg("config"), py::arg("checkpoint"), py::arg("particles"),
          py::arg("learned_csv") = std::nullopt, py::arg("out"), py::call_guard<py::gil_scoped_release>());
    m.def("report", &cmd_report, py::arg("dir"));
}
