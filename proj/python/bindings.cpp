// Python extension: thin wrappers that exchange JSON text with the C++ core.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "d2eal/audit.hpp"
#include "d2eal/cli.hpp"
#include "d2eal/output.hpp"
#include "d2eal/simulation.hpp"

namespace py = pybind11;
using namespace d2eal;

namespace {

scenario::ScenarioConfig config_from(const std::string& json_text) {
    scenario::ScenarioConfig c = json_text.empty() ? scenario::ScenarioConfig{} : scenario::parse_config(json_text);
    c.validate();
    return c;
}

std::string steps_csv(const sim::RunOutput& run) {
    std::ostringstream s;
    output::write_steps_csv(s, run.log);
    return s.str();
}

}  // namespace

PYBIND11_MODULE(_d2eal, m) {
    m.doc() = "Decentralized expert-assisted learning tracking simulator";

    py::register_exception<Error>(m, "D2EALError", PyExc_ValueError);

    m.def(
        "loss",
        [](std::pair<double, double> p, std::pair<double, double> y, double scale) {
            return loss({p.first, p.second}, {y.first, y.second}, scale);
        },
        py::arg("prediction"), py::arg("outcome"), py::arg("scale") = 50.0);

    m.def("default_config", [] { return scenario::dump_config(scenario::ScenarioConfig{}); });
    m.def("normalize_config", [](const std::string& text) { return scenario::dump_config(config_from(text)); });

    m.def(
        "run",
        [](const std::string& config_json, bool with_steps) {
            const scenario::ScenarioConfig c = config_from(config_json);
            sim::RunOptions opt;
            opt.keep_log = with_steps;
            sim::RunOutput run;
            {
                py::gil_scoped_release release;
                run = sim::run_once(c, opt);
            }
            return py::make_tuple(output::summary_json(run.summary, c), with_steps ? steps_csv(run) : std::string());
        },
        py::arg("config_json") = "", py::arg("with_steps") = false);

    m.def(
        "monte_carlo",
        [](const std::string& config_json, int runs, unsigned threads) {
            const scenario::ScenarioConfig c = config_from(config_json);
            py::gil_scoped_release release;
            return output::campaign_json(sim::monte_carlo(c, runs, threads, false), c);
        },
        py::arg("config_json") = "", py::arg("runs") = 1, py::arg("threads") = 0);

    m.def(
        "compare",
        [](const std::string& config_json, int runs, unsigned threads) {
            const scenario::ScenarioConfig c = config_from(config_json);
            std::ostringstream s;
            {
                py::gil_scoped_release release;
                output::write_comparison_csv(s, sim::compare(c, runs, threads, false));
            }
            return s.str();
        },
        py::arg("config_json") = "", py::arg("runs") = 1, py::arg("threads") = 0);

    m.def(
        "fuse",
        [](const std::string& strategy, const std::vector<std::pair<double, double>>& means,
           const std::vector<std::vector<double>>& covs, std::size_t self) {
            const auto s = fusion::parse_strategy(strategy);
            if (!s) {
                throw Error(ErrorCode::InvalidArgument, "unknown strategy '" + strategy + "'");
            }
            if (means.size() != covs.size()) {
                throw Error(ErrorCode::InvalidArgument, "means and covariances differ in length");
            }
            std::vector<fusion::FusionEntry> in;
            for (std::size_t i = 0; i < means.size(); ++i) {
                if (covs[i].size() != 4) {
                    throw Error(ErrorCode::InvalidArgument, "covariances are row-major [a, b, c, d]");
                }
                in.push_back({i, {means[i].first, means[i].second}, {covs[i][0], covs[i][1], covs[i][2], covs[i][3]},
                              0.0});
            }
            const fusion::FusedPrediction f = fusion::fuse(*s, in, self);
            return py::make_tuple(std::pair{f.mean.x, f.mean.y}, std::vector<double>{f.cov.a, f.cov.b, f.cov.c, f.cov.d});
        },
        py::arg("strategy"), py::arg("means"), py::arg("covariances"), py::arg("self_index") = 0);

    m.def(
        "audit",
        [](const std::string& config_json) {
            scenario::ScenarioConfig c = config_from(config_json);
            c.fusion = fusion::Strategy::D2EAL;
            output::RunAudit a;
            {
                py::gil_scoped_release release;
                a.seed = c.seed;
                const sim::RunOutput run = sim::run_once(c);
                a.configured = audit::audit_bounds(run.log, c);
                a.convergence = audit::audit_convergence(run.log);
                scenario::ScenarioConfig scoped = c;
                scoped.learning.reset_period = 0;
                a.lemma_scope = audit::audit_bounds(sim::run_once(scoped).log, scoped);
            }
            return output::audit_json({&a, 1}, output::designated_convergence());
        },
        py::arg("config_json") = "");

    m.def(
        "cli",
        [](std::vector<std::string> args) {
            args.insert(args.begin(), "d2eal");
            std::ostringstream out;
            std::ostringstream err;
            const int code = cli_main(args, out, err);
            return py::make_tuple(code, out.str(), err.str());
        },
        py::arg("args"));
}
