#include "d2eal/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "d2eal/output.hpp"

namespace d2eal {

namespace {

namespace fs = std::filesystem;

struct Options {
    std::string config;
    std::string out{"."};
    std::optional<std::uint64_t> seed;
    std::optional<int> runs;
    std::string strategy;
};

void add_common(CLI::App* cmd, Options& o) {
    cmd->add_option("--config", o.config, "Scenario JSON file (default: built-in 6-robot scenario)");
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
    cmd->add_option("--seed", o.seed, "Base seed");
    cmd->add_option("--runs", o.runs, "Number of runs")->check(CLI::PositiveNumber);
    cmd->add_option("--strategy", o.strategy, "d2eal|nocomm|mean|median|greedy|kf|ci|bf|cu (comma list for compare/sweep)");
}

std::vector<fusion::Strategy> parse_strategy_list(const std::string& text) {
    std::vector<fusion::Strategy> out;
    std::stringstream ss(text);
    std::string key;
    while (std::getline(ss, key, ',')) {
        const auto s = fusion::parse_strategy(key);
        if (!s) {
            throw Error(ErrorCode::ConfigError, "unknown strategy '" + key + "'");
        }
        out.push_back(*s);
    }
    if (out.empty()) {
        throw Error(ErrorCode::ConfigError, "empty strategy list");
    }
    return out;
}

scenario::ScenarioConfig load(const Options& o) {
    scenario::ScenarioConfig c = o.config.empty() ? scenario::ScenarioConfig{} : scenario::load_config(o.config);
    if (o.seed) {
        c.seed = *o.seed;
    }
    if (!o.strategy.empty()) {
        const auto list = parse_strategy_list(o.strategy);
        c.fusion = list.front();
    }
    c.validate();
    return c;
}

std::vector<fusion::Strategy> strategies_for(const Options& o) {
    if (o.strategy.empty()) {
        const auto all = fusion::all_strategies();
        return {all.begin(), all.end()};
    }
    return parse_strategy_list(o.strategy);
}

std::string to_text(const auto& writer) {
    std::ostringstream s;
    writer(s);
    return s.str();
}

output::RunAudit audit_run(const scenario::ScenarioConfig& config) {
    scenario::ScenarioConfig c = config;
    c.fusion = fusion::Strategy::D2EAL;
    output::RunAudit a;
    a.seed = c.seed;
    const sim::RunOutput configured = sim::run_once(c);
    a.configured = audit::audit_bounds(configured.log, c);
    a.convergence = audit::audit_convergence(configured.log);
    scenario::ScenarioConfig lemma = c;
    lemma.learning.reset_period = 0;
    const sim::RunOutput scoped = sim::run_once(lemma);
    a.lemma_scope = audit::audit_bounds(scoped.log, lemma);
    return a;
}

int cmd_run(const Options& o, std::ostream& out) {
    const scenario::ScenarioConfig c = load(o);
    const sim::RunOutput run = sim::run_once(c);
    const fs::path dir(o.out);
    output::write_file(dir / "steps.csv", to_text([&](std::ostream& s) { output::write_steps_csv(s, run.log); }));
    output::write_file(dir / "summary.json", output::summary_json(run.summary, c));
    output::write_file(dir / "linkdrops.csv",
                       to_text([&](std::ostream& s) { output::write_linkdrops_csv(s, run.dropped_per_step); }));
    const std::size_t edges = scenario::build_topology(c).edges().size();
    output::write_file(dir / "linkdrop_histogram.csv", to_text([&](std::ostream& s) {
                           output::write_linkdrop_histogram_csv(s, run.dropped_per_step, edges);
                       }));
    const output::DesignatedConvergence designated = output::designated_convergence();
    if (c.fusion == fusion::Strategy::D2EAL) {
        const output::RunAudit a = audit_run(c);
        output::write_file(dir / "audit.json", output::audit_json({&a, 1}, designated));
    } else {
        output::write_file(dir / "audit.json", output::audit_not_applicable_json(c.fusion, designated));
    }
    out << fusion::to_string(c.fusion) << " seed " << c.seed << ": total social loss "
        << output::format_double(run.summary.total_social) << "\n";
    return kExitOk;
}

int cmd_montecarlo(const Options& o, std::ostream& out) {
    const scenario::ScenarioConfig c = load(o);
    const int runs = o.runs.value_or(c.num_runs);
    const sim::Campaign camp = sim::monte_carlo(c, runs);
    const fs::path dir(o.out);
    output::write_file(dir / "summary.json", output::campaign_json(camp, c));
    output::write_file(dir / "curves.csv", to_text([&](std::ostream& s) { output::write_curves_csv(s, {&camp, 1}); }));
    out << fusion::to_string(c.fusion) << " over " << camp.runs.size() << " runs: mean total "
        << output::format_double(camp.mean_total) << " (" << camp.failed.size() << " failed)\n";
    return kExitOk;
}

int cmd_compare(const Options& o, std::ostream& out) {
    Options base = o;
    base.strategy.clear();
    const scenario::ScenarioConfig c = load(base);
    const int runs = o.runs.value_or(c.num_runs);
    std::vector<sim::Campaign> camps;
    for (fusion::Strategy s : strategies_for(o)) {
        scenario::ScenarioConfig cs = c;
        cs.fusion = s;
        camps.push_back(sim::monte_carlo(cs, runs));
    }
    const fs::path dir(o.out);
    output::write_file(dir / "comparison.csv",
                       to_text([&](std::ostream& s) { output::write_comparison_csv(s, camps); }));
    output::write_file(dir / "curves.csv", to_text([&](std::ostream& s) { output::write_curves_csv(s, camps); }));
    for (const sim::Campaign& k : camps) {
        out << fusion::to_string(k.strategy) << ": " << output::format_double(k.mean_total) << "\n";
    }
    return kExitOk;
}

int cmd_sweep(const Options& o, std::ostream& out) {
    Options base = o;
    base.strategy.clear();
    const scenario::ScenarioConfig c = load(base);
    const int runs = o.runs.value_or(c.num_runs);
    const std::vector<sim::SweepCell> cells = sim::scalability_sweep(c, c.sweep_robots, strategies_for(o), runs);
    output::write_file(fs::path(o.out) / "sweep.csv",
                       to_text([&](std::ostream& s) { output::write_sweep_csv(s, cells); }));
    out << "sweep: " << cells.size() << " cells\n";
    return kExitOk;
}

int cmd_audit(const Options& o, std::ostream& out) {
    const scenario::ScenarioConfig c = load(o);
    if (!o.strategy.empty() && c.fusion != fusion::Strategy::D2EAL) {
        throw Error(ErrorCode::ConfigError, "the bound audit applies to d2eal only");
    }
    const int runs = o.runs.value_or(1);
    std::vector<output::RunAudit> audits;
    for (int k = 0; k < runs; ++k) {
        scenario::ScenarioConfig ck = c;
        ck.seed = c.seed + static_cast<std::uint64_t>(k);
        audits.push_back(audit_run(ck));
    }
    const output::DesignatedConvergence designated = output::designated_convergence();
    output::write_file(fs::path(o.out) / "audit.json", output::audit_json(audits, designated));
    std::size_t configured = 0;
    std::size_t scoped = 0;
    for (const output::RunAudit& a : audits) {
        configured += a.configured.lemma_violations;
        scoped += a.lemma_scope.lemma_violations;
    }
    out << "lemma violations: " << configured << " (reset as configured), " << scoped << " (reset off); "
        << "designated convergence " << (designated.within_limit ? "within" : "outside") << " limit\n";
    return kExitOk;
}

}  // namespace

int cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Decentralized expert-assisted learning tracking simulator", "d2eal"};
    app.require_subcommand(1);
    Options run_o;
    Options mc_o;
    Options sweep_o;
    Options audit_o;
    Options compare_o;
    CLI::App* run = app.add_subcommand("run", "One run: steps.csv, summary.json, audit.json, linkdrops.csv");
    CLI::App* mc = app.add_subcommand("montecarlo", "Seed-averaged campaign of one strategy");
    CLI::App* sweep = app.add_subcommand("sweep", "Scalability sweep over robot counts");
    CLI::App* aud = app.add_subcommand("audit", "Regret-bound and convergence audit");
    CLI::App* cmp = app.add_subcommand("compare", "Every strategy on common seeds: comparison.csv");
    add_common(run, run_o);
    add_common(mc, mc_o);
    add_common(sweep, sweep_o);
    add_common(aud, audit_o);
    add_common(cmp, compare_o);

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    if (!reversed.empty()) {
        reversed.pop_back();
    }
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n" << app.help();
        return kExitConfig;
    }

    try {
        if (*run) {
            return cmd_run(run_o, out);
        }
        if (*mc) {
            return cmd_montecarlo(mc_o, out);
        }
        if (*sweep) {
            return cmd_sweep(sweep_o, out);
        }
        if (*aud) {
            return cmd_audit(audit_o, out);
        }
        if (*cmp) {
            return cmd_compare(compare_o, out);
        }
    } catch (const NumericalFailure& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.code() == ErrorCode::NumericalFailure ? kExitNumerical : kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << app.help();
    return kExitConfig;
}

int cli_main(int argc, char** argv) {
    const std::vector<std::string> args(argv, argv + argc);
    return cli_main(args, std::cout, std::cerr);
}

}  // namespace d2eal
