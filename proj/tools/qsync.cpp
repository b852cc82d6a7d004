// qsync — CLI front end for the synchronization experiments.
//
//   qsync <experiment> [--config file.toml] [--set key=value ...]
//         [--out path.csv] [--jobs n]
//
// Exit codes: 0 success, 2 per-point partial failure (sweeps), 1 fatal error.

#include <qsync/qsync.hpp>

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

struct CliOptions {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string out_path;
    int jobs = 0;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + path);
    out << text;
}

qsync::config::ExperimentConfig resolve_config(const std::string& experiment, const CliOptions& cli) {
    auto cfg = qsync::config::default_config(experiment);
    if (!cli.config_path.empty()) {
        cfg = qsync::config::parse_config(read_file(cli.config_path), cfg);
    }
    cfg.experiment = experiment;  // the subcommand wins over a file-level key
    for (const std::string& assignment : cli.overrides) {
        qsync::config::apply_override(cfg, assignment);
    }
    cfg.out_path = cli.out_path;
    return cfg;
}

int run_experiment(const std::string& experiment, const CliOptions& cli) {
    namespace exp = qsync::experiments;
    const auto cfg = resolve_config(experiment, cli);

    if (experiment == "pair-trace") {
        const auto result = exp::run_pair_trace(cfg);
        write_output(cfg.out_path, result.csv);
        std::cerr << "pair-trace: S_c_avg = " << result.summary.avg.s_c
                  << ", S_p_avg = " << result.summary.avg.s_p << "\n";
        if (result.summary.run.hierarchy_violations > 0) {
            std::cerr << "warning: S_p <= S_c violated at " << result.summary.run.hierarchy_violations
                      << " sample(s)\n";
        }
        return result.exit_code;
    }
    if (experiment == "sweep-mu" || experiment == "sweep-nb") {
        const auto result = experiment == "sweep-mu" ? exp::run_sweep_mu(cfg, cli.jobs)
                                                     : exp::run_sweep_nb(cfg, cli.jobs);
        write_output(cfg.out_path, result.csv);
        int failed = 0;
        for (const auto& row : result.rows) failed += row.ok ? 0 : 1;
        if (failed > 0) {
            std::cerr << experiment << ": " << failed << " of " << result.rows.size()
                      << " point(s) failed\n";
        }
        return result.exit_code;
    }
    if (experiment == "chain") {
        const auto result = exp::run_chain(cfg);
        write_output(cfg.out_path, result.csv);
        return result.exit_code;
    }
    if (experiment == "ou-check") {
        const auto result = exp::run_ou_check(cfg);
        write_output(cfg.out_path, result.csv);
        std::cerr << "ou-check: max |analytic - numeric| = " << result.max_abs_dev
                  << (result.exit_code == 0 ? " (ok)" : " (FAILED)") << "\n";
        return result.exit_code;
    }
    throw std::runtime_error("unknown experiment: " + experiment);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"qsync — synchronization measures for coupled optomechanical oscillators"};
    app.require_subcommand(1);

    CliOptions cli;
    std::string chosen;
    const std::map<std::string, std::string> blurbs = {
        {"pair-trace", "time series of synchronization and correlation measures for the pair"},
        {"sweep-mu", "time-averaged measures vs phonon-tunneling strength"},
        {"sweep-nb", "time-averaged measures vs mechanical bath occupation"},
        {"chain", "time-averaged complete synchronization vs lattice distance on a ring"},
        {"ou-check", "closed-form vs integrated steady state of the 2x2 relative-mode model"},
    };
    for (const std::string& name : qsync::config::experiment_names()) {
        CLI::App* sub = app.add_subcommand(name, blurbs.at(name));
        sub->add_option("--config", cli.config_path, "TOML configuration file");
        sub->add_option("--set", cli.overrides, "override: section.key=value (repeatable)");
        sub->add_option("--out", cli.out_path, "output CSV path (default: stdout)");
        sub->add_option("--jobs", cli.jobs, "worker threads for sweeps (default: hardware)");
        sub->callback([&chosen, name] { chosen = name; });
    }

    CLI11_PARSE(app, argc, argv);

    try {
        return run_experiment(chosen, cli);
    } catch (const std::exception& e) {
        std::cerr << "qsync: " << e.what() << "\n";
        return 1;
    }
}
