#include <qsync/experiments.hpp>

#include <catch2/catch.hpp>

#include <sstream>

using namespace qsync;
using namespace qsync::experiments;
using qsync::config::ExperimentConfig;

namespace {

// Short windows for the integration tests; long enough for the limit cycle to
// be well established (the full-length defaults run in the acceptance suite).
ExperimentConfig quick_config(const std::string& experiment) {
    ExperimentConfig cfg = config::default_config(experiment);
    cfg.integrator.transient_tau = 150.0;
    cfg.integrator.record_tau = 60.0;
    return cfg;
}

std::string config_block_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line, block;
    bool in_config = false;
    while (std::getline(in, line)) {
        if (line == "# config:") {
            in_config = true;
            continue;
        }
        if (!in_config) continue;
        if (line.empty() || line[0] != '#') break;
        block += line.size() > 2 ? line.substr(2) : "";
        block += '\n';
    }
    return block;
}

int count_data_rows(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    int rows = 0;
    bool past_header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!past_header) {
            past_header = true;  // column header row
            continue;
        }
        ++rows;
    }
    return rows;
}

}  // namespace

TEST_CASE("pair-trace experiment", "[integration]") {
    const ExperimentConfig cfg = quick_config("pair-trace");
    const PairTraceResult result = run_pair_trace(cfg);

    SECTION("summary satisfies the synchronization bounds") {
        REQUIRE(result.exit_code == 0);
        REQUIRE(result.summary.avg.s_c > 0.0);
        REQUIRE(result.summary.avg.s_c < 1.0);
        REQUIRE(result.summary.avg.s_p > 0.0);
        REQUIRE(result.summary.avg.s_p <= result.summary.avg.s_c + 1e-9);
        REQUIRE(result.summary.negativity_avg == 0.0);
        REQUIRE(result.summary.discord_avg > 0.0);
    }
    SECTION("csv layout: provenance, one row per sample, summary comment") {
        REQUIRE(result.csv.rfind("# qsync pair-trace\n", 0) == 0);
        const int expected_rows =
            static_cast<int>(cfg.integrator.record_tau) * cfg.integrator.samples_per_tau + 1;
        REQUIRE(count_data_rows(result.csv) == expected_rows);
        REQUIRE(result.csv.find("\n# summary S_c_avg=") != std::string::npos);
        REQUIRE(result.csv.find("t_tau,S_c,S_p,var_qminus,var_pminus,var_pminus_rot,D_G,E_N,"
                                "bound_ok,hierarchy_ok,squeezing\n") != std::string::npos);
    }
    SECTION("provenance header round-trips to the resolved configuration") {
        const std::string block = config_block_from_csv(result.csv);
        const ExperimentConfig parsed =
            config::parse_config(block, config::default_config("pair-trace"));
        REQUIRE(parsed == cfg);
    }
    SECTION("byte-identical on a re-run") {
        REQUIRE(run_pair_trace(cfg).csv == result.csv);
    }
    SECTION("ring parameters are rejected") {
        ExperimentConfig bad = cfg;
        bad.params = SystemParams::uniform_ring(4);
        REQUIRE_THROWS_AS(run_pair_trace(bad), config::config_error);
    }
}

TEST_CASE("sweep-mu experiment", "[integration]") {
    ExperimentConfig cfg = quick_config("sweep-mu");
    cfg.sweep.mu_values = {0.0, 0.02};
    const SweepResult result = run_sweep_mu(cfg, 2);

    SECTION("rows succeed on the reduced grid") {
        REQUIRE(result.exit_code == 0);
        REQUIRE(result.rows.size() == 2);
        REQUIRE(result.rows[0].ok);
        REQUIRE(result.rows[1].ok);
    }
    SECTION("the mu = 0.02 row matches the pair-trace pipeline") {
        const PairTraceResult trace = run_pair_trace(quick_config("pair-trace"));
        REQUIRE(result.rows[1].avg.s_c == Approx(trace.summary.avg.s_c).margin(1e-9));
        REQUIRE(result.rows[1].avg.s_p == Approx(trace.summary.avg.s_p).margin(1e-9));
        REQUIRE(result.rows[1].discord_avg == Approx(trace.summary.discord_avg).margin(1e-9));
    }
    SECTION("no coupling, no discord; negativity zero throughout") {
        REQUIRE(result.rows[0].discord_avg <= 1e-9);
        REQUIRE(result.rows[1].discord_avg > 0.0);
        REQUIRE(result.rows[0].negativity_avg == 0.0);
        REQUIRE(result.rows[1].negativity_avg == 0.0);
    }
    SECTION("row order and bytes independent of worker count") {
        const SweepResult serial = run_sweep_mu(cfg, 1);
        REQUIRE(serial.csv == result.csv);
    }
    SECTION("failed points are marked and flip the exit code") {
        ExperimentConfig dead = cfg;
        dead.params.E = 0.0;  // no drive, no limit cycle anywhere
        dead.integrator.limit_cycle_threshold = 1e-2;  // ring-down still ~1e-3 at this window
        dead.sweep.mu_values = {0.0, 0.02};
        const SweepResult failed = run_sweep_mu(dead, 1);
        REQUIRE(failed.exit_code == 2);
        REQUIRE_FALSE(failed.rows[0].ok);
        REQUIRE(failed.rows[0].status == "no-limit-cycle");
        REQUIRE(failed.csv.find("no-limit-cycle") != std::string::npos);
    }
}

TEST_CASE("sweep-nb experiment", "[integration]") {
    ExperimentConfig cfg = quick_config("sweep-nb");
    cfg.sweep.nb_values = {0.0, 1.0};
    const SweepResult result = run_sweep_nb(cfg, 2);
    REQUIRE(result.exit_code == 0);
    REQUIRE(result.rows[0].ok);
    REQUIRE(result.rows[1].ok);
    SECTION("thermal noise degrades complete synchronization") {
        REQUIRE(result.rows[0].avg.s_c > result.rows[1].avg.s_c);
    }
    SECTION("the n_b = 0 row matches the pair-trace pipeline") {
        const PairTraceResult trace = run_pair_trace(quick_config("pair-trace"));
        REQUIRE(result.rows[0].avg.s_c == Approx(trace.summary.avg.s_c).margin(1e-9));
    }
    SECTION("empty grid rejected") {
        cfg.sweep.nb_values = {};
        REQUIRE_THROWS_AS(run_sweep_nb(cfg, 1), config::config_error);
    }
    SECTION("hot-bath scaling: S_c_avg (2 n_b + 1) approaches a constant") {
        cfg.sweep.nb_values = {10.0, 20.0};
        const SweepResult hot = run_sweep_nb(cfg, 2);
        REQUIRE(hot.rows[0].ok);
        REQUIRE(hot.rows[1].ok);
        const double scaled_ratio =
            (hot.rows[0].avg.s_c * 21.0) / (hot.rows[1].avg.s_c * 41.0);
        REQUIRE(scaled_ratio > 0.7);
        REQUIRE(scaled_ratio < 1.3);
    }
}

TEST_CASE("chain experiment smoke", "[integration]") {
    ExperimentConfig cfg = config::default_config("chain");
    cfg.integrator.transient_tau = 60.0;
    cfg.integrator.record_tau = 30.0;
    cfg.sweep.chain_sites = 4;
    const ChainResult result = run_chain(cfg);
    REQUIRE(result.exit_code == 0);
    REQUIRE(result.h == std::vector<int>{1, 2, 3});
    REQUIRE(result.h_max == 2);
    REQUIRE(count_data_rows(result.csv) == 2);
    SECTION("every distance synchronizes to some positive level") {
        for (double s : result.s_c_avg) {
            REQUIRE(s > 0.0);
            REQUIRE(s <= 1.0 + 1e-9);
        }
    }
    SECTION("ring symmetry: S_c(h) = S_c(N - h)") {
        REQUIRE(result.s_c_avg[0] == Approx(result.s_c_avg[2]).margin(1e-9));
    }
    SECTION("covariances stay physical") {
        REQUIRE(result.min_phys_eig >= -1e-9);
    }
    SECTION("undersized ring rejected") {
        cfg.sweep.chain_sites = 2;
        REQUIRE_THROWS_AS(run_chain(cfg), config::config_error);
    }
}

TEST_CASE("ou-check experiment") {
    const ExperimentConfig cfg = config::default_config("ou-check");
    const OuCheckResult result = run_ou_check(cfg);
    REQUIRE(result.exit_code == 0);
    REQUIRE(result.max_abs_dev < 1e-8);
    REQUIRE(result.anisotropy_ok);
    REQUIRE(result.csv.find("sigma_pp_numeric,") != std::string::npos);
    SECTION("analytic matrix matches the library closed form") {
        const Eigen::Matrix2d sigma = ou_steady_state({cfg.ou.gamma_eff, cfg.ou.mu, cfg.ou.d});
        REQUIRE((result.analytic - sigma).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("mu = 0 rejected") {
        ExperimentConfig bad = cfg;
        bad.ou.mu = 0.0;
        REQUIRE_THROWS_AS(run_ou_check(bad), std::invalid_argument);
    }
}
