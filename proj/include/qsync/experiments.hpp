// experiments.hpp — Experiment drivers and CSV emission.
//
// Every CSV is deterministic: identical configuration produces byte-identical
// output. Numbers are written with 17 significant digits, '.' decimal, and a
// '#'-prefixed header carries the full resolved configuration. Sweep points
// run on a worker pool; row order is fixed by the grid, never by completion.

#pragma once

#include "config.hpp"
#include "dynamics.hpp"

#include <atomic>
#include <cstdio>
#include <string>
#include <thread>
#include <vector>

namespace qsync::experiments {

using config::ExperimentConfig;

// --------------------------- CSV helpers ---------------------------------------

namespace detail {

inline std::string csv_num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string provenance(const ExperimentConfig& cfg) {
    std::string out = "# qsync " + cfg.experiment + "\n# config:\n";
    const std::string toml = config::emit_config(cfg);
    std::size_t pos = 0;
    while (pos < toml.size()) {
        const std::size_t nl = toml.find('\n', pos);
        const std::string line = toml.substr(pos, nl - pos);
        out += line.empty() ? "#\n" : "# " + line + "\n";
        pos = nl + 1;
    }
    return out;
}

template <typename Fn>
void parallel_for(int n, int jobs, Fn&& fn) {
    if (jobs <= 0) jobs = static_cast<int>(std::thread::hardware_concurrency());
    jobs = std::max(1, std::min(jobs, n));
    if (jobs == 1) {
        for (int k = 0; k < n; ++k) fn(k);
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(jobs);
    for (int w = 0; w < jobs; ++w) {
        pool.emplace_back([&] {
            for (int k = next.fetch_add(1); k < n; k = next.fetch_add(1)) fn(k);
        });
    }
    for (auto& th : pool) th.join();
}

}  // namespace detail

// --------------------------- Shared run pipeline -------------------------------

struct RunSummary {
    RunResult run;
    SyncAverages avg;
    double discord_avg = std::numeric_limits<double>::quiet_NaN();
    double negativity_avg = std::numeric_limits<double>::quiet_NaN();
};

// One pair integration plus time averages over the recording window.
inline RunSummary summarize_pair_run(const SystemParams& params, const IntegratorConfig& integrator,
                                     bool correlations) {
    RecordOptions opts;
    opts.site_pairs = {{0, 1}};
    opts.correlations = correlations;
    RunSummary out;
    out.run = run(params, integrator, opts);
    const PairSeries& series = out.run.pairs[0];
    out.avg = time_average(series.sync, out.run.record_t0, out.run.record_t1);
    if (correlations) {
        std::vector<double> t(series.corr.size()), dg(series.corr.size()), en(series.corr.size());
        for (std::size_t k = 0; k < series.corr.size(); ++k) {
            t[k] = series.corr[k].t;
            dg[k] = series.corr[k].discord;
            en[k] = series.corr[k].log_negativity;
        }
        out.discord_avg = trapezoid_mean(t, dg, out.run.record_t0, out.run.record_t1);
        out.negativity_avg = trapezoid_mean(t, en, out.run.record_t0, out.run.record_t1);
    }
    return out;
}

// --------------------------- pair-trace ----------------------------------------

struct PairTraceResult {
    RunSummary summary;
    std::string csv;
    int exit_code = 0;
};

inline PairTraceResult run_pair_trace(const ExperimentConfig& cfg) {
    if (cfg.params.topology != Topology::pair) {
        throw config::config_error("pair-trace: params.topology must be \"pair\"");
    }
    PairTraceResult out;
    out.summary = summarize_pair_run(cfg.params, cfg.integrator, true);
    const RunResult& res = out.summary.run;
    const PairSeries& series = res.pairs[0];

    std::string csv = detail::provenance(cfg);
    csv += "t_tau,S_c,S_p,var_qminus,var_pminus,var_pminus_rot,D_G,E_N,bound_ok,hierarchy_ok,squeezing\n";
    for (std::size_t k = 0; k < series.sync.size(); ++k) {
        const SyncSample& s = series.sync[k];
        const BoundReport& b = series.bounds[k];
        const CorrelationSample& c = series.corr[k];
        csv += detail::csv_num(s.t / res.tau);
        csv += ',';
        csv += detail::csv_num(s.s_c);
        csv += ',';
        csv += detail::csv_num(s.s_p);
        csv += ',';
        csv += detail::csv_num(s.var_qminus);
        csv += ',';
        csv += detail::csv_num(s.var_pminus);
        csv += ',';
        csv += detail::csv_num(s.var_pminus_rot);
        csv += ',';
        csv += detail::csv_num(c.discord);
        csv += ',';
        csv += detail::csv_num(c.log_negativity);
        csv += ',';
        csv += b.complete_bound_ok && b.heisenberg_ok ? '1' : '0';
        csv += ',';
        csv += b.hierarchy_ok ? '1' : '0';
        csv += ',';
        csv += b.squeezing_flag ? '1' : '0';
        csv += '\n';
    }
    csv += "# summary S_c_avg=" + detail::csv_num(out.summary.avg.s_c) +
           " S_p_avg=" + detail::csv_num(out.summary.avg.s_p) +
           " D_G_avg=" + detail::csv_num(out.summary.discord_avg) +
           " E_N_avg=" + detail::csv_num(out.summary.negativity_avg) +
           " hierarchy_violations=" + std::to_string(res.hierarchy_violations) +
           " min_phys_eig=" + detail::csv_num(res.min_phys_eig) + "\n";
    out.csv = csv;
    return out;
}

// --------------------------- sweeps --------------------------------------------

struct SweepRow {
    double x = 0.0;
    bool ok = false;
    std::string status;  // ok | no-limit-cycle | diverged | nonphysical | error: ...
    SyncAverages avg;
    double discord_avg = std::numeric_limits<double>::quiet_NaN();
    double negativity_avg = std::numeric_limits<double>::quiet_NaN();
    double min_phys_eig = std::numeric_limits<double>::quiet_NaN();
};

struct SweepResult {
    std::vector<SweepRow> rows;
    std::string csv;
    int exit_code = 0;  // 2 when some points failed
};

namespace detail {

template <typename MakeParams>
std::vector<SweepRow> sweep_rows(const std::vector<double>& grid, const IntegratorConfig& integrator,
                                 bool correlations, int jobs, MakeParams&& make_params) {
    std::vector<SweepRow> rows(grid.size());
    parallel_for(static_cast<int>(grid.size()), jobs, [&](int k) {
        SweepRow& row = rows[k];
        row.x = grid[k];
        try {
            const RunSummary summary = summarize_pair_run(make_params(grid[k]), integrator, correlations);
            row.ok = true;
            row.status = "ok";
            row.avg = summary.avg;
            row.discord_avg = summary.discord_avg;
            row.negativity_avg = summary.negativity_avg;
            row.min_phys_eig = summary.run.min_phys_eig;
        } catch (const no_limit_cycle_error&) {
            row.status = "no-limit-cycle";
        } catch (const divergence_error&) {
            row.status = "diverged";
        } catch (const nonphysical_error&) {
            row.status = "nonphysical";
        } catch (const std::exception& e) {
            row.status = std::string("error: ") + e.what();
        }
    });
    return rows;
}

}  // namespace detail

// Sweep over the coupling μ: time-averaged measures and correlations. Points that
// destroy the limit cycle are marked failed and the sweep continues.
inline SweepResult run_sweep_mu(const ExperimentConfig& cfg, int jobs = 0) {
    if (cfg.sweep.mu_values.empty()) throw config::config_error("sweep-mu: sweep.mu_values is empty");
    SweepResult out;
    out.rows = detail::sweep_rows(cfg.sweep.mu_values, cfg.integrator, true, jobs, [&](double mu) {
        SystemParams p = cfg.params;
        p.mu = mu;
        return p;
    });
    std::string csv = detail::provenance(cfg);
    csv += "mu,S_c_avg,S_p_avg,D_G_avg,E_N_avg,status\n";
    for (const SweepRow& row : out.rows) {
        csv += detail::csv_num(row.x) + "," +
               detail::csv_num(row.ok ? row.avg.s_c : std::numeric_limits<double>::quiet_NaN()) + "," +
               detail::csv_num(row.ok ? row.avg.s_p : std::numeric_limits<double>::quiet_NaN()) + "," +
               detail::csv_num(row.discord_avg) + "," + detail::csv_num(row.negativity_avg) + "," +
               row.status + "\n";
        if (!row.ok) out.exit_code = 2;
    }
    out.csv = csv;
    return out;
}

// Sweep over the bath occupation n_b: time-averaged measures.
inline SweepResult run_sweep_nb(const ExperimentConfig& cfg, int jobs = 0) {
    if (cfg.sweep.nb_values.empty()) throw config::config_error("sweep-nb: sweep.nb_values is empty");
    for (double nb : cfg.sweep.nb_values) {
        if (!(nb >= 0.0)) throw config::config_error("sweep-nb: nb values must be >= 0");
    }
    SweepResult out;
    out.rows = detail::sweep_rows(cfg.sweep.nb_values, cfg.integrator, false, jobs, [&](double nb) {
        SystemParams p = cfg.params;
        p.n_b = nb;
        return p;
    });
    std::string csv = detail::provenance(cfg);
    csv += "n_b,S_c_avg,S_p_avg,status\n";
    for (const SweepRow& row : out.rows) {
        csv += detail::csv_num(row.x) + "," +
               detail::csv_num(row.ok ? row.avg.s_c : std::numeric_limits<double>::quiet_NaN()) + "," +
               detail::csv_num(row.ok ? row.avg.s_p : std::numeric_limits<double>::quiet_NaN()) + "," +
               row.status + "\n";
        if (!row.ok) out.exit_code = 2;
    }
    out.csv = csv;
    return out;
}

// --------------------------- chain ----------------------------------------------

struct ChainResult {
    int n_sites = 0;
    int h_max = 0;
    std::vector<int> h;           // 1 .. n_sites-1 (full ring, for symmetry checks)
    std::vector<double> s_c_avg;  // aligned with h
    double min_phys_eig = std::numeric_limits<double>::quiet_NaN();
    std::string csv;
    int exit_code = 0;
};

// N-site ring: time-averaged S_c between the mechanical modes of sites (0, h).
// The classical trajectory is the uniform mean-field solution; fluctuations
// keep the full 4N x 4N structure. One integration yields every distance.
inline ChainResult run_chain(const ExperimentConfig& cfg) {
    const int n = cfg.sweep.chain_sites;
    if (n < 3) throw config::config_error("chain: sweep.chain_sites must be >= 3");
    ChainResult out;
    out.n_sites = n;
    out.h_max = cfg.sweep.h_max > 0 ? cfg.sweep.h_max : n / 2;
    if (out.h_max < 1 || out.h_max > n - 1) throw config::config_error("chain: h_max out of range");

    SystemParams params = SystemParams::uniform_ring(n);
    params.omega.setConstant(cfg.params.omega(0));
    params.delta = params.omega;
    params.kappa = cfg.params.kappa;
    params.gamma = cfg.params.gamma;
    params.g = cfg.params.g;
    params.E = cfg.params.E;
    params.mu = cfg.params.mu;
    params.n_b = cfg.params.n_b;

    RecordOptions opts;
    opts.site_pairs.clear();
    for (int h = 1; h < n; ++h) opts.site_pairs.push_back({0, h});
    opts.correlations = false;

    const RunResult res = run(params, cfg.integrator, opts);
    out.min_phys_eig = res.min_phys_eig;
    for (int h = 1; h < n; ++h) {
        const SyncAverages avg = time_average(res.pairs[h - 1].sync, res.record_t0, res.record_t1);
        out.h.push_back(h);
        out.s_c_avg.push_back(avg.s_c);
    }

    std::string csv = detail::provenance(cfg);
    csv += "h,S_c_avg\n";
    for (int h = 1; h <= out.h_max; ++h) {
        csv += std::to_string(h) + "," + detail::csv_num(out.s_c_avg[h - 1]) + "\n";
    }
    out.csv = csv;
    return out;
}

// --------------------------- ou-check ------------------------------------------

struct OuCheckResult {
    Eigen::Matrix2d analytic = Eigen::Matrix2d::Zero();
    Eigen::Matrix2d numeric = Eigen::Matrix2d::Zero();
    double max_abs_dev = 0.0;
    bool anisotropy_ok = false;  // Σ_pp ≥ Σ_qq
    std::string csv;
    int exit_code = 0;
};

// Closed-form steady state of the 2x2 anti-symmetric mode model vs direct RK4
// integration of dΣ/dt = MΣ + ΣMᵀ + dI from Σ = 0.
inline OuCheckResult run_ou_check(const ExperimentConfig& cfg) {
    const OuModel model{cfg.ou.gamma_eff, cfg.ou.mu, cfg.ou.d};
    OuCheckResult out;
    out.analytic = ou_steady_state(model);

    const Eigen::Matrix2d m = ou_drift(model);
    const Eigen::Matrix2d diff = cfg.ou.d * Eigen::Matrix2d::Identity();
    auto rhs = [&](const Eigen::Matrix2d& s) -> Eigen::Matrix2d { return m * s + s * m.transpose() + diff; };
    Eigen::Matrix2d sigma = Eigen::Matrix2d::Zero();
    const double dt = cfg.ou.dt;
    const long n_steps = std::llround(cfg.ou.t_max / dt);
    for (long k = 0; k < n_steps; ++k) {
        const Eigen::Matrix2d k1 = rhs(sigma);
        const Eigen::Matrix2d k2 = rhs(sigma + 0.5 * dt * k1);
        const Eigen::Matrix2d k3 = rhs(sigma + 0.5 * dt * k2);
        const Eigen::Matrix2d k4 = rhs(sigma + dt * k3);
        sigma += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out.numeric = sigma;
    out.max_abs_dev = (out.analytic - out.numeric).cwiseAbs().maxCoeff();
    out.anisotropy_ok = out.numeric(1, 1) >= out.numeric(0, 0);
    out.exit_code = (out.anisotropy_ok && out.max_abs_dev < cfg.ou.tol) ? 0 : 1;

    std::string csv = detail::provenance(cfg);
    csv += "quantity,value\n";
    csv += "sigma_qq_analytic," + detail::csv_num(out.analytic(0, 0)) + "\n";
    csv += "sigma_qp_analytic," + detail::csv_num(out.analytic(0, 1)) + "\n";
    csv += "sigma_pp_analytic," + detail::csv_num(out.analytic(1, 1)) + "\n";
    csv += "sigma_qq_numeric," + detail::csv_num(out.numeric(0, 0)) + "\n";
    csv += "sigma_qp_numeric," + detail::csv_num(out.numeric(0, 1)) + "\n";
    csv += "sigma_pp_numeric," + detail::csv_num(out.numeric(1, 1)) + "\n";
    csv += "max_abs_deviation," + detail::csv_num(out.max_abs_dev) + "\n";
    csv += "anisotropy," + detail::csv_num(out.numeric(1, 1) - out.numeric(0, 0)) + "\n";
    csv += std::string("anisotropy_ok,") + (out.anisotropy_ok ? "1" : "0") + "\n";
    out.csv = csv;
    return out;
}

}  // namespace qsync::experiments
