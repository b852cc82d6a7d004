// dynamics.hpp — Joint propagation of the classical mean-field ODE and the
// covariance (Lyapunov) ODE  dC/dt = A(t) C + C A(t)ᵀ + D, plus the 2x2
// normal-mode model with its closed-form steady state.
//
// Fixed-step RK4 over the joint state; A(t) is evaluated from the
// concurrently-integrated classical trajectory at the substep states. The
// noise enters only through the constant diffusion matrix D, which is exact
// for the linearized Gaussian dynamics; no stochastic sampling is needed.

#pragma once

#include "correlations.hpp"
#include "gaussian.hpp"
#include "optomech.hpp"
#include "sync_measures.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

namespace qsync {

// Reference period τ = 2π/ω_1 with ω_1 = 1.
inline constexpr double kTau = 6.283185307179586;

struct divergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct no_limit_cycle_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --------------------------- Configuration ------------------------------------

struct IntegratorConfig {
    int steps_per_tau = 1000;       // dt = τ / steps_per_tau
    double transient_tau = 1000.0;  // discarded, units of τ
    double record_tau = 500.0;      // recording window, units of τ
    int samples_per_tau = 20;
    double amplitude_floor = kAmplitudeFloor;
    double physicality_tol = kPhysicalityTol;
    double limit_cycle_threshold = 1e-6;  // on max |dβ/dt| over a full τ
    double bound_tol = 1e-9;

    double dt() const { return kTau / steps_per_tau; }

    void validate() const {
        if (steps_per_tau <= 0) throw std::invalid_argument("IntegratorConfig: steps_per_tau must be > 0");
        if (samples_per_tau <= 0) throw std::invalid_argument("IntegratorConfig: samples_per_tau must be > 0");
        if (steps_per_tau % samples_per_tau != 0) {
            throw std::invalid_argument("IntegratorConfig: samples_per_tau must divide steps_per_tau");
        }
        if (!(transient_tau >= 0.0)) throw std::invalid_argument("IntegratorConfig: transient_tau must be >= 0");
        if (!(record_tau > 0.0)) throw std::invalid_argument("IntegratorConfig: record_tau must be > 0");
    }

    bool operator==(const IntegratorConfig&) const = default;
};

struct JointState {
    double t = 0.0;
    ClassicalState classical;
    Eigen::MatrixXd cm;
};

// --------------------------- Propagator ---------------------------------------

// Owns all integration workspace; one instance per run (not thread-safe, but
// independent instances are). The Lyapunov right-hand side uses the block
// sparsity of A: each row of A·C is a short combination of rows of C, which
// keeps the chain-sized (80x80) propagation far below dense-GEMM cost.
class Propagator {
  public:
    explicit Propagator(SystemParams params) : params_(std::move(params)) {
        params_.validate();
        const int n = params_.n_sites;
        const int dim = 4 * n;
        diffusion_ = diffusion_matrix(params_);
        neighbors_.resize(n);
        for (int j = 0; j < n; ++j) neighbors_[j] = params_.neighbors(j);
        for (Eigen::MatrixXd* mat : {&ac_, &km1_, &km2_, &km3_, &km4_, &cm_stage_, &ctmp_}) {
            mat->resize(dim, dim);
        }
        for (ClassicalState* c : {&kc1_, &kc2_, &kc3_, &kc4_, &c_stage_}) {
            *c = ClassicalState::zero(n);
        }
    }

    const SystemParams& params() const { return params_; }

    // ac = A(classical) * cm without materializing A
    void drift_apply_into(const ClassicalState& c, const Eigen::MatrixXd& cm,
                          Eigen::MatrixXd& ac) const {
        const double kappa = params_.kappa;
        const double gamma = params_.gamma;
        const double mu = params_.mu;
        for (int j = 0; j < params_.n_sites; ++j) {
            const int o = 4 * j;
            const int m = 4 * j + 2;
            const double g2r = 2.0 * params_.g * c.alpha(j).real();
            const double g2i = 2.0 * params_.g * c.alpha(j).imag();
            const double dtilde = params_.delta(j) + 2.0 * params_.g * c.beta(j).real();
            const double omega = params_.omega(j);
            ac.row(o) = -kappa * cm.row(o) - dtilde * cm.row(o + 1) - g2i * cm.row(m);
            ac.row(o + 1) = dtilde * cm.row(o) - kappa * cm.row(o + 1) + g2r * cm.row(m);
            ac.row(m) = -gamma * cm.row(m) + omega * cm.row(m + 1);
            ac.row(m + 1) = g2r * cm.row(o) + g2i * cm.row(o + 1) - omega * cm.row(m) -
                            gamma * cm.row(m + 1);
            for (int k : neighbors_[j]) {
                ac.row(m) -= mu * cm.row(4 * k + 3);
                ac.row(m + 1) += mu * cm.row(4 * k + 2);
            }
        }
    }

    void lyapunov_rhs(const ClassicalState& c, const Eigen::MatrixXd& cm, Eigen::MatrixXd& out) {
        drift_apply_into(c, cm, ac_);
        out = ac_ + ac_.transpose() + diffusion_;
    }

    // Fourth-order joint update; the covariance is re-symmetrized after the step.
    void step(JointState& state, double dt) {
        const double h2 = dt / 2.0;

        classical_rhs_into(state.classical, params_, kc1_);
        lyapunov_rhs(state.classical, state.cm, km1_);
        last_beta_deriv_max_ = kc1_.beta.cwiseAbs().maxCoeff();

        stage_state(state, kc1_, km1_, h2);
        classical_rhs_into(c_stage_, params_, kc2_);
        lyapunov_rhs(c_stage_, cm_stage_, km2_);

        stage_state(state, kc2_, km2_, h2);
        classical_rhs_into(c_stage_, params_, kc3_);
        lyapunov_rhs(c_stage_, cm_stage_, km3_);

        stage_state(state, kc3_, km3_, dt);
        classical_rhs_into(c_stage_, params_, kc4_);
        lyapunov_rhs(c_stage_, cm_stage_, km4_);

        const double h6 = dt / 6.0;
        state.classical.alpha += h6 * (kc1_.alpha + 2.0 * kc2_.alpha + 2.0 * kc3_.alpha + kc4_.alpha);
        state.classical.beta += h6 * (kc1_.beta + 2.0 * kc2_.beta + 2.0 * kc3_.beta + kc4_.beta);
        state.cm += h6 * (km1_ + 2.0 * km2_ + 2.0 * km3_ + km4_);
        ctmp_ = state.cm.transpose();
        state.cm += ctmp_;
        state.cm *= 0.5;
        state.t += dt;
    }

    // max_j |dβ_j/dt| evaluated at the start of the most recent step
    double last_beta_deriv_max() const { return last_beta_deriv_max_; }

  private:
    void stage_state(const JointState& base, const ClassicalState& kc, const Eigen::MatrixXd& km,
                     double h) {
        c_stage_.alpha = base.classical.alpha + h * kc.alpha;
        c_stage_.beta = base.classical.beta + h * kc.beta;
        cm_stage_ = base.cm + h * km;
    }

    SystemParams params_;
    Eigen::MatrixXd diffusion_;
    std::vector<std::vector<int>> neighbors_;
    Eigen::MatrixXd ac_, km1_, km2_, km3_, km4_, cm_stage_, ctmp_;
    ClassicalState kc1_, kc2_, kc3_, kc4_, c_stage_;
    double last_beta_deriv_max_ = 0.0;
};

// Single-step convenience wrapper with divergence check.
inline JointState step(const JointState& state, const SystemParams& params, double dt) {
    Propagator prop(params);
    JointState out = state;
    prop.step(out, dt);
    if (!out.classical.all_finite() || !out.cm.allFinite()) {
        throw divergence_error("step: state diverged at t = " + std::to_string(out.t));
    }
    return out;
}

// --------------------------- Full runs -----------------------------------------

struct RecordOptions {
    // Site pairs whose mechanical modes are measured; defaults to the pair (0, 1).
    std::vector<std::pair<int, int>> site_pairs = {{0, 1}};
    bool correlations = true;
    bool symmetrized_discord = false;
    bool require_limit_cycle = true;
    bool track_drift_spectrum = false;
    std::function<void(const JointState&)> observer;
};

struct PairSeries {
    int site_i = 0;
    int site_j = 1;
    std::vector<SyncSample> sync;
    std::vector<BoundReport> bounds;
    std::vector<CorrelationSample> corr;  // empty unless correlations recorded
    std::vector<double> phase_diff;       // arg<b_i> - arg<b_j>, classical-locking diagnostic
};

struct RunResult {
    double tau = kTau;
    std::vector<double> t;  // sample times, units of 1/ω_1
    std::vector<PairSeries> pairs;
    std::vector<Eigen::VectorXcd> alpha_trace;
    std::vector<Eigen::VectorXcd> beta_trace;
    double record_t0 = 0.0;
    double record_t1 = 0.0;
    double min_phys_eig = std::numeric_limits<double>::infinity();
    long hierarchy_violations = 0;
    double max_drift_eig_real = std::numeric_limits<double>::quiet_NaN();
};

// Deterministic symmetry-breaking start: α_j = 0 and a phase kick on β for
// the pair; the ring starts uniform so that the classical trajectory is the
// synchronized mean-field solution shared by all sites.
inline ClassicalState default_initial_classical(const SystemParams& params) {
    ClassicalState state = ClassicalState::zero(params.n_sites);
    for (int j = 0; j < params.n_sites; ++j) {
        if (params.topology == Topology::ring) {
            state.beta(j) = 0.1;
        } else {
            const double phase = 2.0 * M_PI * j / params.n_sites;
            state.beta(j) = 0.1 * std::exp(std::complex<double>(0.0, phase));
        }
    }
    return state;
}

namespace detail {

inline void record_sample(const JointState& state, const SystemParams& params,
                          const IntegratorConfig& cfg, const RecordOptions& opts, RunResult& res) {
    if (!state.cm.allFinite()) {
        throw divergence_error("run: covariance matrix diverged at t = " + std::to_string(state.t));
    }
    const double eig = min_physicality_eig(state.cm);
    res.min_phys_eig = std::min(res.min_phys_eig, eig);
    if (eig < -cfg.physicality_tol) {
        throw nonphysical_error("run: covariance matrix lost physicality at t = " +
                                std::to_string(state.t) + " (min eig = " + std::to_string(eig) + ")");
    }
    res.t.push_back(state.t);
    res.alpha_trace.push_back(state.classical.alpha);
    res.beta_trace.push_back(state.classical.beta);

    const ModeLayout layout = params.layout();
    for (PairSeries& series : res.pairs) {
        const TwoModeCM pair = extract_pair(state.cm, layout.mechanical_mode(series.site_i),
                                            layout.mechanical_mode(series.site_j));

        SyncSample sample;
        sample.t = state.t;
        const CompleteSync cs = s_complete(pair);
        sample.s_c = cs.s_c;
        sample.var_qminus = cs.var_qminus;
        sample.var_pminus = cs.var_pminus;
        const auto phases = mechanical_phases(state.classical.beta(series.site_i),
                                              state.classical.beta(series.site_j),
                                              cfg.amplitude_floor);
        if (phases) {
            const PhaseSync ps = s_phase(pair, *phases);
            sample.s_p = ps.s_p;
            sample.var_pminus_rot = ps.var_pminus_rot;
            sample.var_qminus_rot = ps.var_qminus_rot;
            sample.squeezing_flag = ps.squeezing_flag;
            sample.phase_valid = true;
        } else {
            sample.phase_valid = false;
        }
        const BoundReport report = check_bounds(sample, cfg.bound_tol);
        if (sample.phase_valid && !report.hierarchy_ok) ++res.hierarchy_violations;
        series.sync.push_back(sample);
        series.bounds.push_back(report);
        series.phase_diff.push_back(phases
                                        ? std::remainder(phases->phi_1 - phases->phi_2, 2.0 * M_PI)
                                        : std::numeric_limits<double>::quiet_NaN());

        if (opts.correlations) {
            CorrelationSample corr;
            corr.t = state.t;
            corr.discord = gaussian_discord(pair, opts.symmetrized_discord);
            corr.log_negativity = log_negativity(pair);
            series.corr.push_back(corr);
        }
    }

    if (opts.track_drift_spectrum) {
        const Eigen::MatrixXd a = drift_matrix(state.classical, params);
        Eigen::EigenSolver<Eigen::MatrixXd> solver(a, false);
        const double max_re = solver.eigenvalues().real().maxCoeff();
        if (std::isnan(res.max_drift_eig_real) || max_re > res.max_drift_eig_real) {
            res.max_drift_eig_real = max_re;
        }
    }
    if (opts.observer) opts.observer(state);
}

}  // namespace detail

// Integrate from the standard initial condition, discard the transient, then
// record synchronization measures, bounds and (optionally) correlation
// measures at the sample stride. Throws no_limit_cycle_error when the
// classical trajectory has settled to a fixed point by the end of the
// transient, divergence_error on non-finite state, nonphysical_error when the
// covariance drifts outside physicality tolerance.
inline RunResult run(const SystemParams& params, const IntegratorConfig& cfg,
                     const RecordOptions& opts = {},
                     const std::optional<ClassicalState>& initial = std::nullopt) {
    params.validate();
    cfg.validate();
    for (const auto& [i, j] : opts.site_pairs) {
        params.layout().check_site(i);
        params.layout().check_site(j);
        if (i == j) throw std::invalid_argument("run: site pair must have distinct sites");
    }

    const double dt = cfg.dt();
    const long n_transient = std::llround(cfg.transient_tau * cfg.steps_per_tau);
    const long n_record = std::llround(cfg.record_tau * cfg.steps_per_tau);
    const long stride = cfg.steps_per_tau / cfg.samples_per_tau;

    JointState state;
    state.t = 0.0;
    state.classical = initial ? *initial : default_initial_classical(params);
    if (state.classical.alpha.size() != params.n_sites || state.classical.beta.size() != params.n_sites) {
        throw std::invalid_argument("run: initial classical state does not match n_sites");
    }
    state.cm = vacuum_cm(params.layout(), params.n_b).m;

    Propagator prop(params);
    RunResult res;
    for (const auto& [i, j] : opts.site_pairs) {
        PairSeries series;
        series.site_i = i;
        series.site_j = j;
        res.pairs.push_back(std::move(series));
    }

    const long watch_start = std::max<long>(0, n_transient - cfg.steps_per_tau);
    double max_beta_deriv = 0.0;
    for (long s = 0; s < n_transient; ++s) {
        prop.step(state, dt);
        if (!state.classical.all_finite()) {
            throw divergence_error("run: classical state diverged at t = " + std::to_string(state.t));
        }
        if (s >= watch_start) max_beta_deriv = std::max(max_beta_deriv, prop.last_beta_deriv_max());
    }
    if (opts.require_limit_cycle && n_transient > 0 && max_beta_deriv < cfg.limit_cycle_threshold) {
        throw no_limit_cycle_error(
            "run: no limit cycle, classical trajectory settled to a fixed point (max |dβ/dt| = " +
            std::to_string(max_beta_deriv) + " over the last τ of the transient)");
    }

    res.record_t0 = state.t;
    for (long s = 0; s <= n_record; ++s) {
        if (s % stride == 0) detail::record_sample(state, params, cfg, opts, res);
        if (s == n_record) break;
        prop.step(state, dt);
        if (!state.classical.all_finite()) {
            throw divergence_error("run: classical state diverged at t = " + std::to_string(state.t));
        }
    }
    res.record_t1 = state.t;
    return res;
}

// --------------------------- Normal-mode OU model ------------------------------

// Anti-symmetric relative mode: amplitude damping γ_eff, phase pinned by the
// 2μ frequency shift, isotropic diffusion d.
struct OuModel {
    double gamma_eff = 0.01;
    double mu = 0.02;
    double d = 0.001;
};

inline Eigen::Matrix2d ou_drift(const OuModel& model) {
    Eigen::Matrix2d m;
    m << -model.gamma_eff, -2.0 * model.mu, 2.0 * model.mu, 0.0;
    return m;
}

// Closed-form solution of M Σ + Σ Mᵀ + d·I = 0 for the anti-symmetric mode:
//   Σ_qq = d/γ_eff,  Σ_pp = d/γ_eff + γ_eff d/(8μ²),  Σ_qp = −d/(4μ).
// Σ_pp ≥ Σ_qq always: phase noise exceeds amplitude noise.
inline Eigen::Matrix2d ou_steady_state(const OuModel& model) {
    if (!(model.gamma_eff > 0.0)) throw std::invalid_argument("ou_steady_state: gamma_eff must be > 0");
    if (!(model.d >= 0.0)) throw std::invalid_argument("ou_steady_state: d must be >= 0");
    if (model.mu == 0.0) {
        throw std::invalid_argument("ou_steady_state: mu = 0 leaves the phase free to diffuse (no steady state)");
    }
    const double qq = model.d / model.gamma_eff;
    const double qp = -model.d / (4.0 * model.mu);
    const double pp = qq + model.gamma_eff * model.d / (8.0 * model.mu * model.mu);
    Eigen::Matrix2d sigma;
    sigma << qq, qp, qp, pp;
    return sigma;
}

}  // namespace qsync
