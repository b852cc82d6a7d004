// optomech.hpp — Driven optomechanical pair / closed chain: parameters,
// classical mean-field vector field, and the drift/diffusion matrices of the
// linearized quadrature fluctuations.
//
// Mean-field equations per site (ħ = 1, rates in units of ω_1):
//   dα_j/dt = (−κ + iΔ_j + 2ig Re β_j) α_j + E
//   dβ_j/dt = (−γ − iω_j) β_j + ig|α_j|² + iμ Σ_{k∈nb(j)} β_k
// The drift matrix is the Jacobian of this field in quadrature variables;
// that identity pins every sign and factor and is enforced by tests.

#pragma once

#include "gaussian.hpp"

#include <Eigen/Dense>

#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsync {

enum class Topology {
    pair,  // two sites, single mutual coupling term
    ring   // closed chain, nearest neighbors, n_sites >= 3
};

inline const char* to_string(Topology t) { return t == Topology::pair ? "pair" : "ring"; }

// --------------------------- Parameters ---------------------------------------

struct SystemParams {
    Topology topology = Topology::pair;
    int n_sites = 2;
    Eigen::VectorXd omega;  // per-site mechanical frequency
    Eigen::VectorXd delta;  // per-site optical detuning (blue-driven regime: Δ_j = ω_j)
    double kappa = 0.15;    // optical damping
    double gamma = 0.005;   // mechanical damping
    double g = 0.005 / (2.0 * M_PI);  // single-photon coupling, angular units (0.005 per cycle)
    double E = 320.0;       // drive amplitude
    double mu = 0.02;       // phonon tunneling strength
    double n_b = 0.0;       // mechanical bath occupation

    ModeLayout layout() const { return ModeLayout{n_sites}; }

    void validate() const {
        if (n_sites < 1) throw std::invalid_argument("SystemParams: n_sites must be >= 1");
        if (topology == Topology::pair && n_sites > 2) {
            throw std::invalid_argument("SystemParams: pair topology requires n_sites <= 2");
        }
        if (topology == Topology::ring && n_sites < 3) {
            throw std::invalid_argument("SystemParams: ring topology requires n_sites >= 3");
        }
        if (omega.size() != n_sites || delta.size() != n_sites) {
            throw std::invalid_argument("SystemParams: omega/delta must have one entry per site");
        }
        if (!(kappa > 0.0)) throw std::invalid_argument("SystemParams: kappa must be > 0");
        if (!(gamma > 0.0)) throw std::invalid_argument("SystemParams: gamma must be > 0");
        if (!(n_b >= 0.0)) throw std::invalid_argument("SystemParams: n_b must be >= 0");
        if (!(E >= 0.0)) throw std::invalid_argument("SystemParams: E must be >= 0");
    }

    std::vector<int> neighbors(int site) const {
        if (site < 0 || site >= n_sites) throw std::out_of_range("SystemParams: site out of range");
        if (n_sites == 1) return {};
        if (topology == Topology::pair) return {1 - site};
        return {(site + 1) % n_sites, (site + n_sites - 1) % n_sites};
    }

    // Default driven pair: slightly mismatched mechanical frequencies and the
    // blue-sideband drive condition Δ_j = ω_j that sustains the limit cycles.
    static SystemParams default_pair() {
        SystemParams p;
        p.topology = Topology::pair;
        p.n_sites = 2;
        p.omega = Eigen::Vector2d(1.0, 1.005);
        p.delta = p.omega;
        return p;
    }

    // One isolated site (no tunneling partner); used for uncoupled baselines.
    static SystemParams single_site(double omega_site = 1.0) {
        SystemParams p;
        p.topology = Topology::pair;
        p.n_sites = 1;
        p.omega = Eigen::VectorXd::Constant(1, omega_site);
        p.delta = p.omega;
        return p;
    }

    // Uniform closed chain with ω = 1 on every site; the remaining rates keep
    // the pair defaults.
    static SystemParams uniform_ring(int n) {
        SystemParams p;
        p.topology = Topology::ring;
        p.n_sites = n;
        p.omega = Eigen::VectorXd::Constant(n, 1.0);
        p.delta = p.omega;
        return p;
    }
};

// --------------------------- Classical state ----------------------------------

struct ClassicalState {
    Eigen::VectorXcd alpha;  // optical amplitudes ⟨a_j⟩
    Eigen::VectorXcd beta;   // mechanical amplitudes ⟨b_j⟩

    static ClassicalState zero(int n_sites) {
        return {Eigen::VectorXcd::Zero(n_sites), Eigen::VectorXcd::Zero(n_sites)};
    }

    bool all_finite() const { return alpha.allFinite() && beta.allFinite(); }
};

inline void classical_rhs_into(const ClassicalState& state, const SystemParams& params,
                               ClassicalState& out) {
    const int n = params.n_sites;
    out.alpha.resize(n);
    out.beta.resize(n);
    const std::complex<double> i_unit(0.0, 1.0);
    for (int j = 0; j < n; ++j) {
        const std::complex<double> alpha = state.alpha(j);
        const std::complex<double> beta = state.beta(j);
        out.alpha(j) =
            (std::complex<double>(-params.kappa, params.delta(j) + 2.0 * params.g * beta.real())) * alpha +
            params.E;
        std::complex<double> neighbor_sum(0.0, 0.0);
        for (int k : params.neighbors(j)) neighbor_sum += state.beta(k);
        out.beta(j) = std::complex<double>(-params.gamma, -params.omega(j)) * beta +
                      i_unit * params.g * std::norm(alpha) + i_unit * params.mu * neighbor_sum;
    }
}

inline ClassicalState classical_rhs(const ClassicalState& state, const SystemParams& params) {
    ClassicalState out;
    classical_rhs_into(state, params, out);
    return out;
}

// --------------------------- Drift matrix -------------------------------------

// Linearized-fluctuation drift A(t), 4N x 4N, in the (q_a, p_a, q_b, p_b)
// per-site ordering. Block structure per site j, with Δ̃_j = Δ_j + 2g Re β_j
// and α_j = α_r + i α_i:
//   optical:      [[−κ, −Δ̃], [Δ̃, −κ]]
//   opt <- mech:  [[−2g α_i, 0], [2g α_r, 0]]
//   mechanical:   [[−γ, ω], [−ω, −γ]]
//   mech <- opt:  [[0, 0], [2g α_r, 2g α_i]]
//   mech <- mech (neighbors): [[0, −μ], [μ, 0]]
inline void drift_matrix_into(const ClassicalState& state, const SystemParams& params,
                              Eigen::MatrixXd& a) {
    const int n = params.n_sites;
    const int dim = 4 * n;
    a.setZero(dim, dim);
    for (int j = 0; j < n; ++j) {
        const int o = 4 * j;      // optical quadrature rows
        const int m = 4 * j + 2;  // mechanical quadrature rows
        const double alpha_r = state.alpha(j).real();
        const double alpha_i = state.alpha(j).imag();
        const double dtilde = params.delta(j) + 2.0 * params.g * state.beta(j).real();

        a(o, o) = -params.kappa;
        a(o, o + 1) = -dtilde;
        a(o + 1, o) = dtilde;
        a(o + 1, o + 1) = -params.kappa;

        a(o, m) = -2.0 * params.g * alpha_i;
        a(o + 1, m) = 2.0 * params.g * alpha_r;

        a(m, m) = -params.gamma;
        a(m, m + 1) = params.omega(j);
        a(m + 1, m) = -params.omega(j);
        a(m + 1, m + 1) = -params.gamma;

        a(m + 1, o) = 2.0 * params.g * alpha_r;
        a(m + 1, o + 1) = 2.0 * params.g * alpha_i;

        for (int k : params.neighbors(j)) {
            a(m, 4 * k + 3) = -params.mu;
            a(m + 1, 4 * k + 2) = params.mu;
        }
    }
}

inline Eigen::MatrixXd drift_matrix(const ClassicalState& state, const SystemParams& params) {
    Eigen::MatrixXd a;
    drift_matrix_into(state, params, a);
    return a;
}

// --------------------------- Diffusion matrix ---------------------------------

// Constant diagonal: κ on optical quadratures, γ(2 n_b + 1) on mechanical
// ones. An isolated optical mode then relaxes to variance D/(2κ) = 1/2.
inline Eigen::MatrixXd diffusion_matrix(const SystemParams& params) {
    const int dim = 4 * params.n_sites;
    Eigen::VectorXd diag(dim);
    const double mech = params.gamma * (2.0 * params.n_b + 1.0);
    for (int j = 0; j < params.n_sites; ++j) {
        diag(4 * j) = params.kappa;
        diag(4 * j + 1) = params.kappa;
        diag(4 * j + 2) = mech;
        diag(4 * j + 3) = mech;
    }
    return diag.asDiagonal();
}

}  // namespace qsync
