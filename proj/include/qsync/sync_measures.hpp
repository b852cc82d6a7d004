// sync_measures.hpp — Synchronization functionals on mechanical-mode pair data.
//
// Complete synchronization:  S_c = 1 / (⟨q_−²⟩ + ⟨p_−²⟩),   q_− = (q_1 − q_2)/√2.
// Phase synchronization:     S_p = 1 / (2 ⟨p'_−²⟩), with p' the phase quadrature
// obtained by rotating each mode by the phase of its classical mean amplitude.
// The Heisenberg principle bounds S_c ≤ 1/(2√(⟨q_−²⟩⟨p_−²⟩)) ≤ 1; S_p > 1
// requires collective squeezing (a rotated variance below 1/2).
//
// Covariance matrices from the linearized pipeline describe zero-mean
// fluctuation operators, so s_complete is automatically the relative measure
// (mean trajectories subtracted); s_complete_absolute reinstates the classical
// systematic error from non-identical means.

#pragma once

#include "gaussian.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

namespace qsync {

// Below this classical amplitude the phase of ⟨b⟩ is numerically meaningless
// and phase-synchronization samples are marked invalid.
inline constexpr double kAmplitudeFloor = 1e-6;

// --------------------------- Sample types -------------------------------------

struct SyncSample {
    double t = 0.0;  // units of 1/ω_1
    double s_c = 0.0;
    double s_p = std::numeric_limits<double>::quiet_NaN();
    double var_qminus = 0.0;
    double var_pminus = 0.0;
    double var_qminus_rot = std::numeric_limits<double>::quiet_NaN();
    double var_pminus_rot = std::numeric_limits<double>::quiet_NaN();
    bool squeezing_flag = false;  // var_pminus_rot < 1/2
    bool phase_valid = true;      // false when a classical amplitude is under the floor
};

struct PhasePair {
    double phi_1 = 0.0;
    double phi_2 = 0.0;
};

// Phases of the classical mechanical amplitudes, or nullopt when either
// amplitude is below the floor.
inline std::optional<PhasePair> mechanical_phases(std::complex<double> b1, std::complex<double> b2,
                                                  double floor = kAmplitudeFloor) {
    if (std::abs(b1) < floor || std::abs(b2) < floor) return std::nullopt;
    return PhasePair{std::arg(b1), std::arg(b2)};
}

// --------------------------- Measures -----------------------------------------

namespace detail {
inline void require_physical_pair(const TwoModeCM& pair, const char* who) {
    const double eig = pair.min_physicality_eig();
    if (eig < -kPhysicalityTol) {
        throw nonphysical_error(std::string(who) + ": covariance matrix is not physical (min eig = " +
                                std::to_string(eig) + ")");
    }
}

inline double minus_mode_variance(const Eigen::Matrix4d& m, int offset) {
    // offset 0 -> q rows (0, 2); offset 1 -> p rows (1, 3)
    return (m(offset, offset) + m(2 + offset, 2 + offset) - 2.0 * m(offset, 2 + offset)) / 2.0;
}
}  // namespace detail

struct CompleteSync {
    double s_c = 0.0;
    double var_qminus = 0.0;
    double var_pminus = 0.0;
};

inline CompleteSync s_complete(const TwoModeCM& pair) {
    detail::require_physical_pair(pair, "s_complete");
    CompleteSync out;
    out.var_qminus = detail::minus_mode_variance(pair.m, 0);
    out.var_pminus = detail::minus_mode_variance(pair.m, 1);
    out.s_c = 1.0 / (out.var_qminus + out.var_pminus);
    return out;
}

// Absolute variant: includes the classical systematic error ⟨q_−⟩² + ⟨p_−⟩²
// coming from non-identical mean trajectories. Always ≤ the relative measure.
inline double s_complete_absolute(const CompleteSync& relative, std::complex<double> b1,
                                  std::complex<double> b2) {
    const std::complex<double> d = b1 - b2;
    // ⟨q_−⟩ = Re(b1 − b2), ⟨p_−⟩ = Im(b1 − b2) with q = √2 Re⟨b⟩, p = √2 Im⟨b⟩
    const double systematic = d.real() * d.real() + d.imag() * d.imag();
    return 1.0 / (relative.var_qminus + relative.var_pminus + systematic);
}

struct PhaseSync {
    double s_p = 0.0;
    double var_pminus_rot = 0.0;
    double var_qminus_rot = 0.0;
    bool squeezing_flag = false;
};

inline PhaseSync s_phase(const TwoModeCM& pair, const PhasePair& phases) {
    detail::require_physical_pair(pair, "s_phase");
    if (!std::isfinite(phases.phi_1) || !std::isfinite(phases.phi_2)) {
        throw std::invalid_argument("s_phase: phases must be finite");
    }
    const TwoModeCM rotated = rotate_mode(rotate_mode(pair, 0, phases.phi_1), 1, phases.phi_2);
    PhaseSync out;
    out.var_pminus_rot = detail::minus_mode_variance(rotated.m, 1);
    out.var_qminus_rot = detail::minus_mode_variance(rotated.m, 0);
    out.s_p = 1.0 / (2.0 * out.var_pminus_rot);
    // roundoff slack: a rotated exact-vacuum variance may land 1 ulp under 1/2
    out.squeezing_flag = out.var_pminus_rot < 0.5 - 1e-12;
    return out;
}

// --------------------------- Bounds -------------------------------------------

struct BoundReport {
    bool complete_bound_ok = false;        // S_c ≤ 1/(2√(⟨q_−²⟩⟨p_−²⟩)) + tol
    bool heisenberg_ok = false; // 1/(2√(⟨q_−²⟩⟨p_−²⟩)) ≤ 1 + tol
    bool hierarchy_ok = false;        // S_p ≤ S_c + tol (monitored conjecture, never fatal)
    bool squeezing_flag = false;      // squeezing present: classicality threshold beatable
};

inline BoundReport check_bounds(const SyncSample& sample, double tol = 1e-9) {
    BoundReport report;
    const double rhs = 1.0 / (2.0 * std::sqrt(sample.var_qminus * sample.var_pminus));
    report.complete_bound_ok = sample.s_c <= rhs + tol;
    report.heisenberg_ok = rhs <= 1.0 + tol;
    report.hierarchy_ok = sample.phase_valid ? (sample.s_p <= sample.s_c + tol) : true;
    report.squeezing_flag = sample.squeezing_flag;
    return report;
}

// --------------------------- Time averages ------------------------------------

// Trapezoidal mean of y over the samples with t0 ≤ t ≤ t1. A single in-window
// sample returns its own value.
inline double trapezoid_mean(const std::vector<double>& t, const std::vector<double>& y, double t0,
                             double t1) {
    if (t.size() != y.size()) throw std::invalid_argument("trapezoid_mean: size mismatch");
    if (t.empty()) throw std::invalid_argument("trapezoid_mean: empty series");
    if (!(t1 > t0) && t1 != t0) throw std::invalid_argument("trapezoid_mean: empty window");
    const double eps = 1e-9 * std::max(1.0, std::abs(t1));
    if (t0 < t.front() - eps || t1 > t.back() + eps) {
        throw std::invalid_argument("trapezoid_mean: window outside series range");
    }
    std::size_t first = 0;
    while (first < t.size() && t[first] < t0 - eps) ++first;
    std::size_t last = t.size();
    while (last > first && t[last - 1] > t1 + eps) --last;
    if (last == first) throw std::invalid_argument("trapezoid_mean: no samples in window");
    if (last - first == 1) return y[first];
    double integral = 0.0;
    for (std::size_t i = first; i + 1 < last; ++i) {
        integral += 0.5 * (y[i] + y[i + 1]) * (t[i + 1] - t[i]);
    }
    return integral / (t[last - 1] - t[first]);
}

struct SyncAverages {
    double s_c = 0.0;
    double s_p = 0.0;
    double var_qminus = 0.0;
    double var_pminus = 0.0;
    double var_qminus_rot = 0.0;
    double var_pminus_rot = 0.0;
};

inline SyncAverages time_average(const std::vector<SyncSample>& series, double t0, double t1) {
    std::vector<double> t(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) t[i] = series[i].t;
    auto mean_of = [&](auto field) {
        std::vector<double> y(series.size());
        for (std::size_t i = 0; i < series.size(); ++i) y[i] = series[i].*field;
        return trapezoid_mean(t, y, t0, t1);
    };
    SyncAverages avg;
    avg.s_c = mean_of(&SyncSample::s_c);
    avg.s_p = mean_of(&SyncSample::s_p);
    avg.var_qminus = mean_of(&SyncSample::var_qminus);
    avg.var_pminus = mean_of(&SyncSample::var_pminus);
    avg.var_qminus_rot = mean_of(&SyncSample::var_qminus_rot);
    avg.var_pminus_rot = mean_of(&SyncSample::var_pminus_rot);
    return avg;
}

}  // namespace qsync
