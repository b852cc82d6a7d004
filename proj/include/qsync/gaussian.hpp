// gaussian.hpp — Covariance-matrix algebra for multimode Gaussian fluctuation states.
//
// Conventions used throughout the library:
//   * quadratures q = (a + a†)/√2, p = (a − a†)/(i√2), so [q, p] = i and the
//     vacuum variance per quadrature is 1/2;
//   * per site the quadrature vector is (q_a, p_a, q_b, p_b), optical mode
//     first, mechanical mode second, so X has dimension 4·n_sites;
//   * the symplectic form Ω is block-diagonal with per-mode blocks
//     [[0, 1], [−1, 0]]; a state is physical iff C + iΩ/2 ⪰ 0.

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

namespace qsync {

// Absolute tolerance on min eig(C + iΩ/2); drift beyond this aborts a run.
inline constexpr double kPhysicalityTol = 1e-9;

// Thrown when an operation requiring a physical covariance matrix receives
// one whose smallest physicality eigenvalue is below tolerance.
struct nonphysical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// --------------------------- Mode layout ------------------------------------

struct ModeLayout {
    int n_sites = 1;

    int dim() const { return 4 * n_sites; }
    int n_modes() const { return 2 * n_sites; }

    int optical_mode(int site) const {
        check_site(site);
        return 2 * site;
    }
    int mechanical_mode(int site) const {
        check_site(site);
        return 2 * site + 1;
    }

    void check_site(int site) const {
        if (site < 0 || site >= n_sites) {
            throw std::out_of_range("ModeLayout: site " + std::to_string(site) +
                                    " out of range for n_sites = " + std::to_string(n_sites));
        }
    }

    bool operator==(const ModeLayout&) const = default;
};

// --------------------------- Symplectic form ---------------------------------

inline Eigen::MatrixXd symplectic_form(int n_modes) {
    if (n_modes <= 0) throw std::invalid_argument("symplectic_form: n_modes must be > 0");
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(2 * n_modes, 2 * n_modes);
    for (int m = 0; m < n_modes; ++m) {
        omega(2 * m, 2 * m + 1) = 1.0;
        omega(2 * m + 1, 2 * m) = -1.0;
    }
    return omega;
}

// Smallest eigenvalue of the Hermitian matrix C + iΩ/2. Physical states give
// a value ≥ 0 up to roundoff.
inline double min_physicality_eig(const Eigen::MatrixXd& cm) {
    if (cm.rows() != cm.cols() || cm.rows() % 2 != 0) {
        throw std::invalid_argument("min_physicality_eig: matrix must be 2n x 2n");
    }
    const int n_modes = static_cast<int>(cm.rows()) / 2;
    Eigen::MatrixXcd h = cm.cast<std::complex<double>>();
    const Eigen::MatrixXd omega = symplectic_form(n_modes);
    h += std::complex<double>(0.0, 0.5) * omega.cast<std::complex<double>>();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success) {
        throw std::runtime_error("min_physicality_eig: eigensolver failed");
    }
    return solver.eigenvalues().minCoeff();
}

inline bool is_physical(const Eigen::MatrixXd& cm, double tol = kPhysicalityTol) {
    return min_physicality_eig(cm) >= -tol;
}

// --------------------------- Covariance matrices ------------------------------

// Real symmetric 4N x 4N second-moment matrix of quadrature fluctuations.
struct CovarianceMatrix {
    ModeLayout layout;
    Eigen::MatrixXd m;

    CovarianceMatrix() = default;
    CovarianceMatrix(ModeLayout lay, Eigen::MatrixXd mat) : layout(lay), m(std::move(mat)) {
        if (m.rows() != layout.dim() || m.cols() != layout.dim()) {
            throw std::invalid_argument("CovarianceMatrix: dimension does not match layout");
        }
        symmetrize();
    }

    void symmetrize() { m = ((m + m.transpose()) / 2.0).eval(); }

    double min_physicality_eig() const { return qsync::min_physicality_eig(m); }
    bool is_physical(double tol = kPhysicalityTol) const { return qsync::is_physical(m, tol); }
};

// 4x4 two-mode reduction in ordering (q_1, p_1, q_2, p_2).
struct TwoModeCM {
    Eigen::Matrix4d m = Eigen::Matrix4d::Zero();

    Eigen::Matrix2d a_block() const { return m.block<2, 2>(0, 0); }
    Eigen::Matrix2d b_block() const { return m.block<2, 2>(2, 2); }
    Eigen::Matrix2d cross_block() const { return m.block<2, 2>(0, 2); }

    double min_physicality_eig() const { return qsync::min_physicality_eig(m); }
    bool is_physical(double tol = kPhysicalityTol) const { return qsync::is_physical(m, tol); }

    // Modes exchanged: (q_2, p_2, q_1, p_1) reordering of rows and columns.
    TwoModeCM swapped() const {
        TwoModeCM out;
        out.m.block<2, 2>(0, 0) = m.block<2, 2>(2, 2);
        out.m.block<2, 2>(2, 2) = m.block<2, 2>(0, 0);
        out.m.block<2, 2>(0, 2) = m.block<2, 2>(2, 0);
        out.m.block<2, 2>(2, 0) = m.block<2, 2>(0, 2);
        return out;
    }
};

// Initial/bath-matched state: optical quadratures at vacuum variance 1/2,
// mechanical quadratures at thermal variance (2 n_b + 1)/2.
inline CovarianceMatrix vacuum_cm(const ModeLayout& layout, double mech_occupation = 0.0) {
    if (!(mech_occupation >= 0.0)) {
        throw std::invalid_argument("vacuum_cm: mech_occupation must be >= 0");
    }
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(layout.dim(), layout.dim());
    const double mech_var = (2.0 * mech_occupation + 1.0) / 2.0;
    for (int s = 0; s < layout.n_sites; ++s) {
        m(4 * s, 4 * s) = 0.5;
        m(4 * s + 1, 4 * s + 1) = 0.5;
        m(4 * s + 2, 4 * s + 2) = mech_var;
        m(4 * s + 3, 4 * s + 3) = mech_var;
    }
    return CovarianceMatrix(layout, std::move(m));
}

// 4x4 principal submatrix on the rows/columns of two modes, ordered
// (q_i, p_i, q_j, p_j).
inline TwoModeCM extract_pair(const Eigen::MatrixXd& m, int mode_i, int mode_j) {
    const int n_modes = static_cast<int>(m.rows()) / 2;
    if (mode_i < 0 || mode_i >= n_modes || mode_j < 0 || mode_j >= n_modes) {
        throw std::out_of_range("extract_pair: mode identifier out of range");
    }
    if (mode_i == mode_j) {
        throw std::invalid_argument("extract_pair: modes must differ");
    }
    const int idx[4] = {2 * mode_i, 2 * mode_i + 1, 2 * mode_j, 2 * mode_j + 1};
    TwoModeCM out;
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 4; ++c) out.m(r, c) = m(idx[r], idx[c]);
    }
    return out;
}

inline TwoModeCM extract_pair(const CovarianceMatrix& cm, int mode_i, int mode_j) {
    return extract_pair(cm.m, mode_i, mode_j);
}

// --------------------------- Mode rotation ------------------------------------

// In-place C -> U C Uᵀ where U is the identity except for the 2x2 block
// [[cos φ, sin φ], [−sin φ, cos φ]] on the given mode. This is the quadrature
// image of the phase-space rotation a -> e^{−iφ} a: the rotated p quadrature
// is the phase quadrature when φ is the classical phase.
inline void apply_mode_rotation(Eigen::MatrixXd& m, int mode, double phase) {
    if (!std::isfinite(phase)) throw std::invalid_argument("apply_mode_rotation: phase must be finite");
    const int i = 2 * mode;
    if (i < 0 || i + 1 >= m.rows()) throw std::out_of_range("apply_mode_rotation: mode out of range");
    const double c = std::cos(phase);
    const double s = std::sin(phase);
    // rows
    Eigen::RowVectorXd rq = m.row(i);
    Eigen::RowVectorXd rp = m.row(i + 1);
    m.row(i) = c * rq + s * rp;
    m.row(i + 1) = -s * rq + c * rp;
    // columns
    Eigen::VectorXd cq = m.col(i);
    Eigen::VectorXd cp = m.col(i + 1);
    m.col(i) = c * cq + s * cp;
    m.col(i + 1) = -s * cq + c * cp;
}

inline CovarianceMatrix rotate_mode(const CovarianceMatrix& cm, int mode, double phase) {
    if (mode < 0 || mode >= cm.layout.n_modes()) {
        throw std::out_of_range("rotate_mode: mode identifier out of range");
    }
    CovarianceMatrix out = cm;
    apply_mode_rotation(out.m, mode, phase);
    return out;
}

inline TwoModeCM rotate_mode(const TwoModeCM& cm, int mode, double phase) {
    if (mode != 0 && mode != 1) throw std::out_of_range("rotate_mode: mode must be 0 or 1");
    TwoModeCM out = cm;
    Eigen::MatrixXd tmp = out.m;
    apply_mode_rotation(tmp, mode, phase);
    out.m = tmp;
    return out;
}

// --------------------------- Symplectic spectrum ------------------------------

// Moduli of the eigenvalues of iΩC, one per mode, ascending. No physicality
// gate: also valid for partial transposes, where values below 1/2 signal
// entanglement. Uses the Cholesky route: eig(iΩC) = eig(i LᵀΩL) with C = LLᵀ,
// and i LᵀΩL is Hermitian, so the ±ν pairing is exact.
inline std::vector<double> symplectic_spectrum(const Eigen::MatrixXd& cm) {
    if (cm.rows() != cm.cols() || cm.rows() % 2 != 0) {
        throw std::invalid_argument("symplectic_spectrum: matrix must be 2n x 2n");
    }
    const int n_modes = static_cast<int>(cm.rows()) / 2;
    const Eigen::MatrixXd omega = symplectic_form(n_modes);

    Eigen::LLT<Eigen::MatrixXd> llt(cm);
    Eigen::VectorXd eigs;
    if (llt.info() == Eigen::Success) {
        const Eigen::MatrixXd l = llt.matrixL();
        const Eigen::MatrixXd k = l.transpose() * omega * l;  // antisymmetric
        Eigen::MatrixXcd h = std::complex<double>(0.0, 1.0) * k.cast<std::complex<double>>();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("symplectic_spectrum: eigensolver failed");
        }
        eigs = solver.eigenvalues();
    } else {
        // semidefinite edge: fall back to eig(ΩC) and take |Im|
        Eigen::EigenSolver<Eigen::MatrixXd> solver(omega * cm);
        if (solver.info() != Eigen::Success) {
            throw std::runtime_error("symplectic_spectrum: eigensolver failed");
        }
        eigs = solver.eigenvalues().imag();
    }
    std::vector<double> nu;
    nu.reserve(n_modes);
    std::vector<double> all(eigs.data(), eigs.data() + eigs.size());
    std::sort(all.begin(), all.end());
    // spectrum is ±ν paired: the top half are the moduli
    for (int k = n_modes; k < 2 * n_modes; ++k) nu.push_back(all[k]);
    std::sort(nu.begin(), nu.end());
    return nu;
}

// (ν_−, ν_+) of a physical two-mode covariance matrix; both ≥ 1/2.
inline std::pair<double, double> symplectic_eigenvalues(const TwoModeCM& cm,
                                                        double tol = kPhysicalityTol) {
    if (!cm.is_physical(tol)) {
        throw nonphysical_error("symplectic_eigenvalues: covariance matrix is not physical (min eig(C + iΩ/2) = " +
                                std::to_string(cm.min_physicality_eig()) + ")");
    }
    const std::vector<double> nu = symplectic_spectrum(cm.m);
    return {nu[0], nu[1]};
}

}  // namespace qsync
