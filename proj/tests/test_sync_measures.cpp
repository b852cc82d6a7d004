#include <qsync/sync_measures.hpp>

#include "test_support.hpp"

#include <catch2/catch.hpp>

#include <random>

using namespace qsync;

namespace {

TwoModeCM vacuum_pair() {
    TwoModeCM cm;
    cm.m = 0.5 * Eigen::Matrix4d::Identity();
    return cm;
}

// Two uncorrelated squeezed modes whose rotated-p variance is eps at the given
// phases (the "synchronized clock hands" fixture).
TwoModeCM clock_hands(double eps, double phi1, double phi2) {
    auto lab_block = [&](double phi) {
        Eigen::Matrix2d rotated = Eigen::Matrix2d::Zero();
        rotated(0, 0) = 1.0 / (4.0 * eps);  // pure squeezed: det = 1/4
        rotated(1, 1) = eps;
        const Eigen::Matrix2d u = oracle::rotation2(phi);
        return (u.transpose() * rotated * u).eval();
    };
    TwoModeCM cm;
    cm.m.setZero();
    cm.m.block<2, 2>(0, 0) = lab_block(phi1);
    cm.m.block<2, 2>(2, 2) = lab_block(phi2);
    return cm;
}

}  // namespace

TEST_CASE("s_complete") {
    SECTION("two-mode vacuum saturates the bound") {
        const CompleteSync cs = s_complete(vacuum_pair());
        REQUIRE(cs.var_qminus == Approx(0.5));
        REQUIRE(cs.var_pminus == Approx(0.5));
        REQUIRE(cs.s_c == Approx(1.0));
    }
    SECTION("uncorrelated thermal pair, n_b = 1") {
        TwoModeCM cm;
        cm.m = 1.5 * Eigen::Matrix4d::Identity();
        REQUIRE(s_complete(cm).s_c == Approx(1.0 / 3.0));
    }
    SECTION("two-mode squeezed vacuum, r = 1") {
        const CompleteSync cs = s_complete(oracle::tmsv(1.0));
        REQUIRE(cs.var_qminus == Approx(0.067667641618306351).epsilon(1e-12));
        REQUIRE(cs.var_pminus == Approx(3.6945280494653252).epsilon(1e-12));
        REQUIRE(cs.s_c == Approx(0.26580222883407972).epsilon(1e-12));
    }
    SECTION("non-physical input rejected") {
        TwoModeCM cm;
        cm.m = 0.01 * Eigen::Matrix4d::Identity();
        REQUIRE_THROWS_AS(s_complete(cm), nonphysical_error);
    }
    SECTION("s_c in (0, 1] for random physical states; equality only at vacuum variances") {
        std::mt19937 rng(31);
        for (int trial = 0; trial < 50; ++trial) {
            const auto rand = oracle::random_two_mode_cm(rng);
            const CompleteSync cs = s_complete(rand.cm);
            REQUIRE(cs.s_c > 0.0);
            REQUIRE(cs.s_c <= 1.0 + 1e-12);
            if (cs.s_c > 1.0 - 1e-12) {
                REQUIRE(cs.var_qminus == Approx(0.5).margin(1e-9));
                REQUIRE(cs.var_pminus == Approx(0.5).margin(1e-9));
            }
        }
    }
    SECTION("absolute measure adds the classical systematic error") {
        const CompleteSync cs = s_complete(vacuum_pair());
        const std::complex<double> b1(0.4, -0.2);
        const std::complex<double> b2(0.1, 0.3);
        const double systematic = std::norm(b1 - b2);
        REQUIRE(s_complete_absolute(cs, b1, b2) == Approx(1.0 / (1.0 + systematic)));
        REQUIRE(s_complete_absolute(cs, b1, b1) == Approx(cs.s_c));
        REQUIRE(s_complete_absolute(cs, b1, b2) <= cs.s_c);
    }
}

TEST_CASE("s_phase") {
    SECTION("vacuum is rotation invariant") {
        for (double phi : {0.0, 0.7, -2.1, 3.0}) {
            const PhaseSync ps = s_phase(vacuum_pair(), {phi, -phi});
            REQUIRE(ps.s_p == Approx(1.0));
            REQUIRE_FALSE(ps.squeezing_flag);
        }
    }
    SECTION("clock-hands fixture: rotated-p variance eps gives s_p = 1/(2 eps)") {
        const double eps = 0.1;
        const TwoModeCM cm = clock_hands(eps, 1.1, 1.1);
        const PhaseSync ps = s_phase(cm, {1.1, 1.1});
        REQUIRE(ps.var_pminus_rot == Approx(eps).epsilon(1e-12));
        REQUIRE(ps.s_p == Approx(5.0).epsilon(1e-12));
        REQUIRE(ps.squeezing_flag);  // eps < 1/2: squeezed, beats the classical threshold
    }
    SECTION("zero phases reduce to the p part of s_complete") {
        std::mt19937 rng(8);
        const auto rand = oracle::random_two_mode_cm(rng);
        const CompleteSync cs = s_complete(rand.cm);
        const PhaseSync ps = s_phase(rand.cm, {0.0, 0.0});
        REQUIRE(ps.s_p == Approx(1.0 / (2.0 * cs.var_pminus)).epsilon(1e-12));
        REQUIRE(ps.var_qminus_rot == Approx(cs.var_qminus).epsilon(1e-12));
    }
    SECTION("invariant under a common phase shift applied to state and phases") {
        std::mt19937 rng(4);
        const auto rand = oracle::random_two_mode_cm(rng);
        const PhasePair phases{0.5, -0.9};
        const double base = s_phase(rand.cm, phases).s_p;
        for (double delta : {0.3, 1.7, -2.4}) {
            TwoModeCM shifted = rotate_mode(rotate_mode(rand.cm, 0, -delta), 1, -delta);
            const double moved = s_phase(shifted, {phases.phi_1 + delta, phases.phi_2 + delta}).s_p;
            REQUIRE(moved == Approx(base).epsilon(1e-12));
        }
    }
    SECTION("thermal state independent of phases") {
        TwoModeCM cm;
        cm.m = 2.5 * Eigen::Matrix4d::Identity();
        const double ref = s_phase(cm, {0.0, 0.0}).s_p;
        for (double phi : {0.2, 1.3, 2.9, -0.4}) {
            REQUIRE(s_phase(cm, {phi, phi * 0.3}).s_p == Approx(ref).epsilon(1e-12));
        }
    }
    SECTION("non-finite phase rejected") {
        REQUIRE_THROWS_AS(s_phase(vacuum_pair(), {std::nan(""), 0.0}), std::invalid_argument);
    }
}

TEST_CASE("mechanical_phases amplitude floor") {
    const auto valid = mechanical_phases({0.3, 0.4}, {-0.1, 0.2});
    REQUIRE(valid.has_value());
    REQUIRE(valid->phi_1 == Approx(std::atan2(0.4, 0.3)));
    REQUIRE_FALSE(mechanical_phases({1e-8, 0.0}, {0.5, 0.0}).has_value());
    REQUIRE_FALSE(mechanical_phases({0.5, 0.0}, {0.0, 0.0}).has_value());
}

TEST_CASE("check_bounds") {
    SECTION("vacuum sample: equality in the Heisenberg chain") {
        SyncSample s;
        s.s_c = 1.0;
        s.var_qminus = 0.5;
        s.var_pminus = 0.5;
        s.s_p = 1.0;
        s.var_pminus_rot = 0.5;
        const BoundReport report = check_bounds(s);
        REQUIRE(report.complete_bound_ok);
        REQUIRE(report.heisenberg_ok);
        REQUIRE(report.hierarchy_ok);
        REQUIRE_FALSE(report.squeezing_flag);
    }
    SECTION("random physical samples satisfy the bound chain") {
        std::mt19937 rng(60);
        for (int trial = 0; trial < 50; ++trial) {
            const auto rand = oracle::random_two_mode_cm(rng);
            const CompleteSync cs = s_complete(rand.cm);
            SyncSample s;
            s.s_c = cs.s_c;
            s.var_qminus = cs.var_qminus;
            s.var_pminus = cs.var_pminus;
            const PhaseSync ps = s_phase(rand.cm, {0.4, -0.8});
            s.s_p = ps.s_p;
            s.var_pminus_rot = ps.var_pminus_rot;
            s.squeezing_flag = ps.squeezing_flag;
            const BoundReport report = check_bounds(s);
            REQUIRE(report.complete_bound_ok);
            REQUIRE(report.heisenberg_ok);
        }
    }
    SECTION("squeezing raises the flag without violating the bound chain") {
        const TwoModeCM cm = clock_hands(0.1, 0.0, 0.0);
        const CompleteSync cs = s_complete(cm);
        const PhaseSync ps = s_phase(cm, {0.0, 0.0});
        SyncSample s;
        s.s_c = cs.s_c;
        s.var_qminus = cs.var_qminus;
        s.var_pminus = cs.var_pminus;
        s.s_p = ps.s_p;
        s.var_pminus_rot = ps.var_pminus_rot;
        s.squeezing_flag = ps.squeezing_flag;
        const BoundReport report = check_bounds(s);
        REQUIRE(report.complete_bound_ok);
        REQUIRE(report.squeezing_flag);
    }
}

TEST_CASE("time_average") {
    SECTION("constant series") {
        std::vector<double> t, y;
        for (int k = 0; k <= 100; ++k) {
            t.push_back(0.1 * k);
            y.push_back(3.25);
        }
        REQUIRE(trapezoid_mean(t, y, 0.0, 10.0) == Approx(3.25));
        REQUIRE(trapezoid_mean(t, y, 2.0, 7.0) == Approx(3.25));
    }
    SECTION("sin^2 over whole periods averages to 1/2") {
        std::vector<double> t, y;
        const int n = 4000;
        const double t_end = 5.0 * M_PI;  // 5 periods of sin^2
        for (int k = 0; k <= n; ++k) {
            t.push_back(t_end * k / n);
            y.push_back(std::pow(std::sin(t.back()), 2));
        }
        REQUIRE(trapezoid_mean(t, y, 0.0, t_end) == Approx(0.5).margin(1e-6));
    }
    SECTION("single-sample window returns that sample") {
        std::vector<double> t{0.0, 1.0, 2.0};
        std::vector<double> y{5.0, 7.0, 9.0};
        REQUIRE(trapezoid_mean(t, y, 1.0, 1.0) == Approx(7.0));
    }
    SECTION("window outside the series is an error") {
        std::vector<double> t{0.0, 1.0};
        std::vector<double> y{1.0, 1.0};
        REQUIRE_THROWS_AS(trapezoid_mean(t, y, -1.0, 0.5), std::invalid_argument);
        REQUIRE_THROWS_AS(trapezoid_mean(t, y, 0.5, 2.5), std::invalid_argument);
    }
    SECTION("averages a full SyncSample series fieldwise") {
        std::vector<SyncSample> series;
        for (int k = 0; k <= 10; ++k) {
            SyncSample s;
            s.t = k;
            s.s_c = 0.5;
            s.s_p = 0.25;
            s.var_qminus = 1.0;
            s.var_pminus = 1.0;
            s.var_qminus_rot = 1.0;
            s.var_pminus_rot = 2.0;
            series.push_back(s);
        }
        const SyncAverages avg = time_average(series, 0.0, 10.0);
        REQUIRE(avg.s_c == Approx(0.5));
        REQUIRE(avg.s_p == Approx(0.25));
        REQUIRE(avg.var_pminus_rot == Approx(2.0));
    }
}
