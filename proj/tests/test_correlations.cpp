#include <qsync/correlations.hpp>

#include "test_support.hpp"

#include <catch2/catch.hpp>

#include <random>

using namespace qsync;

namespace {

TwoModeCM product_cm(const Eigen::Matrix2d& a, const Eigen::Matrix2d& b) {
    TwoModeCM cm;
    cm.m.setZero();
    cm.m.block<2, 2>(0, 0) = a;
    cm.m.block<2, 2>(2, 2) = b;
    return cm;
}

}  // namespace

TEST_CASE("log_negativity") {
    SECTION("product of vacua is separable") {
        REQUIRE(log_negativity(product_cm(0.5 * Eigen::Matrix2d::Identity(),
                                          0.5 * Eigen::Matrix2d::Identity())) == 0.0);
    }
    SECTION("two-mode squeezed vacuum gives E_N = 2r") {
        for (double r : {0.2, 0.5, 1.0, 1.4}) {
            REQUIRE(log_negativity(oracle::tmsv(r)) == Approx(2.0 * r).margin(1e-8));
        }
    }
    SECTION("separable states stay at zero") {
        std::mt19937 rng(17);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 30; ++trial) {
            // product state plus positive classical noise: separable by construction
            auto local = [&] {
                const Eigen::Matrix2d l = oracle::rotation2(unit(rng) * 2.0 * M_PI) *
                                          oracle::squeeze2(unit(rng) - 0.5) *
                                          oracle::rotation2(unit(rng) * 2.0 * M_PI);
                return ((0.5 + unit(rng)) * l * l.transpose()).eval();
            };
            TwoModeCM cm = product_cm(local(), local());
            Eigen::Vector4d v;
            for (int k = 0; k < 4; ++k) v(k) = unit(rng) - 0.5;
            cm.m += v * v.transpose();
            REQUIRE(log_negativity(cm) == 0.0);
        }
    }
    SECTION("non-physical input rejected") {
        TwoModeCM cm;
        cm.m = 0.05 * Eigen::Matrix4d::Identity();
        REQUIRE_THROWS_AS(log_negativity(cm), nonphysical_error);
    }
}

TEST_CASE("gaussian_discord") {
    SECTION("product states carry no discord") {
        std::mt19937 rng(23);
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        for (int trial = 0; trial < 20; ++trial) {
            const Eigen::Matrix2d l1 = oracle::rotation2(unit(rng)) * oracle::squeeze2(unit(rng) - 0.5) *
                                       oracle::rotation2(unit(rng));
            const Eigen::Matrix2d l2 = oracle::rotation2(unit(rng)) * oracle::squeeze2(unit(rng) - 0.5) *
                                       oracle::rotation2(unit(rng));
            const TwoModeCM cm = product_cm((0.5 + unit(rng)) * l1 * l1.transpose(),
                                            (0.5 + unit(rng)) * l2 * l2.transpose());
            REQUIRE(gaussian_discord(cm) == Approx(0.0).margin(1e-9));
        }
    }
    SECTION("product with a pure (vacuum) measured mode hits the degenerate branch") {
        const TwoModeCM cm = product_cm(1.5 * Eigen::Matrix2d::Identity(),
                                        0.5 * Eigen::Matrix2d::Identity());
        REQUIRE(gaussian_discord(cm) == Approx(0.0).margin(1e-9));
    }
    SECTION("two-mode squeezed vacuum matches the brute-force minimizer") {
        const TwoModeCM cm = oracle::tmsv(1.0);
        const double closed = gaussian_discord(cm);
        // margin set by the ~eps*log(eps) conditioning of the formula at pure states
        REQUIRE(closed == Approx(1.6198220928977025).margin(1e-6));
        REQUIRE(closed == Approx(oracle::discord_bruteforce(cm)).margin(1e-4));
    }
    SECTION("closed form agrees with the brute-force minimizer on 100 random states") {
        std::mt19937 rng(404);
        for (int trial = 0; trial < 100; ++trial) {
            const auto rand = oracle::random_two_mode_cm(rng);
            const double closed = gaussian_discord(rand.cm);
            const double brute = oracle::discord_bruteforce(rand.cm);
            INFO("trial " << trial);
            REQUIRE(closed == Approx(brute).margin(1e-4));
        }
    }
    SECTION("entangled test state has positive discord") {
        REQUIRE(gaussian_discord(oracle::tmsv(0.4)) > 0.1);
    }
    SECTION("symmetrized variant is the minimum over measurement sides") {
        std::mt19937 rng(7);
        for (int trial = 0; trial < 10; ++trial) {
            const auto rand = oracle::random_two_mode_cm(rng);
            const double on_second = gaussian_discord(rand.cm);
            const double on_first = gaussian_discord(rand.cm.swapped());
            REQUIRE(gaussian_discord(rand.cm, true) ==
                    Approx(std::min(on_second, on_first)).margin(1e-12));
        }
    }
}

TEST_CASE("correlation measures are invariant under local rotations") {
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> angle(-M_PI, M_PI);
    for (int trial = 0; trial < 20; ++trial) {
        const auto rand = oracle::random_two_mode_cm(rng);
        const double en = log_negativity(rand.cm);
        const double dg = gaussian_discord(rand.cm);
        const TwoModeCM rotated = rotate_mode(rotate_mode(rand.cm, 0, angle(rng)), 1, angle(rng));
        REQUIRE(log_negativity(rotated) == Approx(en).margin(1e-9));
        REQUIRE(gaussian_discord(rotated) == Approx(dg).margin(1e-9));
    }
}
