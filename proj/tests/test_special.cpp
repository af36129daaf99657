#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "laplace_cert/errors.hpp"
#include "laplace_cert/special.hpp"

using namespace lc::special;

TEST_CASE("xi_d at zero and for d = 2") {
    for (double d : {1.0, 2.0, 3.5, 10.0, 100.0}) CHECK(xi_d(d, 0.0) == 0.0);
    CHECK(xi_d(2, 2.0 * std::log(2.0)) == doctest::Approx(0.5).epsilon(1e-14));
    for (double t : {0.01, 0.5, 1.0, 3.0, 10.0, 40.0})
        CHECK(std::abs(xi_d(2, t) - (1.0 - std::exp(-t / 2.0))) <= 1e-12);
}

TEST_CASE("xi_1(1) equals the one-sigma Gaussian mass") {
    // P(|N(0,1)| <= 1) = erf(1/sqrt 2)
    const double oracle = std::erf(1.0 / std::numbers::sqrt2);
    CHECK(oracle == doctest::Approx(0.6826895).epsilon(1e-6));
    CHECK(std::abs(xi_d(1, 1.0) - oracle) <= 1e-13);
}

TEST_CASE("upper regularized gamma") {
    for (double a : {0.5, 1.0, 7.0}) CHECK(upper_gamma_reg(a, 0.0) == 1.0);
    for (double z : {0.1, 1.0, 5.0, 30.0}) CHECK(upper_gamma_reg(1.0, z) == doctest::Approx(std::exp(-z)).epsilon(1e-13));
    CHECK(upper_gamma_reg(1.0, 1.0) == doctest::Approx(0.3678794).epsilon(1e-7));
    for (double d : {1.0, 2.0, 3.0, 7.0, 50.0, 400.0})
        for (double t : {0.0, 0.3, 2.0, 9.0, 60.0, 500.0})
            CHECK(std::abs(upper_gamma_reg(d / 2, t / 2) + xi_d(d, t) - 1.0) <= 1e-12);
}

TEST_CASE("log upper gamma survives the far tail") {
    const double l = log_upper_gamma_reg(1.0, 2000.0);
    CHECK(l == doctest::Approx(-2000.0).epsilon(1e-12));
    CHECK(std::isfinite(log_upper_gamma_reg(200.0, 5000.0)));
    CHECK(log_upper_gamma_reg(3.0, 0.0) == 0.0);
}

TEST_CASE("c_d") {
    CHECK(c_d(2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(c_d(4) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(c_d(1) == doctest::Approx(std::sqrt(2.0 / std::numbers::pi)).epsilon(1e-14));
    CHECK(c_d(1) == doctest::Approx(0.7978846).epsilon(1e-7));
    CHECK(std::exp(log_c_d(300)) == doctest::Approx(c_d(300)).epsilon(1e-10));
}

TEST_CASE("gamma ratios") {
    for (double a : {0.5, 1.0, 3.3, 50.0, 400.0}) {
        const GammaRatio g = gamma_ratio(a + 1.0, a);
        CHECK(g.value == doctest::Approx(a).epsilon(1e-12));
        CHECK(g.value > 0.0);
    }
    // Gamma(2) / Gamma(1/2) = 1 / sqrt(pi)
    CHECK(gamma_ratio(2.0, 0.5).value == doctest::Approx(1.0 / std::sqrt(std::numbers::pi)).epsilon(1e-14));
    const double d = 400.0;
    CHECK(gamma_ratio(d / 2 + 1.5, d / 2).value * std::pow(d / 2, -1.5) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("xi_d is strictly increasing") {
    for (double d : {1.0, 3.0, 20.0}) {
        double prev = 0.0;
        for (int i = 1; i <= 200; ++i) {
            const double v = xi_d(d, 0.25 * i);
            CHECK(v > prev);
            CHECK(v <= 1.0);
            prev = v;
            if (v == 1.0) break;
        }
    }
}

TEST_CASE("xi_d matches Monte Carlo ball probabilities") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n01;
    const int n = 200000;
    for (int d : {1, 2, 5}) {
        for (double r : {0.5, 1.5, 3.0}) {
            int hits = 0;
            for (int i = 0; i < n; ++i) {
                double s = 0.0;
                for (int k = 0; k < d; ++k) {
                    const double z = n01(rng);
                    s += z * z;
                }
                hits += s <= r * r;
            }
            const double p = xi_d(d, r * r);
            const double se = std::sqrt(p * (1 - p) / n);
            CHECK(std::abs(static_cast<double>(hits) / n - p) <= 4 * se + 1e-12);
        }
    }
}

TEST_CASE("domain errors") {
    CHECK_THROWS_AS(xi_d(0.0, 1.0), lc::ParameterError);
    CHECK_THROWS_AS(xi_d(1.0, -1.0), lc::ParameterError);
    CHECK_THROWS_AS(upper_gamma_reg(-1.0, 1.0), lc::ParameterError);
}
