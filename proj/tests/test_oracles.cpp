#include <doctest.h>

#include <cmath>
#include <random>

#include "laplace_cert/catalog.hpp"
#include "laplace_cert/oracles.hpp"
#include "laplace_cert/perturbed.hpp"
#include "laplace_cert/special.hpp"

using namespace lc;

namespace {

MapResult solve(const InverseProblem& p) { return map_estimate(p, Eigen::VectorXd::Zero(p.dim())); }

// x^4/4 + x^2/2 from G(x) = x^2/sqrt(2), y = 0 and a standard normal prior.
InverseProblem quartic() {
    auto G = std::make_shared<CallbackMap>(1, [](const Eigen::VectorXd& x) {
        return Eigen::VectorXd::Constant(1, x(0) * x(0) / std::sqrt(2.0));
    });
    auto R = std::make_shared<GaussianPrior>(Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1));
    return InverseProblem(G, R, 1.0, Eigen::VectorXd::Zero(1));
}

template <class F>
double trapezoid(F f, double a, double b, long n) {
    const double h = (b - a) / n;
    double s = 0.5 * (f(a) + f(b));
    for (long i = 1; i < n; ++i) s += f(a + i * h);
    return s * h;
}

double log_normal_pdf(double x, double m) { return -0.5 * (x - m) * (x - m) - 0.5 * std::log(2 * M_PI); }

}  // namespace

TEST_CASE("linear-Gaussian posterior equals its Laplace approximation") {
    for (int d : {1, 2}) {
        const InverseProblem p = catalog("linear_gaussian", {{"d", std::to_string(d)}, {"A", "1.5"}});
        const MapResult m = solve(p);
        const QuadratureDistances q = quadrature_distances(p, m);
        CHECK(std::abs(q.z / q.z_tilde - 1.0) <= 1e-8);
        CHECK(q.tv <= 1e-8);
        CHECK(q.hellinger <= 1e-8);
        CHECK(kraft_holds(q.tv, q.hellinger, 3 * q.tv_err + 1e-8));
        const TvEstimate t = tv_importance(p, m, 4000, 1);
        CHECK(t.value <= 1e-12);
        CHECK(t.ess == doctest::Approx(4000).epsilon(1e-9));
        CHECK_FALSE(t.unreliable);
    }
}

TEST_CASE("quartic normalization against a fine trapezoid rule") {
    const InverseProblem p = quartic();
    const MapResult m = solve(p);
    CHECK(std::abs(m.x_hat(0)) <= 1e-8);
    const double z = normalization(p, m);
    const double ref =
        trapezoid([](double x) { return std::exp(-x * x * x * x / 4 - x * x / 2); }, -12, 12, 10000000);
    CHECK(std::abs(z - ref) <= 1e-7);

    // TV against the same brute-force rule.
    const double zt = std::sqrt(2 * M_PI);
    const double tv_ref = 0.5 * trapezoid(
                                    [&](double x) {
                                        return std::abs(std::exp(-x * x * x * x / 4 - x * x / 2) / ref -
                                                        std::exp(-x * x / 2) / zt);
                                    },
                                    -12, 12, 1000000);
    const TvEstimate t = tv_quadrature(p, m);
    CHECK(t.value == doctest::Approx(tv_ref).epsilon(1e-6));
}

TEST_CASE("normalization scales as eps^{d/2}") {
    for (int d : {1, 2}) {
        const InverseProblem p =
            catalog("cauchy_noise_linear", {{"d", std::to_string(d)}, {"prior", "gaussian"}});
        // Flat-prior Gaussian-noise linear problem: Z is an exact Gaussian integral in x.
        const InverseProblem q(p.forward_ptr(), std::make_shared<FlatPrior>(d), 0.3,
                               Eigen::VectorXd::Constant(d, 0.7));
        const InverseProblem q4 = q.with_eps(1.2);
        const double z1 = normalization(q, solve(q)), z4 = normalization(q4, solve(q4));
        CHECK(z4 / z1 == doctest::Approx(std::pow(2.0, d)).epsilon(1e-8));
    }
}

TEST_CASE("synthetic Gaussian density pair") {
    const PairDistances r = density_pair_1d([](double x) { return log_normal_pdf(x, 0.0); },
                                            [](double x) { return log_normal_pdf(x, 2.0); }, -15, 17);
    CHECK(std::abs(r.tv - (2 * 0.8413447460685429 - 1)) <= 1e-6);
    CHECK(std::abs(r.hellinger - std::sqrt(1 - std::exp(-0.5))) <= 1e-4);
    CHECK(std::abs(r.hellinger - 0.6272713) <= 1e-6);
    CHECK(kraft_holds(r.tv, r.hellinger, 1e-9));
    const PairDistances same = density_pair_1d([](double x) { return log_normal_pdf(x, 0.3); },
                                               [](double x) { return log_normal_pdf(x, 0.3); }, -15, 15);
    CHECK(same.tv <= 1e-12);
    CHECK(same.hellinger <= 1e-8);
}

TEST_CASE("Kraft inequality checker") {
    CHECK(kraft_holds(0.5, 0.5, 0.0));
    CHECK_FALSE(kraft_holds(0.9, 0.5, 0.0));  // 0.9 > sqrt(2) 0.5
    CHECK_FALSE(kraft_holds(0.2, 0.5, 0.0));  // 0.25 > 0.2
    CHECK(kraft_holds(0.2, 0.5, 0.06));
}

TEST_CASE("quadrature distances on nonlinear problems satisfy Kraft and the fundamental estimate") {
    for (const char* name : {"scalar_bimodal_demo", "perturbed_linear"}) {
        const InverseProblem p = catalog(name, {{"eps", "0.3"}});
        const MapResult m = solve(p);
        const QuadratureDistances q = quadrature_distances(p, m);
        CHECK(q.tv > 1e-4);
        CHECK(q.tv <= 1.0);
        const double slack = 3 * (q.tv_err + q.hellinger_sq_err) + 1e-10;
        CHECK(kraft_holds(q.tv, q.hellinger, slack));
        CHECK(q.fundamental >= q.tv - 3 * (q.fundamental_err + q.tv_err));
        CHECK(hellinger(p, m) == doctest::Approx(q.hellinger).epsilon(1e-12));
    }
}

TEST_CASE("importance and quadrature agree on the 2-D perturbed problem") {
    const InverseProblem p = catalog("perturbed_linear", {{"d", "2"}, {"tau", "0.4"}, {"eps", "0.5"}});
    const MapResult m = solve(p);
    const QuadratureDistances q = quadrature_distances(p, m);
    const ImportanceEstimate is = importance_distances(p, m, 200000, 3);
    CHECK(std::abs(is.tv.value - q.tv) <= 3 * (is.tv.err + q.tv_err));
    CHECK(std::abs(is.zeta - q.zeta) <= 3 * (is.zeta_err + q.zeta_err));
    CHECK(is.fundamental >= is.tv.value - 3 * (is.fundamental_err + is.tv.err));
    CHECK(is.tv.method == OracleMethod::Importance);
    CHECK(is.tv.ess > 0.5 * 200000);
}

TEST_CASE("importance stderr shrinks like n^{-1/2}") {
    const InverseProblem p = catalog("scalar_bimodal_demo", {{"eps", "0.3"}});
    const MapResult m = solve(p);
    double small = 0, large = 0;
    for (std::uint64_t r = 0; r < 20; ++r) {
        small += tv_importance(p, m, 16000, 100 + r).err;
        large += tv_importance(p, m, 32000, 200 + r).err;
    }
    const double ratio = small / large;
    CHECK(ratio >= 1.2);
    CHECK(ratio <= 1.7);
}

TEST_CASE("importance estimates are reproducible and validate n") {
    const InverseProblem p = catalog("scalar_bimodal_demo");
    const MapResult m = solve(p);
    CHECK(tv_importance(p, m, 5000, 8).value == tv_importance(p, m, 5000, 8).value);
    CHECK(tv_importance(p, m, 5000, 8).value != tv_importance(p, m, 5000, 9).value);
    CHECK_THROWS_AS(tv_importance(p, m, 999, 8), ParameterError);
}

TEST_CASE("Gaussian ball law") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n01;
    const int n = 40000;
    for (int d : {1, 2, 5})
        for (double delta : {0.5, 1.0})
            for (double r0 : {0.3, 1.0, 2.5}) {
                const double eps = 0.2;
                long hits = 0;
                for (int i = 0; i < n; ++i) {
                    double s = 0;
                    for (int k = 0; k < d; ++k) {
                        const double z = n01(rng);
                        s += z * z;
                    }
                    // |x - x_hat|_Sigma^2 for x ~ N(x_hat, eps Sigma / delta)
                    if (std::sqrt(eps / delta * s) >= r0) ++hits;
                }
                const double pr = special::upper_gamma_reg(d / 2.0, delta * r0 * r0 / (2 * eps));
                const double se = std::sqrt(pr * (1 - pr) / n);
                CHECK(std::abs(double(hits) / n - pr) <= 4 * se + 1e-12);
            }
}

TEST_CASE("Taylor remainder is bounded by the analytic K") {
    for (double tau : {0.05, 0.3}) {
        const InverseProblem p = catalog("perturbed_linear", {{"d", "2"}, {"tau", std::to_string(tau)}});
        const MapResult m = solve(p);
        const double K = k_tau(perturbation_spec(p, m), m);
        std::mt19937_64 rng(4);
        std::normal_distribution<double> n01;
        const auto LT = m.sigma_chol.transpose().triangularView<Eigen::Upper>();
        for (int i = 0; i < 2000; ++i) {
            Eigen::VectorXd u(2);
            u << n01(rng), n01(rng);
            u *= 3.0;
            const Eigen::VectorXd h = LT.solve(u);
            const double I = potential_value(p, m.x_hat + h) - m.i_min;
            const double r2 = I - 0.5 * u.squaredNorm();
            const double rhs = (1 + p.eps()) / 6 * K * std::pow(u.norm(), 3);
            CHECK(rhs - std::abs(r2) >= -1e-9);
        }
    }
}
