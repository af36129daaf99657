#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "laplace_cert/catalog.hpp"
#include "laplace_cert/laplace.hpp"
#include "laplace_cert/perturbed.hpp"
#include "laplace_cert/quadrature.hpp"

using namespace lc;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd x(static_cast<int>(v.size()));
    int i = 0;
    for (double a : v) x(i++) = a;
    return x;
}

MapResult solve(const InverseProblem& p) {
    Eigen::VectorXd x0 = p.prior().gaussian() ? p.prior().gaussian()->mean : Eigen::VectorXd::Zero(p.dim());
    return map_estimate(p, x0);
}

}  // namespace

TEST_CASE("linear-Gaussian MAP solves the normal equations") {
    const InverseProblem p = catalog(
        "linear_gaussian", {{"d", "2"}, {"A", "2,1;0.5,1"}, {"eps", "0.4"}, {"y", "1,-1"}, {"m0", "0.3,0.1"},
                            {"sigma0", "2,0.5;0.5,1"}});
    Eigen::MatrixXd A(2, 2), S0(2, 2);
    A << 2, 1, 0.5, 1;
    S0 << 2, 0.5, 0.5, 1;
    const Eigen::MatrixXd P0 = S0.inverse();
    const Eigen::MatrixXd P = A.transpose() * A + 0.4 * P0;
    const Eigen::VectorXd ref = P.ldlt().solve(A.transpose() * vec({1, -1}) + 0.4 * P0 * vec({0.3, 0.1}));
    const MapResult m = solve(p);
    CHECK(m.converged);
    CHECK((m.x_hat - ref).norm() <= 1e-10);
    CHECK((m.hess - P).norm() <= 1e-12);
    CHECK((m.hess * m.sigma - Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-8);
    CHECK(m.z_tilde > 0.0);
    CHECK(m.min_eigenvalue > 0.0);
}

TEST_CASE("scalar MAP example") {
    const MapResult m = solve(catalog("linear_gaussian"));
    CHECK(m.x_hat(0) == doctest::Approx(0.5).epsilon(1e-12));
    const LaplaceApprox L = laplace_approx(m, 1.0);
    CHECK(L.covariance()(0, 0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("z_tilde for Sigma = I") {
    // H = A^2 + eps / sigma0 = 0.75 + 0.25 = 1 in each coordinate.
    const InverseProblem p = catalog("linear_gaussian", {{"d", "2"}, {"A", "0.8660254037844386"}, {"eps", "0.25"}});
    const MapResult m = solve(p);
    CHECK((m.sigma - Eigen::MatrixXd::Identity(2, 2)).norm() <= 1e-12);
    CHECK(m.z_tilde == doctest::Approx(0.25 * 2 * std::numbers::pi).epsilon(1e-12));
    CHECK(m.z_tilde == doctest::Approx(1.5708).epsilon(1e-4));
}

TEST_CASE("perturbed MAP is a global minimum against random probes") {
    const InverseProblem p = catalog("perturbed_linear", {{"d", "2"}, {"tau", "0.1"}});
    const MapResult m = solve(p);
    CHECK(m.grad_norm <= 1e-10);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n01;
    int violations = 0;
    for (int i = 0; i < 10000; ++i) {
        const double s = i % 2 ? 0.3 : 3.0;
        const Eigen::VectorXd x = m.x_hat + s * vec({n01(rng), n01(rng)});
        violations += potential_value(p, x) < m.i_min;
    }
    CHECK(violations == 0);
}

TEST_CASE("Laplace approximation basics") {
    const InverseProblem p = catalog("scalar_bimodal_demo");
    const MapResult m = solve(p);
    const LaplaceApprox L = laplace_approx(m, p.eps());
    CHECK(L.log_density(m.x_hat) == doctest::Approx(-std::log(m.z_tilde)).epsilon(1e-13));
    // Density integrates to one.
    const double sd = std::sqrt(L.covariance()(0, 0));
    const auto r = quad::integrate_scalar(
        [&](double x) { return std::exp(L.log_density(vec({x}))); }, m.x_hat(0) - 15 * sd, m.x_hat(0) + 15 * sd);
    CHECK(r.value[0] == doctest::Approx(1.0).epsilon(1e-6));
    // Whitening round trip.
    const Eigen::VectorXd u = vec({0.7});
    CHECK((L.to_whitened(L.from_whitened(u)) - u).norm() <= 1e-14);
}

TEST_CASE("two-dimensional Laplace density integrates to one") {
    const InverseProblem p = catalog("perturbed_linear", {{"d", "2"}, {"tau", "0.2"}, {"A", "1,0.4;0,1.5"}});
    const MapResult m = solve(p);
    const LaplaceApprox L = laplace_approx(m, p.eps());
    auto inner = [&](double a) {
        return quad::integrate_scalar([&](double b) {
                   const Eigen::VectorXd x = L.from_whitened(vec({a, b}));
                   // change of variables: dx = eps^{d/2} det(L^{-T}) du
                   return std::exp(L.log_density(x));
               }, -12, 12).value[0];
    };
    const double jac = p.eps() * std::sqrt(m.sigma.determinant());
    const double total = quad::integrate_scalar(inner, -12, 12).value[0] * jac;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("sampler moments") {
    const InverseProblem p = catalog("perturbed_linear", {{"d", "2"}, {"tau", "0.2"}, {"A", "1,0.4;0,1.5"}});
    const MapResult m = solve(p);
    const LaplaceApprox L = laplace_approx(m, p.eps());
    std::mt19937_64 rng(17);
    const int n = 100000;
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    std::vector<Eigen::VectorXd> xs;
    for (int i = 0; i < n; ++i) {
        xs.push_back(L.sample(rng));
        mean += xs.back() / n;
    }
    for (const auto& x : xs) cov += (x - mean) * (x - mean).transpose() / (n - 1);
    const Eigen::MatrixXd C = L.covariance();
    for (int i = 0; i < 2; ++i) CHECK(std::abs(mean(i) - m.x_hat(i)) <= 3 * std::sqrt(C(i, i) / n));
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            CHECK(std::abs(cov(i, j) - C(i, j)) <= 0.05 * std::sqrt(C(i, i) * C(j, j)));
}

TEST_CASE("sigma norm") {
    const MapResult m = solve(catalog("linear_gaussian", {{"d", "2"}, {"A", "1,0"}, {"eps", "1"}, {"sigma0", "1"}}));
    // H = diag(1 + 1, 0 + 1)
    CHECK(sigma_norm(m, vec({0, 0})) == 0.0);
    CHECK(sigma_norm(m, vec({1, 0})) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-14));
    MapResult h = m;
    h.sigma_chol = Eigen::Vector2d(2.0, 1.0).asDiagonal();
    CHECK(sigma_norm(h, vec({1, 0})) == doctest::Approx(2.0));
    h.sigma_chol = Eigen::MatrixXd::Identity(2, 2);
    CHECK(sigma_norm(h, vec({3, 4})) == doctest::Approx(5.0));
    // |Sigma^{1/2} u|_Sigma = |u|
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.sigma);
    const Eigen::MatrixXd root = es.operatorSqrt();
    CHECK(sigma_norm(m, root * vec({0.3, -0.4})) == doctest::Approx(0.5).epsilon(1e-13));
    CHECK_THROWS_AS(sigma_norm(m, vec({1})), ParameterError);
}

TEST_CASE("quadratic exactness on linear-Gaussian problems") {
    const InverseProblem p = catalog("linear_gaussian", {{"d", "2"}, {"A", "1,2;0,1"}, {"eps", "0.2"}});
    const MapResult m = solve(p);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    for (int i = 0; i < 200; ++i) {
        const Eigen::VectorXd h = 3.0 * vec({n01(rng), n01(rng)});
        const double I = potential_value(p, m.x_hat + h) - m.i_min;
        const double q = 0.5 * std::pow(sigma_norm(m, h), 2);
        CHECK(std::abs(I - q) <= 1e-9 * std::max(1.0, q));
    }
}

TEST_CASE("Taylor remainder respects the third-derivative bound") {
    const InverseProblem p = catalog("perturbed_linear", {{"d", "2"}, {"tau", "0.3"}});
    const MapResult m = solve(p);
    const double K = perturbation_constants(perturbation_spec(p, m), m).K;
    std::mt19937_64 rng(2);
    std::normal_distribution<double> n01;
    const auto LT = m.sigma_chol.transpose().triangularView<Eigen::Upper>();
    for (int i = 0; i < 500; ++i) {
        const Eigen::VectorXd u = 0.5 * vec({n01(rng), n01(rng)});
        const Eigen::VectorXd h = LT.solve(u);
        const double I = potential_value(p, m.x_hat + h) - m.i_min;
        const double r = u.norm();
        CHECK(std::abs(I - 0.5 * r * r) <= (1 + p.eps()) * K / 6 * r * r * r + 1e-8);
    }
}

TEST_CASE("Newton converges quadratically") {
    const InverseProblem p = catalog("scalar_bimodal_demo", {{"eps", "0.05"}});
    const MapResult m = newton_minimize(p, vec({-2.0}), 1e-13, 100);
    const auto& g = m.grad_history;
    REQUIRE(g.size() >= 4);
    const std::size_t n = g.size();
    CHECK(g[n - 1] < g[n - 2]);
    CHECK(g[n - 2] < g[n - 3]);
    // Quadratic regime: the log error roughly doubles per step.
    if (g[n - 3] < 1e-2 && g[n - 2] > 1e-14) CHECK(std::log(g[n - 2]) <= 1.5 * std::log(g[n - 3]));
}

TEST_CASE("indefinite stationary point and non-uniqueness") {
    // G(x) = x^2, y = 1, flat prior: I = (x^2 - 1)^2 / 2 has a maximum at 0 and minima at +-1.
    auto G = std::make_shared<CallbackMap>(1, [](const Eigen::VectorXd& x) {
        Eigen::VectorXd v(1);
        v(0) = x(0) * x(0);
        return v;
    });
    const InverseProblem p(G, std::make_shared<FlatPrior>(1), 1.0, vec({1.0}));
    CHECK_THROWS_AS(newton_minimize(p, vec({0.0}), 1e-10, 50), IndefiniteHessianError);
    MapOptions opt;
    opt.multistart = 8;
    opt.spread = 2.0;
    const MapResult m = map_estimate(p, vec({0.5}), opt);
    CHECK(std::abs(std::abs(m.x_hat(0)) - 1.0) <= 1e-6);
    CHECK(m.uniqueness == Uniqueness::Falsified);
    CHECK(m.distinct_minima >= 2);
}

TEST_CASE("non-convergence carries the last iterate") {
    const InverseProblem p = catalog("scalar_bimodal_demo");
    try {
        newton_minimize(p, vec({5.0}), 1e-12, 1);
        FAIL("expected NonConvergenceError");
    } catch (const NonConvergenceError& e) {
        CHECK(e.last_iterate().size() == 1);
        CHECK(e.grad_norm() > 1e-12);
    }
    CHECK_THROWS_AS(map_estimate(p, vec({std::nan("")})), ParameterError);
    MapOptions bad;
    bad.tol = -1.0;
    CHECK_THROWS_AS(map_estimate(p, vec({0.0}), bad), ParameterError);
}

TEST_CASE("multistart is deterministic") {
    const InverseProblem p = catalog("perturbed_linear", {{"d", "2"}, {"tau", "0.5"}});
    MapOptions o;
    o.seed = 42;
    const MapResult a = map_estimate(p, vec({0, 0}), o), b = map_estimate(p, vec({0, 0}), o);
    CHECK((a.x_hat - b.x_hat).norm() == 0.0);
}
