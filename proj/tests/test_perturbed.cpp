#include <doctest.h>

#include <cmath>
#include <random>

#include "laplace_cert/catalog.hpp"
#include "laplace_cert/constants.hpp"
#include "laplace_cert/perturbed.hpp"

using namespace lc;

namespace {

InverseProblem make(double tau, int d = 1, CatalogParams extra = {}) {
    extra["tau"] = std::to_string(tau);
    extra["d"] = std::to_string(d);
    return catalog("perturbed_linear", extra);
}

MapResult solve(const InverseProblem& p) { return map_estimate(p, p.prior().gaussian()->mean); }

// Smallest probed 2 I(x) / |x - x_hat|^2_Sigma.
double probed_ratio(const InverseProblem& p, const MapResult& m, int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> n01;
    std::exponential_distribution<double> ex(0.5);
    const auto LT = m.sigma_chol.transpose().triangularView<Eigen::Upper>();
    double best = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        Eigen::VectorXd u(p.dim());
        for (int k = 0; k < p.dim(); ++k) u(k) = n01(rng);
        u = u.normalized() * (0.01 + ex(rng));
        const double I = potential_value(p, m.x_hat + LT.solve(u)) - m.i_min;
        best = std::min(best, 2 * I / u.squaredNorm());
    }
    return best;
}

}  // namespace

TEST_CASE("tau = 0 reduces to the linear-Gaussian case") {
    const InverseProblem p = make(0.0, 2);
    const MapResult m = solve(p);
    const PerturbationSpec s = perturbation_spec(p, m);
    const GammaPair g = gamma_pair(s, m);
    CHECK(g.gamma1 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.gamma2 == 0.0);
    CHECK(delta_tau(s, m) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(k_tau(s, m) == 0.0);
    const PerturbationBound b = perturbation_bound(s, m);
    CHECK(b.bound == 0.0);
}

TEST_CASE("scalar gamma1 hand formula") {
    // d = 1, A = 1, eps = 1, sigma0 = 1: P = 2, |A Sigma^{1/2}| = sqrt(Sigma).
    const InverseProblem p = make(0.1, 1, {{"eps", "1"}});
    const MapResult m = solve(p);
    const PerturbationSpec s = perturbation_spec(p, m);
    const double sig = m.sigma(0, 0);
    CHECK(gamma_pair(s, m).gamma1 ==
          doctest::Approx(2 * sig - 2 * 0.1 * s.C[1] * std::sqrt(sig)).epsilon(1e-12));
    CHECK(gamma_pair(s, m).gamma1_squared_form ==
          doctest::Approx(2 * sig - s.C[1] * s.C[1] * 0.01).epsilon(1e-12));
    CHECK(s.C[1] == doctest::Approx(std::sqrt(sig) * s.C_euclid[1]).epsilon(1e-14));
    CHECK(gamma_pair(s, m).gamma2 == doctest::Approx(s.C[2] * 0.1).epsilon(1e-14));
}

TEST_CASE("K_tau increases with tau and vanishes at zero") {
    const MapResult m = solve(make(0.1, 2));
    PerturbationSpec s = perturbation_spec(make(0.1, 2), m);
    double prev = -1.0;
    for (double tau : {0.0, 0.01, 0.05, 0.1, 0.5, 1.0}) {
        s.tau = tau;
        const double k = k_tau(s, m);
        CHECK(k > prev);
        prev = k;
    }
}

TEST_CASE("K_tau and the bound decomposition agree") {
    for (double tau : {0.01, 0.1, 0.4}) {
        const InverseProblem p = make(tau, 2);
        const MapResult m = solve(p);
        const PerturbationSpec s = perturbation_spec(p, m);
        const PerturbationBound b = perturbation_bound(s, m);
        CHECK(b.v_tau * tau + 0.5 * b.w * tau * tau == doctest::Approx(b.k_tau).epsilon(1e-12));
        AssumptionConstants c{b.k_tau, std::min(1.0, std::max(b.delta_tau, 1e-300)), Provenance::Analytic, ""};
        CHECK(b.bound == doctest::Approx(explicit_bound(c, p.eps(), 2).value).epsilon(1e-12));
    }
}

TEST_CASE("sampled third differentials stay below K_tau") {
    for (double tau : {0.05, 0.3}) {
        const InverseProblem p = make(tau, 2);
        const MapResult m = solve(p);
        const double Kt = k_tau(perturbation_spec(p, m), m);
        const auto pts = sample_points(m, 8.0, 1000, 3);
        double sup = 0.0;
        for (const auto& x : pts)
            sup = std::max(sup, tensor_sigma_norm(likelihood(p, x, 3).third, m.sigma_chol, 4, 1).value);
        CHECK(sup <= Kt + 1e-8);
    }
}

TEST_CASE("delta_tau against probed quadratic growth") {
    // The closed form should lower-bound 2 I / |h|^2; checked on a tau grid.
    for (int d : {1, 2})
        for (double tau : {0.01, 0.05, 0.1, 0.2, 0.4}) {
            const InverseProblem p = make(tau, d);
            const MapResult m = solve(p);
            const double dt = delta_tau(perturbation_spec(p, m), m);
            CHECK(dt <= probed_ratio(p, m, 10000, 7) + 1e-6);
        }
}

TEST_CASE("delta_tau converges to delta_0 as tau -> 0") {
    const InverseProblem p0 = make(0.0, 2);
    const MapResult m0 = solve(p0);
    const double d0 = delta_tau(perturbation_spec(p0, m0), m0);
    double prev_gap = std::numeric_limits<double>::infinity();
    for (int k = 1; k <= 12; ++k) {
        const InverseProblem p = make(std::pow(2.0, -k), 2);
        const MapResult m = solve(p);
        const double gap = std::abs(delta_tau(perturbation_spec(p, m), m) - d0);
        CHECK(gap <= prev_gap);
        prev_gap = gap;
    }
    CHECK(prev_gap <= 2e-3);
}

TEST_CASE("the squared-form gamma1 overshoots the probed infimum") {
    // Dropping the cross term 2 tau <A h, F(x) - F(x_hat)> gives a value above the truth.
    const InverseProblem p = make(0.2, 1);
    const MapResult m = solve(p);
    const PerturbationSpec s = perturbation_spec(p, m);
    const GammaPair g = gamma_pair(s, m);
    CHECK(g.gamma1_squared_form - g.gamma2 * s.residual_norm > probed_ratio(p, m, 10000, 7));
}

TEST_CASE("delta_tau is continuous up to the validity edge") {
    const TauEdge edge = tau_validity_edge([](double t) { return make(t, 1); }, 50.0);
    CHECK(edge.tau > 0.0);
    const MapResult m0 = solve(make(0.0));
    const double d0 = delta_tau(perturbation_spec(make(0.0), m0), m0);
    // Scan: delta_tau stays within 0.1 of delta_0 on a small initial range.
    double tau_star = 0.0;
    for (double tau = 0.0; tau <= edge.tau; tau += edge.tau / 200) {
        const InverseProblem p = make(tau);
        const MapResult m = solve(p);
        if (std::abs(delta_tau(perturbation_spec(p, m), m) - d0) > 0.1) break;
        tau_star = tau;
    }
    CHECK(tau_star > 0.0);
    if (edge.bracketed) {
        const InverseProblem beyond = make(edge.tau * 1.05);
        const MapResult mb = solve(beyond);
        CHECK(delta_tau(perturbation_spec(beyond, mb), mb) <= 0.0);
        CHECK_THROWS_AS(perturbation_constants(perturbation_spec(beyond, mb), mb), AssumptionViolation);
    }
}

TEST_CASE("bound slope in tau tends to one") {
    std::vector<double> lt, lb;
    for (int k = 0; k < 10; ++k) {
        const double tau = 0.2 * std::pow(2.0, -k);
        const InverseProblem p = make(tau, 2);
        const MapResult m = solve(p);
        const PerturbationBound b = perturbation_bound(perturbation_spec(p, m), m);
        lt.push_back(std::log(tau));
        lb.push_back(std::log(b.bound));
    }
    // Least squares over the five smallest tau.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int i = 5; i < 10; ++i) {
        sx += lt[i];
        sy += lb[i];
        sxx += lt[i] * lt[i];
        sxy += lt[i] * lb[i];
    }
    const double slope = (5 * sxy - sx * sy) / (5 * sxx - sx * sx);
    CHECK(slope == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("V(tau) is bounded on a refined grid") {
    double vmax_coarse = 0.0, vmax_fine = 0.0;
    for (int i = 0; i <= 40; ++i) {
        const double tau = 0.3 * i / 40;
        const InverseProblem p = make(tau, 2);
        const MapResult m = solve(p);
        const double v = perturbation_bound(perturbation_spec(p, m), m).v_tau;
        CHECK(std::isfinite(v));
        vmax_fine = std::max(vmax_fine, v);
        if (i % 4 == 0) vmax_coarse = std::max(vmax_coarse, v);
    }
    CHECK(vmax_fine <= 1.05 * vmax_coarse);
}

TEST_CASE("perturbation constants need a perturbed linear problem") {
    const InverseProblem p = catalog("linear_gaussian");
    const MapResult m = solve(p);
    CHECK_THROWS_AS(perturbation_spec(p, m), ParameterError);
    CHECK_FALSE(is_perturbed_linear(p));
    CHECK(is_perturbed_linear(make(0.1)));
}
