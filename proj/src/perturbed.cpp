#include "laplace_cert/perturbed.hpp"

#include <cmath>

namespace lc {

namespace {

double spectral_norm(const Eigen::MatrixXd& M) {
    return Eigen::JacobiSVD<Eigen::MatrixXd>(M).singularValues()(0);
}

double lambda_max(const Eigen::MatrixXd& S) {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(S, Eigen::EigenvaluesOnly)
        .eigenvalues()
        .maxCoeff();
}

}  // namespace

bool is_perturbed_linear(const InverseProblem& p) {
    return dynamic_cast<const PerturbedLinearMap*>(&p.forward()) != nullptr &&
           p.noise() == NoiseModel::Gaussian && p.prior().gaussian().has_value();
}

PerturbationSpec perturbation_spec(const InverseProblem& p, const MapResult& map) {
    const auto* G = dynamic_cast<const PerturbedLinearMap*>(&p.forward());
    const auto prior = p.prior().gaussian();
    if (!G || !prior || p.noise() != NoiseModel::Gaussian)
        throw ParameterError(
            "perturbation bounds need a perturbed linear map with Gaussian noise and prior");
    if (!map.converged) throw ParameterError("perturbation_spec: MAP estimate did not converge");
    PerturbationSpec s;
    s.A = G->matrix();
    s.tau = G->tau();
    s.eps = p.eps();
    s.y = p.data();
    s.m0 = prior->mean;
    s.sigma0 = prior->cov;
    s.C_euclid = G->perturbation().euclidean_bounds();
    s.M = G->perturbation().support_radius();
    s.residual_norm = (G->value(map.x_hat) - p.data()).norm();
    s.sigma_root_norm = std::sqrt(lambda_max(map.sigma));
    s.a_sigma_root_norm = std::sqrt(lambda_max(s.A * map.sigma * s.A.transpose()));
    for (int j = 0; j < 4; ++j) s.C[j] = std::pow(s.sigma_root_norm, j) * s.C_euclid[j];
    return s;
}

GammaPair gamma_pair(const PerturbationSpec& s, const MapResult& map) {
    const int d = static_cast<int>(s.A.cols());
    const Eigen::MatrixXd P = s.A.transpose() * s.A +
                              s.eps * s.sigma0.llt().solve(Eigen::MatrixXd::Identity(d, d));
    // |Sigma^{-1/2} P^{-1/2}|^2 is the top generalized eigenvalue of (H, P), H = Sigma^{-1}.
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(map.hess, P,
                                                                  Eigen::EigenvaluesOnly);
    GammaPair g;
    const double base = 1.0 / ges.eigenvalues().maxCoeff();
    g.gamma1 = base - 2.0 * s.tau * s.C[1] * s.a_sigma_root_norm;
    g.gamma1_squared_form = base - s.C[1] * s.C[1] * s.tau * s.tau;
    g.gamma2 = s.C[2] * s.tau;
    return g;
}

double delta_tau(const PerturbationSpec& s, const MapResult& map) {
    const GammaPair g = gamma_pair(s, map);
    return g.gamma1 - g.gamma2 * s.residual_norm;
}

double k_tau(const PerturbationSpec& s, const MapResult&) {
    const double v = s.C[3] * (spectral_norm(s.A) * s.M + s.y.norm()) +
                     3.0 * s.C[2] * s.a_sigma_root_norm;
    const double w = s.C[3] * s.C[0] + 3.0 * s.C[2] * s.C[1];
    return s.tau * v + 0.5 * s.tau * s.tau * w;
}

PerturbationBound perturbation_bound(const PerturbationSpec& s, const MapResult& map) {
    PerturbationBound b;
    const GammaPair g = gamma_pair(s, map);
    b.gamma1 = g.gamma1;
    b.gamma2 = g.gamma2;
    b.delta_tau = g.gamma1 - g.gamma2 * s.residual_norm;
    b.k_tau = k_tau(s, map);
    b.v_tau = s.C[3] * (spectral_norm(s.A) * s.M + s.y.norm()) + 3.0 * s.C[2] * s.a_sigma_root_norm;
    b.w = s.C[3] * s.C[0] + 3.0 * s.C[2] * s.C[1];
    const int d = static_cast<int>(s.A.cols());
    b.delta_positive = b.delta_tau > 0.0;
    AssumptionConstants c;
    c.K = b.v_tau * s.tau + 0.5 * b.w * s.tau * s.tau;
    c.delta = b.delta_positive ? std::min(b.delta_tau, 1.0) : 1.0;
    c.provenance = Provenance::Analytic;
    b.explicit_bound = explicit_bound(c, s.eps, d);
    b.bound = b.explicit_bound.value;
    b.valid = b.delta_positive && b.explicit_bound.condition_ok;
    if (!b.delta_positive) b.explicit_bound.condition_ok = false;
    return b;
}

AssumptionConstants perturbation_constants(const PerturbationSpec& s, const MapResult& map) {
    const double dt = delta_tau(s, map);
    if (!(dt > 0.0))
        throw AssumptionViolation("perturbation too large: delta_tau = " + std::to_string(dt) +
                                  " <= 0");
    AssumptionConstants c;
    c.K = k_tau(s, map);
    c.delta = std::min(dt, 1.0);
    c.provenance = Provenance::Analytic;
    c.details = "closed-form K_tau and delta_tau for the perturbed linear map";
    return c;
}

TauEdge tau_validity_edge(const std::function<InverseProblem(double)>& make, double tau_max,
                          const MapOptions& opt, int iterations) {
    if (!(tau_max > 0.0)) throw ParameterError("tau_validity_edge: tau_max must be positive");
    auto positive = [&](double tau) {
        const InverseProblem p = make(tau);
        try {
            const MapResult m = map_estimate(p, p.prior().gaussian()->mean, opt);
            return delta_tau(perturbation_spec(p, m), m) > 0.0;
        } catch (const AssumptionViolation&) {
            return false;
        }
    };
    TauEdge e;
    if (positive(tau_max)) {
        e.tau = tau_max;
        return e;
    }
    // Scan downward for a positive point, then bisect.
    double hi = tau_max, lo = tau_max;
    for (int k = 0; k < 60; ++k) {
        lo *= 0.5;
        if (positive(lo)) break;
        hi = lo;
    }
    for (int k = 0; k < iterations; ++k) {
        const double mid = 0.5 * (lo + hi);
        if (positive(mid))
            lo = mid;
        else
            hi = mid;
    }
    e.tau = lo;
    e.bracketed = true;
    return e;
}

}  // namespace lc
