#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>

#include "laplace_cert/bounds.hpp"
#include "laplace_cert/laplace.hpp"
#include "laplace_cert/model.hpp"

namespace lc {

/// Data of a problem y = A x + tau F(x) + noise with Gaussian prior, and
/// the derivative bounds of F measured in the Sigma_tau norm.
struct PerturbationSpec {
    Eigen::MatrixXd A;
    double tau = 0.0;
    double eps = 1.0;
    Eigen::VectorXd y;
    Eigen::VectorXd m0;
    Eigen::MatrixXd sigma0;
    std::array<double, 4> C{};         // sup |D^j F|_{Sigma_tau}
    std::array<double, 4> C_euclid{};  // sup |D^j F| (Euclidean)
    double M = 0.0;                    // D^3 F = 0 outside B(M)
    double residual_norm = 0.0;        // |G_tau(x_hat) - y|
    double sigma_root_norm = 0.0;      // |Sigma_tau^{1/2}|
    double a_sigma_root_norm = 0.0;    // |A Sigma_tau^{1/2}|
};

/// Builds the PerturbationSpec from a problem whose forward map is a
/// PerturbedLinearMap with Gaussian noise and prior. Euclidean bounds are
/// converted with |D^j F|_{Sigma_tau} <= |Sigma_tau^{1/2}|^j |D^j F|.
PerturbationSpec perturbation_spec(const InverseProblem& p, const MapResult& map);

bool is_perturbed_linear(const InverseProblem& p);

struct GammaPair {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double gamma1_squared_form = 0.0;  // 1/lambda - C1^2 tau^2, not a lower bound in general
};

/// gamma1 = 1 / |Sigma_tau^{-1/2} (A^T A + eps Sigma0^{-1})^{-1/2}|^2 - 2 tau C1 |A Sigma_tau^{1/2}|,
/// gamma2 = C2 tau. The cross term comes from |a + b|^2 >= |a|^2 - 2|a||b|
/// with a = A h and b = tau (F(x) - F(x_hat)).
GammaPair gamma_pair(const PerturbationSpec& s, const MapResult& map);

/// gamma1 - gamma2 |G_tau(x_hat) - y| (unclamped).
double delta_tau(const PerturbationSpec& s, const MapResult& map);

/// tau (C3 (|A| M + |y|) + 3 C2 |A Sigma_tau^{1/2}|) + tau^2/2 (C3 C0 + 3 C2 C1).
double k_tau(const PerturbationSpec& s, const MapResult& map);

struct PerturbationBound {
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double delta_tau = 0.0;
    double k_tau = 0.0;
    double v_tau = 0.0;
    double w = 0.0;
    double bound = 0.0;
    bool valid = false;  // delta_tau > 0 and the explicit-bound condition holds
    bool delta_positive = false;
    ExplicitBound explicit_bound;
};

PerturbationBound perturbation_bound(const PerturbationSpec& s, const MapResult& map);

/// Constants (K_tau, min(delta_tau, 1)) with analytic provenance. Throws
/// AssumptionViolation when delta_tau <= 0.
AssumptionConstants perturbation_constants(const PerturbationSpec& s, const MapResult& map);

struct TauEdge {
    double tau = 0.0;       // largest tau found with delta_tau > 0
    bool bracketed = false; // false: delta_tau > 0 on the whole range
};

/// Bisection for the largest tau in [0, tau_max] with delta_tau > 0, for a
/// family of problems tau -> make(tau).
TauEdge tau_validity_edge(const std::function<InverseProblem(double)>& make, double tau_max,
                          const MapOptions& opt = {}, int iterations = 40);

}  // namespace lc
