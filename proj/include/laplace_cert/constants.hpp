#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>

#include "laplace_cert/bounds.hpp"
#include "laplace_cert/laplace.hpp"
#include "laplace_cert/model.hpp"
#include "laplace_cert/tensor.hpp"

namespace lc {

struct TensorNormResult {
    double value = 0.0;
    Eigen::VectorXd argmax;  // Euclidean unit vector in whitened coordinates
    int restarts = 0;
    double converged_fraction = 0.0;
};

/// sup |T(h,h,h)| over |h|_Sigma <= 1, where H = L L^T. T is carried to
/// whitened coordinates h = L^{-T} u and T~(u,u,u) is maximised over the
/// unit sphere by shifted symmetric power iteration from `restarts` random
/// starts plus the coordinate axes. For a symmetric trilinear form the
/// diagonal supremum equals the supremum over independent unit vectors,
/// so this is the full Sigma-norm (estimated from below).
TensorNormResult tensor_sigma_norm(const Tensor3& T, const Eigen::MatrixXd& sigma_chol,
                                   int restarts = 8, std::uint64_t seed = 0);

struct SampleOptions {
    double radius = 0.0;  // Sigma-norm radius around x_hat; <= 0 means default_sample_radius
    int n_points = 256;
    std::uint64_t seed = 0;
    double safety = 1.1;  // K inflation
    double margin = 0.05; // delta deflation
    int tensor_restarts = 4;
    bool ray_probe = true;
    bool allow_analytic = true;  // short-circuit linear-Gaussian problems
};

/// 12 sqrt(d eps): several times the typical split radius.
double default_sample_radius(int d, double eps);

/// Sample points: x_hat, then x_hat + L^{-T} (rho_i v_i) with radii
/// rho_i = radius * vdc(i) (base-2 van der Corput, so point sets for
/// different n are nested) and uniform directions v_i seeded per index.
std::vector<Eigen::VectorXd> sample_points(const MapResult& map, double radius, int n,
                                           std::uint64_t seed);

struct ConstantEstimate {
    double value = 0.0;
    double raw = 0.0;  // before safety factor / margin
    Provenance provenance = Provenance::Estimated;
    int points = 0;
    std::string details;
};

/// max over sample points of max(|D^3 Phi|_Sigma, |D^3 R|_Sigma), times the
/// safety factor. Exactly 0 (analytic) for linear-Gaussian problems.
ConstantEstimate estimate_K(const InverseProblem& p, const MapResult& map,
                            const SampleOptions& opt = {});

struct RayProbe {
    double min_exponent = 2.0;  // smallest far-field growth exponent of I along rays
    Eigen::VectorXd worst_direction;
    bool violated = false;
};

/// Growth exponent of I along rays x_hat + t L^{-T} v for large t; below
/// 2 - 0.25 the quadratic lower bound cannot hold globally.
RayProbe probe_tail_growth(const InverseProblem& p, const MapResult& map, int n_directions,
                           std::uint64_t seed);

/// min(1, (1 - margin) inf 2 I(x) / |x - x_hat|_Sigma^2) over sample points.
/// Exactly 1 (analytic) for linear-Gaussian problems. Throws
/// AssumptionViolation when the infimum is <= 0 or a ray probe shows
/// sub-quadratic growth.
ConstantEstimate estimate_delta(const InverseProblem& p, const MapResult& map,
                                const SampleOptions& opt = {});

/// K and delta in closed form where available: linear-Gaussian (0, 1) and
/// perturbed linear maps (K_tau, min(delta_tau, 1)).
std::optional<AssumptionConstants> analytic_constants(const InverseProblem& p,
                                                      const MapResult& map);

/// Sampled K and delta, with provenance `estimated`.
AssumptionConstants estimated_constants(const InverseProblem& p, const MapResult& map,
                                        const SampleOptions& opt = {});

}  // namespace lc
