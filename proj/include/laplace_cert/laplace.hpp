#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <random>
#include <vector>

#include "laplace_cert/errors.hpp"
#include "laplace_cert/model.hpp"

namespace lc {

/// The Hessian at the terminal Newton point is not positive definite.
class IndefiniteHessianError : public AssumptionViolation {
public:
    IndefiniteHessianError(const std::string& what, Eigen::VectorXd x, double min_eig)
        : AssumptionViolation(what), x_(std::move(x)), min_eig_(min_eig) {}
    const Eigen::VectorXd& point() const { return x_; }
    double min_eigenvalue() const { return min_eig_; }

private:
    Eigen::VectorXd x_;
    double min_eig_;
};

/// Newton iteration budget exhausted; carries the last iterate.
class NonConvergenceError : public NumericalError {
public:
    NonConvergenceError(const std::string& what, Eigen::VectorXd x, double grad_norm)
        : NumericalError(what), x_(std::move(x)), grad_norm_(grad_norm) {}
    const Eigen::VectorXd& last_iterate() const { return x_; }
    double grad_norm() const { return grad_norm_; }

private:
    Eigen::VectorXd x_;
    double grad_norm_;
};

/// Multistart can disprove uniqueness of the global minimiser but never
/// prove it.
enum class Uniqueness { Unverified, Falsified };

struct MapOptions {
    std::optional<double> tol;  // default 1e-10 * max(1, |I~(x0)|)
    int max_iter = 200;
    int multistart = 8;         // random restarts besides x0
    double spread = 1.0;        // restart scale, in prior standard deviations
    std::uint64_t seed = 0;
};

struct MapResult {
    Eigen::VectorXd x_hat;
    double i_min = 0.0;        // I~(x_hat), unshifted
    double grad_norm = 0.0;
    Eigen::MatrixXd hess;      // H = D^2 I(x_hat)
    Eigen::MatrixXd sigma;     // H^{-1}
    Eigen::MatrixXd sigma_chol;  // lower L with H = L L^T
    double min_eigenvalue = 0.0;
    double log_det_sigma = 0.0;
    double eps = 0.0;
    double z_tilde = 0.0;      // eps^{d/2} (2 pi)^{d/2} sqrt(det Sigma)
    double log_z_tilde = 0.0;
    bool converged = false;
    int iterations = 0;
    std::vector<double> grad_history;  // gradient norms of the winning run
    Uniqueness uniqueness = Uniqueness::Unverified;
    int starts = 0;
    int distinct_minima = 1;

    int dim() const { return static_cast<int>(x_hat.size()); }
};

/// Single damped-Newton run from x0 (Armijo backtracking, diagonal
/// Hessian shift when the Newton direction is not a descent direction).
MapResult newton_minimize(const InverseProblem& p, const Eigen::VectorXd& x0, double tol,
                          int max_iter);

/// MAP estimate: Newton from x0 plus `multistart` random restarts around
/// the prior mean; the lowest stationary point with an SPD Hessian wins.
MapResult map_estimate(const InverseProblem& p, const Eigen::VectorXd& x0,
                       const MapOptions& opt = {});

/// Completes a MapResult (Sigma, factor, normalisation) from a point and
/// its Hessian. Throws IndefiniteHessianError when H is not SPD.
MapResult make_map_result(const InverseProblem& p, const Eigen::VectorXd& x_hat);

/// ||h||_Sigma = sqrt(h^T H h).
double sigma_norm(const MapResult& map, const Eigen::VectorXd& h);

/// The Gaussian N(x_hat, eps Sigma).
class LaplaceApprox {
public:
    LaplaceApprox(const MapResult& map, double eps);

    int dim() const { return static_cast<int>(mean_.size()); }
    const Eigen::VectorXd& mean() const { return mean_; }
    Eigen::MatrixXd covariance() const { return eps_ * sigma_; }
    double log_normalizer() const { return log_z_tilde_; }

    double log_density(const Eigen::VectorXd& x) const;
    /// x = mean + sqrt(eps) L^{-T} u, so u ~ N(0, I) maps to a draw.
    Eigen::VectorXd from_whitened(const Eigen::VectorXd& u) const;
    Eigen::VectorXd to_whitened(const Eigen::VectorXd& x) const;

    template <typename Rng>
    Eigen::VectorXd sample(Rng& rng) const {
        std::normal_distribution<double> n01;
        Eigen::VectorXd u(dim());
        for (int i = 0; i < dim(); ++i) u(i) = n01(rng);
        return from_whitened(u);
    }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd sigma_;
    Eigen::MatrixXd chol_;  // L, H = L L^T
    double eps_;
    double log_z_tilde_;
};

LaplaceApprox laplace_approx(const MapResult& map, double eps);

}  // namespace lc
