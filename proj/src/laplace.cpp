#include "laplace_cert/laplace.hpp"

#include <cmath>
#include <numbers>

#include "laplace_cert/parallel.hpp"

namespace lc {

namespace {

constexpr double kArmijo = 1e-4;

struct RunOutcome {
    std::optional<MapResult> result;
    std::exception_ptr error;
};

}  // namespace

MapResult make_map_result(const InverseProblem& p, const Eigen::VectorXd& x_hat) {
    const PotentialEval e = potential(p, x_hat, 2);
    const int d = p.dim();
    MapResult m;
    m.x_hat = x_hat;
    m.i_min = e.value;
    m.grad_norm = e.grad.norm();
    m.hess = 0.5 * (e.hess + e.hess.transpose());
    m.min_eigenvalue = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m.hess, Eigen::EigenvaluesOnly)
                           .eigenvalues()
                           .minCoeff();
    Eigen::LLT<Eigen::MatrixXd> llt(m.hess);
    if (llt.info() != Eigen::Success || !(m.min_eigenvalue > 0.0))
        throw IndefiniteHessianError("Hessian at the stationary point is not positive definite",
                                     x_hat, m.min_eigenvalue);
    m.sigma_chol = llt.matrixL();
    m.sigma = llt.solve(Eigen::MatrixXd::Identity(d, d));
    m.sigma = 0.5 * (m.sigma + m.sigma.transpose());
    m.log_det_sigma = -2.0 * m.sigma_chol.diagonal().array().log().sum();
    m.eps = p.eps();
    m.log_z_tilde = 0.5 * d * (std::log(p.eps()) + std::log(2.0 * std::numbers::pi)) +
                    0.5 * m.log_det_sigma;
    m.z_tilde = std::exp(m.log_z_tilde);
    return m;
}

MapResult newton_minimize(const InverseProblem& p, const Eigen::VectorXd& x0, double tol,
                          int max_iter) {
    if (!x0.allFinite()) throw ParameterError("map_estimate: x0 must be finite");
    if (!(tol > 0.0)) throw ParameterError("map_estimate: tol must be positive");
    const int d = p.dim();
    Eigen::VectorXd x = x0;
    std::vector<double> history;
    int it = 0;
    for (;; ++it) {
        const PotentialEval e = potential(p, x, 2);
        const double gn = e.grad.norm();
        history.push_back(gn);
        if (gn <= tol) break;
        if (it >= max_iter)
            throw NonConvergenceError("Newton iteration did not converge", x, gn);

        // Newton direction, shifting the Hessian until it is SPD and the
        // direction descends.
        Eigen::MatrixXd H = 0.5 * (e.hess + e.hess.transpose());
        const double scale = std::max(1.0, H.cwiseAbs().maxCoeff());
        double shift = 0.0;
        Eigen::VectorXd step;
        for (int k = 0; k < 200; ++k) {
            Eigen::LLT<Eigen::MatrixXd> llt(H + shift * Eigen::MatrixXd::Identity(d, d));
            if (llt.info() == Eigen::Success) {
                step = -llt.solve(e.grad);
                if (step.allFinite() && e.grad.dot(step) < 0.0) break;
            }
            shift = shift == 0.0 ? 1e-8 * scale : 2.0 * shift;
            step.resize(0);
        }
        if (step.size() == 0) throw NonConvergenceError("no descent direction found", x, gn);

        // Armijo backtracking by halving.
        const double slope = e.grad.dot(step);
        double t = 1.0;
        bool accepted = false;
        for (int k = 0; k < 60; ++k) {
            const Eigen::VectorXd xt = x + t * step;
            double ft;
            try {
                ft = potential_value(p, xt);
            } catch (const EvaluationError&) {
                t *= 0.5;
                continue;
            }
            if (ft <= e.value + kArmijo * t * slope) {
                x = xt;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            // Near the minimum the decrease drops below the rounding of I~;
            // fall back to accepting the full step if it shrinks the gradient.
            const Eigen::VectorXd xt = x + step;
            const PotentialEval et = potential(p, xt, 1);
            if (et.grad.norm() < gn)
                x = xt;
            else
                throw NonConvergenceError("line search stalled", x, gn);
        }
    }
    MapResult m = make_map_result(p, x);
    m.converged = true;
    m.iterations = it;
    m.grad_history = std::move(history);
    m.starts = 1;
    return m;
}

MapResult map_estimate(const InverseProblem& p, const Eigen::VectorXd& x0,
                       const MapOptions& opt) {
    const int d = p.dim();
    if (x0.size() != d) throw ParameterError("map_estimate: x0 has wrong dimension");
    if (!x0.allFinite()) throw ParameterError("map_estimate: x0 must be finite");
    const double tol = opt.tol.value_or(1e-10 * std::max(1.0, std::abs(potential_value(p, x0))));
    if (!(tol > 0.0)) throw ParameterError("map_estimate: tol must be positive");

    Eigen::VectorXd center = x0;
    Eigen::MatrixXd spread = Eigen::MatrixXd::Identity(d, d);
    if (auto g = p.prior().gaussian()) {
        center = g->mean;
        spread = Eigen::LLT<Eigen::MatrixXd>(g->cov).matrixL();
    }
    std::vector<Eigen::VectorXd> starts{x0};
    for (int s = 0; s < opt.multistart; ++s) {
        std::mt19937_64 rng(stream_seed(opt.seed, static_cast<std::uint64_t>(s)));
        std::normal_distribution<double> n01;
        Eigen::VectorXd z(d);
        for (int i = 0; i < d; ++i) z(i) = n01(rng);
        starts.push_back(center + opt.spread * spread * z);
    }

    std::vector<RunOutcome> runs(starts.size());
    parallel_for(starts.size(), [&](std::size_t i) {
        try {
            runs[i].result = newton_minimize(p, starts[i], tol, opt.max_iter);
        } catch (...) {
            runs[i].error = std::current_exception();
        }
    });

    std::vector<const MapResult*> minima;
    for (const auto& r : runs)
        if (r.result) minima.push_back(&*r.result);
    if (minima.empty()) std::rethrow_exception(runs.front().error);

    const MapResult* best = minima.front();
    for (const MapResult* m : minima)
        if (m->i_min < best->i_min) best = m;

    // Count distinct local minima among the runs.
    std::vector<const MapResult*> distinct;
    for (const MapResult* m : minima) {
        bool seen = false;
        for (const MapResult* q : distinct)
            if ((m->x_hat - q->x_hat).norm() <= 1e-6 * (1.0 + q->x_hat.norm())) seen = true;
        if (!seen) distinct.push_back(m);
    }

    MapResult out = *best;
    out.starts = static_cast<int>(starts.size());
    out.distinct_minima = static_cast<int>(distinct.size());
    out.uniqueness = distinct.size() > 1 ? Uniqueness::Falsified : Uniqueness::Unverified;
    return out;
}

double sigma_norm(const MapResult& map, const Eigen::VectorXd& h) {
    if (h.size() != map.dim()) throw ParameterError("sigma_norm: dimension mismatch");
    return (map.sigma_chol.transpose() * h).norm();
}

LaplaceApprox::LaplaceApprox(const MapResult& map, double eps)
    : mean_(map.x_hat), sigma_(map.sigma), chol_(map.sigma_chol), eps_(eps) {
    if (!map.converged) throw ParameterError("laplace_approx: MAP estimate did not converge");
    if (!(eps > 0.0)) throw ParameterError("laplace_approx: eps must be positive");
    const int d = dim();
    log_z_tilde_ = 0.5 * d * (std::log(eps) + std::log(2.0 * std::numbers::pi)) +
                   0.5 * map.log_det_sigma;
}

double LaplaceApprox::log_density(const Eigen::VectorXd& x) const {
    const double r = (chol_.transpose() * (x - mean_)).squaredNorm();
    return -0.5 * r / eps_ - log_z_tilde_;
}

Eigen::VectorXd LaplaceApprox::from_whitened(const Eigen::VectorXd& u) const {
    return mean_ + std::sqrt(eps_) *
                       chol_.transpose().triangularView<Eigen::Upper>().solve(u);
}

Eigen::VectorXd LaplaceApprox::to_whitened(const Eigen::VectorXd& x) const {
    return chol_.transpose() * (x - mean_) / std::sqrt(eps_);
}

LaplaceApprox laplace_approx(const MapResult& map, double eps) { return LaplaceApprox(map, eps); }

}  // namespace lc
