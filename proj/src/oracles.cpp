#include "laplace_cert/oracles.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "laplace_cert/parallel.hpp"
#include "laplace_cert/quadrature.hpp"

namespace lc {

namespace {

const double kLogSqrt2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// Whitened-coordinate view of the posterior.
struct Whitened {
    const InverseProblem& p;
    const MapResult& map;
    Eigen::MatrixXd B;  // sqrt(eps) L^{-T}
    int d;

    Whitened(const InverseProblem& p_, const MapResult& m_) : p(p_), map(m_), d(m_.dim()) {
        B = std::sqrt(p.eps()) * m_.sigma_chol.transpose().triangularView<Eigen::Upper>().solve(
                                     Eigen::MatrixXd::Identity(d, d));
    }

    // ln w(u) = -I(x(u))/eps + |u|^2/2; -inf where the potential blows up.
    double log_w(const Eigen::VectorXd& u) const {
        try {
            const double I = potential_value(p, map.x_hat + B * u) - map.i_min;
            return -I / p.eps() + 0.5 * u.squaredNorm();
        } catch (const EvaluationError&) {
            return -std::numeric_limits<double>::infinity();
        }
    }
    double log_phi(const Eigen::VectorXd& u) const { return -0.5 * u.squaredNorm() - d * kLogSqrt2Pi; }
};

// Integrates f over [-R, R]^d by nesting one-dimensional adaptive rules.
// Component N-1 of the result accumulates the error estimates of the inner
// integrals, so the caller gets value[0..N-2] plus a total error.
template <std::size_t N, typename F>
quad::Result<N> nested(const F& f, int d, double R, double tol, int max_intervals) {
    Eigen::VectorXd u(d);
    long evals = 0;
    std::function<quad::Values<N>(int)> level;
    quad::Result<N> outer;
    level = [&](int k) -> quad::Values<N> {
        quad::Options opt;
        opt.abs_tol = tol * std::pow(1.0 / (2.0 * R), k);
        opt.max_intervals = max_intervals;
        auto g = [&](double t) {
            u(k) = t;
            if (k + 1 == d) {
                quad::Values<N> v = f(u);
                v[N - 1] = 0.0;
                ++evals;
                return v;
            }
            return level(k + 1);
        };
        quad::Result<N> r = quad::integrate<N>(g, -R, R, opt, 8);
        if (k == 0) {
            outer = r;
            return r.value;
        }
        quad::Values<N> v = r.value;
        v[N - 1] += r.error;
        return v;
    };
    level(0);
    outer.evaluations = evals;
    return outer;
}

// Largest phi-weighted posterior density ratio on the faces of the box.
double boundary_mass(const Whitened& W, double R) {
    const int d = W.d;
    const int m = d == 1 ? 1 : 65;
    double worst = 0.0;
    Eigen::VectorXd u(d);
    for (int axis = 0; axis < d; ++axis)
        for (int side : {-1, 1})
            for (int i = 0; i < std::max(1, static_cast<int>(std::pow(m, d - 1))); ++i) {
                int code = i;
                for (int k = 0; k < d; ++k) {
                    if (k == axis) {
                        u(k) = side * R;
                        continue;
                    }
                    u(k) = -R + 2.0 * R * (code % m) / (m - 1);
                    code /= m;
                }
                worst = std::max(worst, std::exp(W.log_w(u) + W.log_phi(u)));
            }
    return worst;
}

}  // namespace

const char* to_string(OracleMethod m) {
    return m == OracleMethod::Quadrature ? "quadrature" : "importance";
}

QuadratureDistances quadrature_distances(const InverseProblem& p, const MapResult& map,
                                         const QuadratureSpec& spec) {
    if (!map.converged) throw ParameterError("quadrature oracle: MAP estimate did not converge");
    if (!(spec.radius > 0.0) || !(spec.tol > 0.0))
        throw ParameterError("quadrature oracle: radius and tol must be positive");
    const Whitened W(p, map);
    const int d = W.d;

    double R = spec.radius;
    for (int k = 0;; ++k) {
        // Posterior density (in u) on the faces, times the face area.
        const double edge = boundary_mass(W, R) * std::pow(2.0 * R, d - 1);
        if (edge <= 0.1 * spec.tol) break;
        if (k >= spec.max_doublings)
            throw NumericalError("quadrature oracle: posterior mass beyond box of half-width " +
                                 std::to_string(R) + " (whitened units)");
        R *= 2.0;
    }

    QuadratureDistances out;
    out.radius = R;
    auto pass1 = [&](const Eigen::VectorXd& u) {
        return quad::Values<2>{std::exp(W.log_w(u) + W.log_phi(u)), 0.0};
    };
    const auto z = nested<2>(pass1, d, R, spec.tol, spec.max_intervals);
    out.zeta = z.value[0];
    out.zeta_err = z.error + z.value[1];
    out.evaluations += z.evaluations;
    if (!(out.zeta > 0.0) || !std::isfinite(out.zeta))
        throw NumericalError("quadrature oracle: normalisation is not positive and finite");

    const double log_zeta = std::log(out.zeta);
    auto pass2 = [&](const Eigen::VectorXd& u) {
        const double lw = W.log_w(u);
        const double phi = std::exp(W.log_phi(u));
        const double pp = std::exp(lw - log_zeta) * phi;  // posterior density in u
        const double w = std::exp(lw);
        const double sq = std::sqrt(pp) - std::sqrt(phi);
        return quad::Values<4>{0.5 * std::abs(pp - phi), 0.5 * sq * sq, std::abs(w - 1.0) * phi,
                               0.0};
    };
    const auto r = nested<4>(pass2, d, R, spec.tol, spec.max_intervals);
    out.evaluations += r.evaluations;
    const double inner = r.value[3];
    // TV also inherits the normalisation error through 1/zeta.
    out.tv = r.value[0];
    out.tv_err = r.error + inner + out.zeta_err / out.zeta;
    out.hellinger = std::sqrt(std::max(0.0, r.value[1]));
    out.hellinger_sq_err = r.error + inner + out.zeta_err / out.zeta;
    out.fundamental = r.value[2];
    out.fundamental_err = r.error + inner;
    out.z_tilde = map.z_tilde;
    out.z = out.zeta * map.z_tilde;
    return out;
}

double normalization(const InverseProblem& p, const MapResult& map, const QuadratureSpec& spec) {
    if (!map.converged) throw ParameterError("normalization: MAP estimate did not converge");
    const Whitened W(p, map);
    auto f = [&](const Eigen::VectorXd& u) {
        return quad::Values<2>{std::exp(W.log_w(u) + W.log_phi(u)), 0.0};
    };
    double R = spec.radius;
    for (int k = 0; boundary_mass(W, R) * std::pow(2.0 * R, W.d - 1) > 0.1 * spec.tol; ++k) {
        if (k >= spec.max_doublings)
            throw NumericalError("normalization: posterior mass beyond the integration box");
        R *= 2.0;
    }
    return nested<2>(f, W.d, R, spec.tol, spec.max_intervals).value[0] * map.z_tilde;
}

TvEstimate tv_quadrature(const InverseProblem& p, const MapResult& map, const QuadratureSpec& spec) {
    const QuadratureDistances q = quadrature_distances(p, map, spec);
    TvEstimate t;
    t.value = std::min(1.0, std::max(0.0, q.tv));
    t.err = q.tv_err;
    t.method = OracleMethod::Quadrature;
    t.z = q.z;
    t.z_tilde = q.z_tilde;
    return t;
}

double hellinger(const InverseProblem& p, const MapResult& map, const QuadratureSpec& spec) {
    return quadrature_distances(p, map, spec).hellinger;
}

ImportanceEstimate importance_distances(const InverseProblem& p, const MapResult& map, long n,
                                        std::uint64_t seed) {
    if (!map.converged) throw ParameterError("importance oracle: MAP estimate did not converge");
    constexpr int kBatches = 16;
    if (n < 1000) throw ParameterError("importance oracle: need at least 1000 samples");
    const Whitened W(p, map);
    const int d = W.d;
    const long per = n / kBatches;
    const long total = per * kBatches;
    std::vector<double> lw(static_cast<std::size_t>(total));
    parallel_for(kBatches, [&](std::size_t b) {
        std::mt19937_64 rng(stream_seed(seed, b));
        std::normal_distribution<double> n01;
        Eigen::VectorXd u(d);
        for (long i = 0; i < per; ++i) {
            for (int k = 0; k < d; ++k) u(k) = n01(rng);
            lw[b * per + i] = W.log_w(u);
        }
    });

    std::vector<double> w(lw.size());
    double sw = 0.0, sw2 = 0.0;
    for (std::size_t i = 0; i < lw.size(); ++i) {
        w[i] = std::exp(lw[i]);
        sw += w[i];
        sw2 += w[i] * w[i];
    }
    if (!std::isfinite(sw) || !(sw > 0.0))
        throw NumericalError("importance oracle: weights overflow or vanish");
    const double zeta = sw / total;

    auto batch_stats = [&](auto&& stat) {
        double mean = 0.0, m2 = 0.0;
        std::array<double, kBatches> v{};
        for (int b = 0; b < kBatches; ++b) {
            v[b] = stat(b);
            mean += v[b] / kBatches;
        }
        for (int b = 0; b < kBatches; ++b) m2 += (v[b] - mean) * (v[b] - mean);
        return std::sqrt(m2 / (kBatches - 1) / kBatches);
    };
    auto range_mean = [&](int b, auto&& g) {
        double s = 0.0;
        for (long i = b * per; i < (b + 1) * per; ++i) s += g(w[i]);
        return s / per;
    };

    ImportanceEstimate out;
    out.n = total;
    out.zeta = zeta;
    out.zeta_err = batch_stats([&](int b) { return range_mean(b, [](double x) { return x; }); });
    double tv = 0.0, fund = 0.0;
    for (double x : w) {
        tv += std::abs(x / zeta - 1.0);
        fund += std::abs(x - 1.0);
    }
    out.tv.value = std::min(1.0, 0.5 * tv / total);
    out.tv.err = batch_stats([&](int b) {
        const double zb = range_mean(b, [](double x) { return x; });
        return 0.5 * range_mean(b, [&](double x) { return std::abs(x / zb - 1.0); });
    });
    out.fundamental = fund / total;
    out.fundamental_err =
        batch_stats([&](int b) { return range_mean(b, [](double x) { return std::abs(x - 1.0); }); });
    out.tv.method = OracleMethod::Importance;
    out.tv.ess = sw * sw / sw2;
    out.tv.unreliable = out.tv.ess < 0.01 * total;
    out.tv.z_tilde = map.z_tilde;
    out.tv.z = zeta * map.z_tilde;
    return out;
}

TvEstimate tv_importance(const InverseProblem& p, const MapResult& map, long n, std::uint64_t seed) {
    return importance_distances(p, map, n, seed).tv;
}

PairDistances density_pair_1d(const std::function<double(double)>& log_p,
                              const std::function<double(double)>& log_q, double a, double b,
                              double tol) {
    if (!(b > a)) throw ParameterError("density_pair_1d: need a < b");
    auto f = [&](double x) {
        const double p = std::exp(log_p(x)), q = std::exp(log_q(x));
        const double s = std::sqrt(p) - std::sqrt(q);
        return quad::Values<2>{0.5 * std::abs(p - q), 0.5 * s * s};
    };
    quad::Options opt;
    opt.abs_tol = tol;
    opt.max_intervals = 20000;
    const auto r = quad::integrate<2>(f, a, b, opt, 16);
    return {r.value[0], std::sqrt(std::max(0.0, r.value[1])), r.error};
}

bool kraft_holds(double tv, double hellinger, double tol) {
    return hellinger * hellinger <= tv + tol && tv <= std::numbers::sqrt2 * hellinger + tol;
}

}  // namespace lc
