#include "laplace_cert/constants.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "laplace_cert/parallel.hpp"
#include "laplace_cert/perturbed.hpp"

namespace lc {

namespace {

Eigen::VectorXd random_unit(int d, std::mt19937_64& rng) {
    std::normal_distribution<double> n01;
    Eigen::VectorXd v(d);
    do {
        for (int i = 0; i < d; ++i) v(i) = n01(rng);
    } while (v.norm() == 0.0);
    return v.normalized();
}

double van_der_corput(std::uint64_t i) {
    double x = 0.0, f = 0.5;
    while (i) {
        if (i & 1) x += f;
        i >>= 1;
        f *= 0.5;
    }
    return x;
}

// Shifted symmetric higher-order power method from u; returns a local
// maximiser of T(u,u,u) on the sphere.
std::pair<Eigen::VectorXd, bool> ss_hopm(const Tensor3& T, Eigen::VectorXd u, double shift) {
    for (int it = 0; it < 2000; ++it) {
        Eigen::VectorXd next = T.apply_vec(u) + shift * u;
        const double n = next.norm();
        if (n == 0.0) return {u, true};
        next /= n;
        const double change = (next - u).norm();
        u = next;
        if (change < 1e-13) return {u, true};
    }
    return {u, false};
}

}  // namespace

TensorNormResult tensor_sigma_norm(const Tensor3& T, const Eigen::MatrixXd& sigma_chol,
                                   int restarts, std::uint64_t seed) {
    const int d = T.dim();
    if (sigma_chol.rows() != d || sigma_chol.cols() != d)
        throw ParameterError("tensor_sigma_norm: dimension mismatch");
    const double scale = std::max(1.0, T.max_abs());
    if (T.max_asymmetry() > 1e-8 * scale)
        throw ParameterError("tensor_sigma_norm: tensor is not totally symmetric");
    if (restarts < 0) throw ParameterError("tensor_sigma_norm: restarts must be >= 0");

    // B = L^{-T}: columns carry whitened unit vectors to the Sigma-unit ball.
    const Eigen::MatrixXd B = sigma_chol.transpose().triangularView<Eigen::Upper>().solve(
        Eigen::MatrixXd::Identity(d, d));
    const Tensor3 W = T.transform(B);

    TensorNormResult out;
    out.argmax = Eigen::VectorXd::Unit(d, 0);
    const double fro = W.frobenius();
    if (fro == 0.0) {
        out.converged_fraction = 1.0;
        return out;
    }
    const double shift = 2.0 * fro;
    std::vector<Eigen::VectorXd> starts;
    for (int i = 0; i < d; ++i) {
        starts.push_back(Eigen::VectorXd::Unit(d, i));
        starts.push_back(-Eigen::VectorXd::Unit(d, i));
    }
    for (int r = 0; r < restarts; ++r) {
        std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(r)));
        starts.push_back(random_unit(d, rng));
    }
    int converged = 0;
    double best = -1.0;
    for (const auto& s : starts) {
        auto [u, ok] = ss_hopm(W, s, shift);
        converged += ok;
        // T~ is odd, so |T~(u,u,u)| = T~(s u, s u, s u) with s = sign.
        const double v = W.apply(u, u, u);
        if (std::abs(v) > best) {
            best = std::abs(v);
            out.argmax = v < 0.0 ? Eigen::VectorXd(-u) : u;
        }
    }
    out.value = best;
    out.restarts = static_cast<int>(starts.size());
    out.converged_fraction = static_cast<double>(converged) / starts.size();
    return out;
}

double default_sample_radius(int d, double eps) { return 12.0 * std::sqrt(d * eps); }

std::vector<Eigen::VectorXd> sample_points(const MapResult& map, double radius, int n,
                                           std::uint64_t seed) {
    if (n < 0) throw ParameterError("sample_points: n must be >= 0");
    if (!(radius > 0.0)) throw ParameterError("sample_points: radius must be positive");
    const int d = map.dim();
    const auto LT = map.sigma_chol.transpose().triangularView<Eigen::Upper>();
    std::vector<Eigen::VectorXd> pts{map.x_hat};
    for (int i = 0; i < n; ++i) {
        std::mt19937_64 rng(stream_seed(seed, static_cast<std::uint64_t>(i)));
        const Eigen::VectorXd v = random_unit(d, rng);
        const double rho = radius * van_der_corput(static_cast<std::uint64_t>(i) + 1);
        pts.push_back(map.x_hat + LT.solve(rho * v));
    }
    return pts;
}

ConstantEstimate estimate_K(const InverseProblem& p, const MapResult& map,
                            const SampleOptions& opt) {
    if (!map.converged) throw ParameterError("estimate_K: MAP estimate did not converge");
    ConstantEstimate out;
    if (opt.allow_analytic && p.is_linear_gaussian()) {
        out.provenance = Provenance::Analytic;
        out.details = "linear forward map with Gaussian noise and prior: D^3 vanishes";
        return out;
    }
    const double radius = opt.radius > 0.0 ? opt.radius : default_sample_radius(p.dim(), p.eps());
    const auto pts = sample_points(map, radius, opt.n_points, opt.seed);
    std::vector<double> vals(pts.size(), 0.0);
    const bool prior_third = !p.prior().third_vanishes();
    parallel_for(pts.size(), [&](std::size_t i) {
        const std::uint64_t s = stream_seed(opt.seed ^ 0x5851F42D4C957F2DULL, i);
        double v = 0.0;
        try {
            const PotentialEval phi = likelihood(p, pts[i], 3);
            v = tensor_sigma_norm(phi.third, map.sigma_chol, opt.tensor_restarts, s).value;
            if (prior_third) {
                const PotentialEval r = prior_potential(p, pts[i], 3);
                v = std::max(v, tensor_sigma_norm(r.third, map.sigma_chol, opt.tensor_restarts, s).value);
            }
        } catch (const EvaluationError&) {
            v = 0.0;
        }
        vals[i] = v;
    });
    for (double v : vals) out.raw = std::max(out.raw, v);
    out.value = opt.safety * out.raw;
    out.points = static_cast<int>(pts.size());
    std::ostringstream os;
    os << "sampled sup over " << out.points << " points in Sigma-ball of radius " << radius
       << ", safety factor " << opt.safety << "; not certified";
    out.details = os.str();
    return out;
}

RayProbe probe_tail_growth(const InverseProblem& p, const MapResult& map, int n_directions,
                           std::uint64_t seed) {
    const int d = p.dim();
    const auto LT = map.sigma_chol.transpose().triangularView<Eigen::Upper>();
    std::vector<Eigen::VectorXd> dirs;
    for (int i = 0; i < d; ++i) {
        dirs.push_back(Eigen::VectorXd::Unit(d, i));
        dirs.push_back(-Eigen::VectorXd::Unit(d, i));
    }
    for (int r = 0; r < n_directions; ++r) {
        std::mt19937_64 rng(stream_seed(seed ^ 0xD1B54A32D192ED03ULL, static_cast<std::uint64_t>(r)));
        dirs.push_back(random_unit(d, rng));
    }
    RayProbe out;
    out.worst_direction = dirs.front();
    const double base = std::sqrt(p.eps() * d) + 1.0;
    for (const auto& v : dirs) {
        // Exponent from I at t and 16 t, pushed out until I is far above rounding.
        double exponent = 2.0;
        bool have = false;
        for (double t = 1e3 * base; t < 1e12 * base; t *= 16.0) {
            try {
                const double i1 = potential_value(p, map.x_hat + LT.solve(t * v)) - map.i_min;
                const double i2 =
                    potential_value(p, map.x_hat + LT.solve(16.0 * t * v)) - map.i_min;
                if (!(i1 > 0.0) || !(i2 > 0.0)) continue;
                exponent = std::log(i2 / i1) / std::log(16.0);
                have = true;
            } catch (const EvaluationError&) {
                break;
            }
        }
        if (have && exponent < out.min_exponent) {
            out.min_exponent = exponent;
            out.worst_direction = v;
        }
    }
    out.violated = out.min_exponent < 1.75;
    return out;
}

ConstantEstimate estimate_delta(const InverseProblem& p, const MapResult& map,
                                const SampleOptions& opt) {
    if (!map.converged) throw ParameterError("estimate_delta: MAP estimate did not converge");
    ConstantEstimate out;
    if (opt.allow_analytic && p.is_linear_gaussian()) {
        out.value = out.raw = 1.0;
        out.provenance = Provenance::Analytic;
        out.details = "quadratic potential: I = |x - x_hat|_Sigma^2 / 2";
        return out;
    }
    const double radius = opt.radius > 0.0 ? opt.radius : default_sample_radius(p.dim(), p.eps());
    const auto pts = sample_points(map, radius, opt.n_points, opt.seed);
    std::vector<double> ratios(pts.size(), std::numeric_limits<double>::infinity());
    parallel_for(pts.size(), [&](std::size_t i) {
        const Eigen::VectorXd h = pts[i] - map.x_hat;
        const double n = sigma_norm(map, h);
        if (n < 1e-3) return;
        try {
            ratios[i] = 2.0 * (potential_value(p, pts[i]) - map.i_min) / (n * n);
        } catch (const EvaluationError&) {
        }
    });
    out.raw = std::numeric_limits<double>::infinity();
    for (double r : ratios) out.raw = std::min(out.raw, r);
    out.points = static_cast<int>(pts.size());
    std::ostringstream os;
    os << "sampled inf of 2I/|h|^2 over " << out.points << " points in Sigma-ball of radius "
       << radius << ", margin " << opt.margin << "; not certified";
    if (opt.ray_probe) {
        const RayProbe rp = probe_tail_growth(p, map, 8, opt.seed);
        os << "; ray growth exponent " << rp.min_exponent;
        if (rp.violated)
            throw AssumptionViolation(
                "quadratic lower bound fails: potential grows like |x|^" +
                std::to_string(rp.min_exponent) + " along a ray");
    }
    if (!(out.raw > 0.0))
        throw AssumptionViolation("quadratic lower bound fails: inf 2I/|h|^2 = " +
                                  std::to_string(out.raw));
    out.value = std::min(1.0, (1.0 - opt.margin) * out.raw);
    if (!(out.value > 0.0)) throw AssumptionViolation("estimated delta is not positive");
    out.details = os.str();
    return out;
}

std::optional<AssumptionConstants> analytic_constants(const InverseProblem& p,
                                                      const MapResult& map) {
    if (p.is_linear_gaussian()) {
        AssumptionConstants c;
        c.K = 0.0;
        c.delta = 1.0;
        c.provenance = Provenance::Analytic;
        c.details = "linear-Gaussian: K = 0, delta = 1";
        return c;
    }
    if (is_perturbed_linear(p)) return perturbation_constants(perturbation_spec(p, map), map);
    return std::nullopt;
}

AssumptionConstants estimated_constants(const InverseProblem& p, const MapResult& map,
                                        const SampleOptions& opt) {
    const ConstantEstimate k = estimate_K(p, map, opt);
    const ConstantEstimate dl = estimate_delta(p, map, opt);
    AssumptionConstants c;
    c.K = k.value;
    c.delta = dl.value;
    c.provenance = (k.provenance == Provenance::Analytic && dl.provenance == Provenance::Analytic)
                       ? Provenance::Analytic
                       : Provenance::Estimated;
    c.details = "K: " + k.details + "; delta: " + dl.details;
    return c;
}

}  // namespace lc
