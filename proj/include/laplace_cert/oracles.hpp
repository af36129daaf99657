#pragma once

#include <cstdint>
#include <functional>

#include "laplace_cert/laplace.hpp"
#include "laplace_cert/model.hpp"

namespace lc {

enum class OracleMethod { Quadrature, Importance };

const char* to_string(OracleMethod m);

struct TvEstimate {
    double value = 0.0;
    double err = 0.0;
    OracleMethod method = OracleMethod::Quadrature;
    double z = 0.0;        // posterior normalisation int exp(-I/eps) dx
    double z_tilde = 0.0;  // Laplace normalisation
    double ess = 0.0;      // importance only
    bool unreliable = false;
};

struct QuadratureSpec {
    double radius = 12.0;  // half-width of the box in whitened coordinates
    double tol = 1e-10;
    int max_doublings = 3;
    int max_intervals = 2000;  // per one-dimensional integral
};

/// All quadrature outputs of one run. Integrals run over a box in the
/// whitened coordinates u = L^T (x - x_hat) / sqrt(eps), where the Laplace
/// approximation is standard normal and the posterior is w(u) phi(u) / zeta
/// with w = exp(-I/eps + |u|^2/2) and zeta = Z / Z~.
struct QuadratureDistances {
    double zeta = 1.0;
    double zeta_err = 0.0;
    double tv = 0.0;
    double tv_err = 0.0;
    double hellinger = 0.0;     // d_H
    double hellinger_sq_err = 0.0;
    double fundamental = 0.0;   // int |w - 1| phi du
    double fundamental_err = 0.0;
    double radius = 0.0;        // final box half-width
    double z = 0.0;
    double z_tilde = 0.0;
    long evaluations = 0;
};

/// Posterior-to-Laplace distances by nested adaptive Gauss-Kronrod. The box
/// is doubled while the integrand on its boundary is above the tolerance.
/// Practical for d <= 2; d = 3 works but is slow.
QuadratureDistances quadrature_distances(const InverseProblem& p, const MapResult& map,
                                         const QuadratureSpec& spec = {});

/// Z = int exp(-I(x)/eps) dx.
double normalization(const InverseProblem& p, const MapResult& map, const QuadratureSpec& spec = {});

TvEstimate tv_quadrature(const InverseProblem& p, const MapResult& map,
                         const QuadratureSpec& spec = {});

/// Hellinger distance d_H = (1/2 int (sqrt p - sqrt q)^2)^{1/2}.
double hellinger(const InverseProblem& p, const MapResult& map, const QuadratureSpec& spec = {});

struct ImportanceEstimate {
    TvEstimate tv;
    double fundamental = 0.0;      // mean |w - 1|, before normalisation
    double fundamental_err = 0.0;
    double zeta = 0.0;             // mean w = Z / Z~
    double zeta_err = 0.0;
    long n = 0;
};

/// Self-normalised importance sampling with the Laplace approximation as
/// proposal, 16 batches with independent seeds. unreliable is set when
/// ESS < 0.01 n.
ImportanceEstimate importance_distances(const InverseProblem& p, const MapResult& map, long n,
                                        std::uint64_t seed);

TvEstimate tv_importance(const InverseProblem& p, const MapResult& map, long n, std::uint64_t seed);

struct PairDistances {
    double tv = 0.0;
    double hellinger = 0.0;
    double err = 0.0;
};

/// TV and Hellinger between two normalised 1-D densities given as log
/// densities, integrated over [a, b].
PairDistances density_pair_1d(const std::function<double(double)>& log_p,
                              const std::function<double(double)>& log_q, double a, double b,
                              double tol = 1e-12);

/// d_H^2 <= d_TV <= sqrt(2) d_H, each side allowed slack tol.
bool kraft_holds(double tv, double hellinger, double tol);

}  // namespace lc
