#pragma once

namespace lc::special {

/// ln Gamma(x) for x > 0.
double log_gamma(double x);

/// Regularized lower incomplete gamma P(a, z) = gamma(a, z) / Gamma(a).
double gamma_p(double a, double z);
/// Regularized upper incomplete gamma Q(a, z) = Gamma(a, z) / Gamma(a).
double upper_gamma_reg(double a, double z);
/// ln Q(a, z), finite far into the tail where Q itself underflows.
double log_upper_gamma_reg(double a, double z);

/// Xi_d(t) = P(d/2, t/2): standard Gaussian mass of the Euclidean ball of
/// radius sqrt(t) in R^d.
double xi_d(double d, double t);

/// c_d = 2^{1 - d/2} / Gamma(d/2).
double c_d(double d);
double log_c_d(double d);

/// Gamma(a) / Gamma(b) via a log-gamma difference.
struct GammaRatio {
    double a = 0.0;
    double b = 0.0;
    double value = 0.0;
    double log_value = 0.0;
};
GammaRatio gamma_ratio(double a, double b);

}  // namespace lc::special
