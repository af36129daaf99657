#include "laplace_cert/special.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include "laplace_cert/errors.hpp"

namespace lc::special {

namespace {

constexpr double kTol = 1e-15;
constexpr int kMaxIter = 100000;

void check_args(double a, double z) {
    if (!(a > 0.0) || !std::isfinite(a)) throw ParameterError("incomplete gamma: need a > 0");
    if (!(z >= 0.0)) throw ParameterError("incomplete gamma: need z >= 0");
}

// ln of z^a e^{-z} / Gamma(a)
double log_prefactor(double a, double z) { return a * std::log(z) - z - log_gamma(a); }

// P(a, z) by the power series, valid for z < a + 1.
double series_p(double a, double z) {
    double ap = a, term = 1.0 / a, sum = term;
    for (int n = 0; n < kMaxIter; ++n) {
        ap += 1.0;
        term *= z / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * kTol) return sum * std::exp(log_prefactor(a, z));
    }
    throw NumericalError("incomplete gamma series did not converge");
}

// ln Q(a, z) by the modified Lentz continued fraction, valid for z >= a + 1.
double log_cf_q(double a, double z) {
    constexpr double tiny = 1e-300;
    double b = z + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < kMaxIter; ++i) {
        const double an = -i * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < kTol) return log_prefactor(a, z) + std::log(h);
    }
    throw NumericalError("incomplete gamma continued fraction did not converge");
}

}  // namespace

double log_gamma(double x) {
    if (!(x > 0.0)) throw ParameterError("log_gamma: need x > 0");
    return std::lgamma(x);
}

double gamma_p(double a, double z) {
    check_args(a, z);
    if (z == 0.0) return 0.0;
    if (std::isinf(z)) return 1.0;
    if (z < a + 1.0) return std::min(1.0, series_p(a, z));
    return -std::expm1(log_cf_q(a, z));
}

double upper_gamma_reg(double a, double z) {
    check_args(a, z);
    if (z == 0.0) return 1.0;
    if (std::isinf(z)) return 0.0;
    if (z < a + 1.0) return std::max(0.0, 1.0 - series_p(a, z));
    return std::exp(log_cf_q(a, z));
}

double log_upper_gamma_reg(double a, double z) {
    check_args(a, z);
    if (z == 0.0) return 0.0;
    if (std::isinf(z)) return -std::numeric_limits<double>::infinity();
    if (z < a + 1.0) return std::log1p(-series_p(a, z));
    return log_cf_q(a, z);
}

double xi_d(double d, double t) {
    if (!(d > 0.0)) throw ParameterError("xi_d: need d > 0");
    if (!(t >= 0.0)) throw ParameterError("xi_d: need t >= 0");
    return gamma_p(0.5 * d, 0.5 * t);
}

double log_c_d(double d) {
    if (!(d > 0.0)) throw ParameterError("c_d: need d > 0");
    return (1.0 - 0.5 * d) * std::numbers::ln2 - log_gamma(0.5 * d);
}

double c_d(double d) { return std::exp(log_c_d(d)); }

GammaRatio gamma_ratio(double a, double b) {
    GammaRatio r;
    r.a = a;
    r.b = b;
    r.log_value = log_gamma(a) - log_gamma(b);
    r.value = std::exp(r.log_value);
    return r;
}

}  // namespace lc::special
