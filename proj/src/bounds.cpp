#include "laplace_cert/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "laplace_cert/quadrature.hpp"
#include "laplace_cert/special.hpp"

namespace lc {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxLog = 700.0;

void check_common(double eps, int d) {
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ParameterError("eps must be positive and finite");
    if (d < 1) throw ParameterError("dimension must be at least 1");
}

// ln(expm1(a)) for a > 0.
double log_expm1(double a) { return a > 40.0 ? a + std::log1p(-std::exp(-a)) : std::log(std::expm1(a)); }

}  // namespace

const char* to_string(Provenance p) {
    switch (p) {
        case Provenance::Analytic: return "analytic";
        case Provenance::Estimated: return "estimated";
        case Provenance::User: return "user";
    }
    return "unknown";
}

void AssumptionConstants::validate() const {
    if (!(K >= 0.0) || !std::isfinite(K)) throw ParameterError("K must be finite and >= 0");
    if (!(delta > 0.0 && delta <= 1.0)) throw ParameterError("delta must lie in (0, 1]");
}

double f_integrand(double r, double K, double eps) {
    if (!(r >= 0.0)) throw ParameterError("f_integrand: r must be >= 0");
    if (!(K >= 0.0)) throw ParameterError("f_integrand: K must be >= 0");
    check_common(eps, 1);
    const double a = (1.0 + eps) * K / (6.0 * eps) * r * r * r;
    if (a == 0.0) return 0.0;
    const double q = r * r / (2.0 * eps);
    if (a < 1.0) return std::expm1(a) * std::exp(-q);
    const double lf = log_expm1(a) - q;
    return lf > kMaxLog ? kInf : std::exp(lf);
}

E1Value e1(double r0, double K, double eps, int d) {
    if (!(r0 >= 0.0)) throw ParameterError("e1: r0 must be >= 0");
    if (!(K >= 0.0)) throw ParameterError("e1: K must be >= 0");
    check_common(eps, d);
    if (r0 == 0.0 || K == 0.0) return {};
    if (std::isinf(r0)) return {kInf, 0.0};

    // Substitute r = sqrt(eps) s: E1 = c_d int_0^{s0} expm1(a s^3) e^{-s^2/2} s^{d-1} ds.
    const double a = (1.0 + eps) * K * std::sqrt(eps) / 6.0;
    const double s0 = r0 / std::sqrt(eps);
    const double lcd = special::log_c_d(d);
    auto log_integrand = [&](double s) {
        if (s <= 0.0) return -kInf;
        const double as3 = a * s * s * s;
        if (as3 == 0.0) return -kInf;
        return lcd + log_expm1(as3) - 0.5 * s * s + (d - 1) * std::log(s);
    };
    double peak = -kInf;
    for (int i = 1; i <= 512; ++i) peak = std::max(peak, log_integrand(s0 * i / 512.0));
    if (peak > kMaxLog) return {kInf, 0.0};

    // Scale by the peak so the tolerance is relative.
    auto g = [&](double s) {
        const double l = log_integrand(s);
        return std::isinf(l) ? 0.0 : std::exp(l - peak);
    };
    quad::Options opt;
    opt.abs_tol = 1e-300;
    opt.rel_tol = 1e-13;
    opt.max_intervals = 20000;
    const auto r = quad::integrate_scalar(g, 0.0, s0, opt, 16);
    const double scale = std::exp(peak);
    E1Value out{r.value[0] * scale, r.error * scale};
    if (!r.converged && r.error > 1e-9 * std::abs(r.value[0]))
        throw QuadratureError("e1: quadrature did not converge", out.value);
    return out;
}

double log_e2(double r0, double delta, double eps, int d) {
    if (!(r0 >= 0.0)) throw ParameterError("e2: r0 must be >= 0");
    if (!(delta > 0.0 && delta <= 1.0)) throw ParameterError("e2: delta must lie in (0, 1]");
    check_common(eps, d);
    if (std::isinf(r0)) return -kInf;
    return -0.5 * d * std::log(delta) +
           special::log_upper_gamma_reg(0.5 * d, delta * r0 * r0 / (2.0 * eps));
}

double e2(double r0, double delta, double eps, int d) {
    return std::max(0.0, std::exp(log_e2(r0, delta, eps, d)));
}

BoundBreakdown total_bound(const AssumptionConstants& c, double eps, int d, double r0) {
    c.validate();
    BoundBreakdown b;
    b.r0 = r0;
    b.provenance = c.provenance;
    const E1Value v = e1(r0, c.K, eps, d);
    b.e1 = v.value;
    b.quadrature_error = v.error;
    b.e2 = e2(r0, c.delta, eps, d);
    b.total = b.e1 + b.e2;
    b.clipped = b.total > 1.0;
    b.total_clipped = std::min(b.total, 1.0);
    return b;
}

double r0_cap(double delta, double eps, int d) { return 20.0 * std::sqrt(d * eps / delta); }

OptimalR0 optimal_r0(const AssumptionConstants& c, double eps, int d) {
    c.validate();
    check_common(eps, d);
    OptimalR0 out;
    out.cap = r0_cap(c.delta, eps, d);
    if (c.K == 0.0) {
        out.r0 = out.cap;
        return out;
    }
    const double alpha = (1.0 + eps) * c.K / (6.0 * eps);
    const double beta = (1.0 - c.delta) / (2.0 * eps);
    // h = ln expm1(alpha r^3) - beta r^2 has the sign of g and never overflows.
    auto h = [&](double r) { return log_expm1(alpha * r * r * r) - beta * r * r; };
    auto dh = [&](double r) {
        const double a = alpha * r * r * r;
        return 3.0 * alpha * r * r / -std::expm1(-a) - 2.0 * beta * r;
    };

    const double lo = std::sqrt(eps) * 1e-6, hi = out.cap;
    // Sign scan on a geometric grid, then bisection and a Newton polish.
    const int n = 4000;
    double prev_r = lo, prev_h = h(lo);
    for (int i = 1; i <= n; ++i) {
        const double r = lo * std::pow(hi / lo, static_cast<double>(i) / n);
        const double hr = h(r);
        if ((prev_h < 0.0) != (hr < 0.0)) {
            double a = prev_r, b = r, ha = prev_h;
            for (int k = 0; k < 200; ++k) {
                const double m = 0.5 * (a + b);
                if (!(m > a && m < b)) break;
                const double hm = h(m);
                if ((hm < 0.0) == (ha < 0.0)) {
                    a = m;
                    ha = hm;
                } else {
                    b = m;
                }
            }
            double root = 0.5 * (a + b);
            for (int k = 0; k < 3; ++k) {
                const double step = h(root) / dh(root);
                const double next = root - step;
                if (!(next >= a && next <= b) || !std::isfinite(next)) break;
                root = next;
            }
            out.roots.push_back(root);
        }
        prev_r = r;
        prev_h = hr;
    }
    out.sign_change = !out.roots.empty();

    std::vector<double> candidates{0.0};
    candidates.insert(candidates.end(), out.roots.begin(), out.roots.end());
    candidates.push_back(out.cap);
    double best = kInf;
    out.r0 = 0.0;
    for (double r : candidates) {
        const double t = total_bound(c, eps, d, r).total;
        if (t < best) {
            best = t;
            out.r0 = r;
        }
    }
    out.interior = std::find(out.roots.begin(), out.roots.end(), out.r0) != out.roots.end();
    if (out.interior) {
        out.residual = std::abs(std::expm1(h(out.r0)));
    }
    return out;
}

BoundBreakdown best_bound(const AssumptionConstants& c, double eps, int d) {
    return total_bound(c, eps, d, optimal_r0(c, eps, d).r0);
}

ExplicitBound explicit_bound(const AssumptionConstants& c, double eps, int d) {
    c.validate();
    check_common(eps, d);
    ExplicitBound out;
    out.C = std::numbers::sqrt2 * std::numbers::e / 3.0;
    const special::GammaRatio g = special::gamma_ratio(0.5 * d + 1.5, 0.5 * d);
    out.gamma_ratio = g.value;
    if (c.K == 0.0) {
        out.value = 0.0;
        out.condition_ok = true;
        out.lhs = kInf;
        out.rhs = 8.0 * std::pow(d, 1.5);
        out.r0 = kInf;
        return out;
    }
    const double s = (1.0 + eps) * std::sqrt(eps) * c.K;
    out.value = 2.0 * out.C * s * g.value;
    out.r0 = std::cbrt(6.0 * eps / ((1.0 + eps) * c.K));
    out.lhs = 6.0 * std::pow(c.delta, 1.5) / s;
    // ln(2 / (C s delta^{d/2}) * Gamma(d/2) / Gamma(d/2 + 3/2)) in log space.
    const double log_arg = std::log(2.0) - std::log(out.C * s) - 0.5 * d * std::log(c.delta) - g.log_value;
    const double tail = log_arg > 0.0 ? std::pow(8.0 * log_arg, 1.5) : 0.0;
    out.rhs = std::max(8.0 * std::pow(d, 1.5), tail);
    out.condition_ok = out.lhs >= out.rhs;
    return out;
}

}  // namespace lc
