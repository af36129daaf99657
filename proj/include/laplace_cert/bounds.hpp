#pragma once

#include <string>
#include <vector>

#include "laplace_cert/errors.hpp"

namespace lc {

enum class Provenance { Analytic, Estimated, User };

const char* to_string(Provenance p);

/// K bounds the Sigma-norms of D^3 Phi and D^3 R; delta is the factor in
/// I(x) >= delta/2 |x - x_hat|_Sigma^2.
struct AssumptionConstants {
    double K = 0.0;
    double delta = 1.0;
    Provenance provenance = Provenance::User;
    std::string details;

    /// Throws ParameterError unless K >= 0 and 0 < delta <= 1.
    void validate() const;
};

/// Adaptive quadrature for E1 ran out of intervals.
class QuadratureError : public NumericalError {
public:
    QuadratureError(const std::string& what, double partial)
        : NumericalError(what), partial_(partial) {}
    double partial_value() const { return partial_; }

private:
    double partial_;
};

struct E1Value {
    double value = 0.0;
    double error = 0.0;
};

struct BoundBreakdown {
    double r0 = 0.0;
    double e1 = 0.0;
    double e2 = 0.0;
    double total = 0.0;          // e1 + e2, unclipped
    double total_clipped = 0.0;  // min(total, 1)
    bool clipped = false;
    double quadrature_error = 0.0;
    Provenance provenance = Provenance::User;
};

struct OptimalR0 {
    double r0 = 0.0;
    double residual = 0.0;   // |g(r0)| / exp((1-delta) r0^2 / 2 eps), 0 unless interior
    bool interior = false;   // r0 is a root of g
    bool sign_change = true; // false: no root in the bracket, endpoint argmin used
    double cap = 0.0;
    std::vector<double> roots;
};

struct ExplicitBound {
    double value = 0.0;
    bool condition_ok = false;
    double lhs = 0.0;
    double rhs = 0.0;
    double C = 0.0;
    double r0 = 0.0;  // (6 eps / ((1+eps) K))^{1/3}, diagnostic
    double gamma_ratio = 0.0;  // Gamma(d/2 + 3/2) / Gamma(d/2)
};

/// f(r) = (exp((1+eps) K r^3 / (6 eps)) - 1) exp(-r^2 / (2 eps)); +inf on
/// overflow.
double f_integrand(double r, double K, double eps);

/// E1(r0) = c_d eps^{-d/2} int_0^r0 f(r) r^{d-1} dr. Returns +inf when the
/// integrand overflows.
E1Value e1(double r0, double K, double eps, int d);

/// E2(r0) = delta^{-d/2} (1 - Xi_d(delta r0^2 / eps)).
double e2(double r0, double delta, double eps, int d);
double log_e2(double r0, double delta, double eps, int d);

BoundBreakdown total_bound(const AssumptionConstants& c, double eps, int d, double r0);

/// Largest useful split radius: 20 sqrt(d eps / delta).
double r0_cap(double delta, double eps, int d);

/// Root of g(r) = expm1((1+eps) K r^3 / 6 eps) - exp((1-delta) r^2 / 2 eps)
/// minimising E1 + E2 among {0, roots, cap}.
OptimalR0 optimal_r0(const AssumptionConstants& c, double eps, int d);

/// total_bound at optimal_r0.
BoundBreakdown best_bound(const AssumptionConstants& c, double eps, int d);

/// Closed-form bound 2 C (1+eps) sqrt(eps) K Gamma(d/2+3/2)/Gamma(d/2),
/// C = sqrt(2) e / 3, certified only when condition_ok.
ExplicitBound explicit_bound(const AssumptionConstants& c, double eps, int d);

}  // namespace lc
