#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "laplace_cert/bounds.hpp"
#include "laplace_cert/config.hpp"
#include "laplace_cert/laplace.hpp"
#include "laplace_cert/model.hpp"
#include "laplace_cert/oracles.hpp"
#include "laplace_cert/perturbed.hpp"

namespace lc {

inline constexpr int kSchemaVersion = 1;

enum class RowStatus { Ok, AssumptionViolation, NumericalFailure };

const char* to_string(RowStatus s);

/// One grid point of a run.
struct SweepRow {
    std::string axis;       // eps, tau, dim or "none"
    double axis_value = 0.0;
    std::string problem;
    int d = 0;
    double eps = 0.0;
    std::optional<double> tau;
    double x_hat_norm = 0.0;
    double i_min = 0.0;
    std::optional<AssumptionConstants> constants;
    std::optional<BoundBreakdown> split_bound;
    std::optional<ExplicitBound> closed_form;
    std::optional<PerturbationBound> perturbation;
    std::optional<TvEstimate> oracle;
    std::optional<double> hellinger;
    RowStatus status = RowStatus::Ok;
    std::string message;
    double wall_time = 0.0;
};

struct RunOptions {
    bool allow_invalid = false;
    std::optional<OracleChoice> oracle;    // overrides the config
    std::optional<std::uint64_t> seed;     // overrides the config
};

/// Problem for one sweep value (or the base problem when value is empty).
InverseProblem build_problem(const ExperimentConfig& c, std::optional<double> value);

/// Default starting point: prior mean when Gaussian, else zero.
Eigen::VectorXd default_start(const InverseProblem& p);

/// Evaluates the pipeline for every grid point, in grid order.
std::vector<SweepRow> run_experiment(const ExperimentConfig& c, const RunOptions& opt = {});

/// Writes the fixed-header CSV (schema_version first).
void write_results_csv(std::ostream& os, const std::vector<SweepRow>& rows);
std::string csv_header();

/// Least-squares slope of log y against log x (non-positive entries skipped).
/// Returns NaN with fewer than two usable points.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Indices of the asymptotic half of a sweep: small values for eps/tau,
/// large values for dim.
std::vector<std::size_t> asymptotic_half(SweepAxis axis, std::size_t n);

void write_rates(std::ostream& os, const ExperimentConfig& c, const std::vector<SweepRow>& rows);

/// Shortest round-trip decimal representation.
std::string format_double(double v);

struct DensityRow {
    double x, posterior, laplace, tv_integrand, fundamental_integrand;
};

/// Posterior, Laplace density and the two integrands on x_hat +- 8 sigma
/// (one-dimensional problems only).
std::vector<DensityRow> density_table(const InverseProblem& p, const MapResult& map, int n_grid);
void write_densities_csv(std::ostream& os, const std::vector<DensityRow>& rows);

struct CheckResult {
    std::string name;
    std::string status;  // pass, fail, unverified
    std::string provenance;
    std::string detail;
};

/// Multistart MAP, Hessian check, K and delta, explicit-bound condition.
std::vector<CheckResult> verify_assumptions(const ExperimentConfig& c, const RunOptions& opt = {});
void write_checks(std::ostream& os, const std::vector<CheckResult>& checks);

}  // namespace lc
