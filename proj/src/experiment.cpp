#include "laplace_cert/experiment.hpp"

#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

#include "laplace_cert/constants.hpp"
#include "laplace_cert/parallel.hpp"

namespace lc {

const char* to_string(RowStatus s) {
    switch (s) {
        case RowStatus::Ok: return "ok";
        case RowStatus::AssumptionViolation: return "assumption_violation";
        case RowStatus::NumericalFailure: return "numerical_failure";
    }
    return "?";
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

InverseProblem build_problem(const ExperimentConfig& c, std::optional<double> value) {
    CatalogParams params = c.params;
    if (value && c.sweep) {
        switch (c.sweep->axis) {
            case SweepAxis::Eps: params["eps"] = format_double(*value); break;
            case SweepAxis::Tau: params["tau"] = format_double(*value); break;
            case SweepAxis::Dim: params["d"] = format_double(*value); break;
        }
    }
    return catalog(c.problem, params);
}

Eigen::VectorXd default_start(const InverseProblem& p) {
    if (auto g = p.prior().gaussian()) return g->mean;
    return Eigen::VectorXd::Zero(p.dim());
}

namespace {

OracleChoice resolve_oracle(OracleChoice o, int d) {
    if (o != OracleChoice::Auto) return o;
    if (d <= 2) return OracleChoice::Quadrature;
    if (d <= 20) return OracleChoice::Importance;
    return OracleChoice::None;
}

SweepRow evaluate_point(const ExperimentConfig& c, std::optional<double> value,
                        const RunOptions& opt) {
    const auto t0 = std::chrono::steady_clock::now();
    SweepRow row;
    row.axis = c.sweep ? to_string(c.sweep->axis) : "none";
    row.problem = c.problem;
    const std::uint64_t seed = opt.seed.value_or(c.seed);
    try {
        const InverseProblem p = build_problem(c, value);
        row.d = p.dim();
        row.eps = p.eps();
        row.axis_value = value.value_or(p.eps());
        if (const auto* G = dynamic_cast<const PerturbedLinearMap*>(&p.forward())) row.tau = G->tau();

        MapOptions mo;
        mo.multistart = c.multistart;
        mo.seed = seed;
        const MapResult map = map_estimate(p, default_start(p), mo);
        row.x_hat_norm = map.x_hat.norm();
        row.i_min = map.i_min;

        SampleOptions so;
        so.n_points = c.constant_samples;
        so.radius = c.constant_radius;
        so.seed = seed;
        AssumptionConstants k;
        switch (c.constants) {
            case ConstantsMode::User:
                k.K = c.user_K;
                k.delta = c.user_delta;
                k.provenance = Provenance::User;
                k.details = "user supplied";
                break;
            case ConstantsMode::Analytic: {
                auto a = analytic_constants(p, map);
                if (!a) throw ParameterError("no closed-form constants for problem '" + c.problem + "'");
                k = *a;
                break;
            }
            case ConstantsMode::Estimate: k = estimated_constants(p, map, so); break;
            case ConstantsMode::Auto: {
                auto a = analytic_constants(p, map);
                k = a ? *a : estimated_constants(p, map, so);
                break;
            }
        }
        row.constants = k;
        if (c.split_bound) row.split_bound = best_bound(k, p.eps(), p.dim());
        if (c.closed_form) row.closed_form = explicit_bound(k, p.eps(), p.dim());
        if (c.perturbation && is_perturbed_linear(p)) row.perturbation = perturbation_bound(perturbation_spec(p, map), map);

        const OracleChoice oc = resolve_oracle(opt.oracle.value_or(c.oracle), p.dim());
        if (oc == OracleChoice::Quadrature) {
            QuadratureSpec qs;
            qs.tol = c.oracle_tol;
            const QuadratureDistances q = quadrature_distances(p, map, qs);
            TvEstimate t;
            t.value = std::min(1.0, std::max(0.0, q.tv));
            t.err = q.tv_err;
            t.method = OracleMethod::Quadrature;
            t.z = q.z;
            t.z_tilde = q.z_tilde;
            row.oracle = t;
            row.hellinger = q.hellinger;
        } else if (oc == OracleChoice::Importance) {
            row.oracle = tv_importance(p, map, c.oracle_samples, seed);
        }
    } catch (const AssumptionViolation& e) {
        row.status = RowStatus::AssumptionViolation;
        row.message = e.what();
    } catch (const NumericalError& e) {
        row.status = RowStatus::NumericalFailure;
        row.message = e.what();
    }
    row.wall_time =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return row;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

template <typename T, typename F>
std::string opt_num(const std::optional<T>& o, F&& f) {
    return o ? format_double(f(*o)) : std::string();
}

}  // namespace

std::vector<SweepRow> run_experiment(const ExperimentConfig& c, const RunOptions& opt) {
    std::vector<std::optional<double>> grid;
    if (c.sweep)
        for (double v : c.sweep->values) grid.push_back(v);
    else
        grid.push_back(std::nullopt);
    std::vector<SweepRow> rows(grid.size());
    parallel_for(grid.size(), [&](std::size_t i) { rows[i] = evaluate_point(c, grid[i], opt); });
    return rows;
}

std::string csv_header() {
    return "schema_version,axis,axis_value,problem,d,eps,tau,x_hat_norm,i_min,K,delta,"
           "provenance,r0,e1,e2,total_raw,total_clipped,thm41_value,thm41_condition_ok,"
           "sec5_bound,sec5_valid,sec5_delta_tau,sec5_k_tau,oracle_method,oracle_tv,oracle_err,"
           "oracle_ess,hellinger,status,message,wall_time_s";
}

void write_results_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    os << csv_header() << "\r\n";
    for (const auto& r : rows) {
        std::vector<std::string> f;
        f.push_back(std::to_string(kSchemaVersion));
        f.push_back(r.axis);
        f.push_back(format_double(r.axis_value));
        f.push_back(csv_field(r.problem));
        f.push_back(std::to_string(r.d));
        f.push_back(format_double(r.eps));
        f.push_back(opt_num(r.tau, [](double t) { return t; }));
        f.push_back(format_double(r.x_hat_norm));
        f.push_back(format_double(r.i_min));
        f.push_back(opt_num(r.constants, [](const auto& k) { return k.K; }));
        f.push_back(opt_num(r.constants, [](const auto& k) { return k.delta; }));
        f.push_back(r.constants ? to_string(r.constants->provenance) : "");
        f.push_back(opt_num(r.split_bound, [](const auto& b) { return b.r0; }));
        f.push_back(opt_num(r.split_bound, [](const auto& b) { return b.e1; }));
        f.push_back(opt_num(r.split_bound, [](const auto& b) { return b.e2; }));
        f.push_back(opt_num(r.split_bound, [](const auto& b) { return b.total; }));
        f.push_back(opt_num(r.split_bound, [](const auto& b) { return b.total_clipped; }));
        f.push_back(opt_num(r.closed_form, [](const auto& b) { return b.value; }));
        f.push_back(r.closed_form ? (r.closed_form->condition_ok ? "true" : "false") : "");
        f.push_back(opt_num(r.perturbation, [](const auto& b) { return b.bound; }));
        f.push_back(r.perturbation ? (r.perturbation->valid ? "true" : "false") : "");
        f.push_back(opt_num(r.perturbation, [](const auto& b) { return b.delta_tau; }));
        f.push_back(opt_num(r.perturbation, [](const auto& b) { return b.k_tau; }));
        f.push_back(r.oracle ? to_string(r.oracle->method) : "");
        f.push_back(opt_num(r.oracle, [](const auto& t) { return t.value; }));
        f.push_back(opt_num(r.oracle, [](const auto& t) { return t.err; }));
        f.push_back(r.oracle && r.oracle->method == OracleMethod::Importance
                        ? format_double(r.oracle->ess)
                        : "");
        f.push_back(opt_num(r.hellinger, [](double h) { return h; }));
        f.push_back(to_string(r.status));
        f.push_back(csv_field(r.message));
        f.push_back(format_double(r.wall_time));
        for (std::size_t i = 0; i < f.size(); ++i) os << (i ? "," : "") << f[i];
        os << "\r\n";
    }
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ParameterError("loglog_slope: size mismatch");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int n = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0) || !std::isfinite(x[i]) || !std::isfinite(y[i])) continue;
        const double lx = std::log(x[i]), ly = std::log(y[i]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
        ++n;
    }
    if (n < 2) return std::numeric_limits<double>::quiet_NaN();
    const double den = n * sxx - sx * sx;
    if (den == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (n * sxy - sx * sy) / den;
}

std::vector<std::size_t> asymptotic_half(SweepAxis axis, std::size_t n) {
    const std::size_t m = std::max<std::size_t>(2, (n + 1) / 2);
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < std::min(m, n); ++i)
        idx.push_back(axis == SweepAxis::Dim ? n - std::min(m, n) + i : i);
    return idx;
}

void write_rates(std::ostream& os, const ExperimentConfig& c, const std::vector<SweepRow>& rows) {
    os << "# log-log least-squares slopes against the sweep axis\n";
    if (!c.sweep) {
        os << "# no sweep configured\n";
        return;
    }
    const SweepAxis axis = c.sweep->axis;
    const auto idx = asymptotic_half(axis, rows.size());
    os << "# axis = " << to_string(axis) << "\n";
    os << "# fitted on the asymptotic half of the grid ("
       << (axis == SweepAxis::Dim ? "largest" : "smallest") << " " << idx.size()
       << " of " << rows.size() << " points); the rates are limits\n";
    auto slope = [&](auto&& get) {
        std::vector<double> x, y;
        for (std::size_t i : idx) {
            const auto v = get(rows[i]);
            if (!v || rows[i].status != RowStatus::Ok) continue;
            x.push_back(rows[i].axis_value);
            y.push_back(*v);
        }
        return loglog_slope(x, y);
    };
    auto line = [&](const char* name, double s) { os << name << " = " << format_double(s) << "\n"; };
    line("slope_total_raw", slope([](const SweepRow& r) -> std::optional<double> {
        return r.split_bound ? std::optional<double>(r.split_bound->total) : std::nullopt;
    }));
    line("slope_thm41_value", slope([](const SweepRow& r) -> std::optional<double> {
        return r.closed_form ? std::optional<double>(r.closed_form->value) : std::nullopt;
    }));
    line("slope_sec5_bound", slope([](const SweepRow& r) -> std::optional<double> {
        return r.perturbation ? std::optional<double>(r.perturbation->bound) : std::nullopt;
    }));
    line("slope_oracle_tv", slope([](const SweepRow& r) -> std::optional<double> {
        return r.oracle ? std::optional<double>(r.oracle->value) : std::nullopt;
    }));
}

std::vector<DensityRow> density_table(const InverseProblem& p, const MapResult& map, int n_grid) {
    if (p.dim() != 1) throw ParameterError("densities: only one-dimensional problems are supported");
    if (n_grid < 3) throw ParameterError("densities: n_grid must be >= 3");
    const double eps = p.eps();
    const double sigma = std::sqrt(eps * map.sigma(0, 0));
    const double z = normalization(p, map);
    const double log_z = std::log(z);
    std::vector<DensityRow> rows;
    rows.reserve(n_grid);
    for (int i = 0; i < n_grid; ++i) {
        const double x = map.x_hat(0) - 8.0 * sigma + 16.0 * sigma * i / (n_grid - 1);
        Eigen::VectorXd xv(1);
        xv(0) = x;
        const double I = potential_value(p, xv) - map.i_min;
        const double h = x - map.x_hat(0);
        const double quad = 0.5 * map.hess(0, 0) * h * h;
        const double post = std::exp(-I / eps - log_z);
        const double lap = std::exp(-quad / eps - map.log_z_tilde);
        const double w = std::exp(-(I - quad) / eps);
        rows.push_back({x, post, lap, 0.5 * std::abs(post - lap), std::abs(w - 1.0) * lap});
    }
    return rows;
}

void write_densities_csv(std::ostream& os, const std::vector<DensityRow>& rows) {
    os << "schema_version,x,posterior,laplace,tv_integrand,fundamental_integrand\r\n";
    for (const auto& r : rows)
        os << kSchemaVersion << ',' << format_double(r.x) << ',' << format_double(r.posterior) << ','
           << format_double(r.laplace) << ',' << format_double(r.tv_integrand) << ','
           << format_double(r.fundamental_integrand) << "\r\n";
}

std::vector<CheckResult> verify_assumptions(const ExperimentConfig& c, const RunOptions& opt) {
    std::vector<CheckResult> out;
    const std::uint64_t seed = opt.seed.value_or(c.seed);
    const InverseProblem p = build_problem(c, std::nullopt);
    MapOptions mo;
    mo.multistart = c.multistart;
    mo.seed = seed;

    MapResult map;
    try {
        map = map_estimate(p, default_start(p), mo);
    } catch (const IndefiniteHessianError& e) {
        out.push_back({"unique_spd_minimizer", "fail", "estimated", e.what()});
        return out;
    } catch (const NonConvergenceError& e) {
        out.push_back({"unique_spd_minimizer", "fail", "estimated", e.what()});
        return out;
    }
    {
        std::ostringstream os;
        os << "starts=" << map.starts << " distinct_minima=" << map.distinct_minima
           << " min_eigenvalue=" << format_double(map.min_eigenvalue)
           << " grad_norm=" << format_double(map.grad_norm);
        const bool unique = map.uniqueness == Uniqueness::Unverified;
        if (p.is_linear_gaussian())  // strictly convex quadratic potential
            out.push_back({"unique_spd_minimizer", "pass", "analytic", os.str()});
        else
            out.push_back({"unique_spd_minimizer", unique ? "unverified" : "fail",
                           unique ? "uniqueness unverified" : "estimated", os.str()});
        out.push_back({"spd_hessian", map.min_eigenvalue > 0.0 ? "pass" : "fail", "analytic",
                       "min_eigenvalue=" + format_double(map.min_eigenvalue)});
    }

    SampleOptions so;
    so.n_points = c.constant_samples;
    so.radius = c.constant_radius;
    so.seed = seed;
    std::optional<AssumptionConstants> k;
    if (c.constants == ConstantsMode::User) {
        k = AssumptionConstants{c.user_K, c.user_delta, Provenance::User, "user supplied"};
        out.push_back({"third_derivative_bound", "unverified", "user", "K=" + format_double(c.user_K)});
        out.push_back({"quadratic_lower_bound", "unverified", "user",
                       "delta=" + format_double(c.user_delta)});
    } else if (is_perturbed_linear(p) && c.constants != ConstantsMode::Estimate) {
        const PerturbationSpec s = perturbation_spec(p, map);
        const PerturbationBound b = perturbation_bound(s, map);
        out.push_back({"third_derivative_bound", "pass", "analytic", "K=" + format_double(b.k_tau)});
        std::string detail = "delta_tau=" + format_double(b.delta_tau) +
                             " gamma1=" + format_double(b.gamma1) + " gamma2=" + format_double(b.gamma2);
        if (b.delta_positive) {
            k = AssumptionConstants{b.k_tau, std::min(1.0, b.delta_tau), Provenance::Analytic, ""};
        } else {
            const double tau = s.tau;
            auto make = [&](double t) {
                CatalogParams params = c.params;
                params["tau"] = format_double(t);
                return catalog(c.problem, params);
            };
            const TauEdge edge = tau_validity_edge(make, tau, mo);
            detail += " tau=" + format_double(tau) + " tau_edge=" + format_double(edge.tau);
        }
        out.push_back({"quadratic_lower_bound", b.delta_positive ? "pass" : "fail", "analytic", detail});
    } else {
        auto a = c.constants != ConstantsMode::Estimate ? analytic_constants(p, map) : std::nullopt;
        if (a) {
            k = a;
            out.push_back({"third_derivative_bound", "pass", "analytic", "K=" + format_double(a->K)});
            out.push_back({"quadratic_lower_bound", "pass", "analytic", "delta=" + format_double(a->delta)});
        } else {
            const ConstantEstimate ke = estimate_K(p, map, so);
            out.push_back({"third_derivative_bound", "unverified", to_string(ke.provenance),
                           "K=" + format_double(ke.value) + " (" + ke.details + ")"});
            try {
                const ConstantEstimate de = estimate_delta(p, map, so);
                out.push_back({"quadratic_lower_bound", "unverified", to_string(de.provenance),
                               "delta=" + format_double(de.value) + " (" + de.details + ")"});
                k = AssumptionConstants{ke.value, de.value, Provenance::Estimated, ""};
            } catch (const AssumptionViolation& e) {
                out.push_back({"quadratic_lower_bound", "fail", "estimated", e.what()});
            }
        }
    }
    if (k) {
        const ExplicitBound eb = explicit_bound(*k, p.eps(), p.dim());
        out.push_back({"explicit_bound_condition", eb.condition_ok ? "pass" : "fail",
                       to_string(k->provenance),
                       "lhs=" + format_double(eb.lhs) + " rhs=" + format_double(eb.rhs)});
    }
    return out;
}

void write_checks(std::ostream& os, const std::vector<CheckResult>& checks) {
    for (const auto& c : checks)
        os << "check=" << c.name << " status=" << c.status << " provenance=\"" << c.provenance
           << "\" detail=\"" << c.detail << "\"\n";
}

}  // namespace lc
