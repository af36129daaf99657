#include "laplace_cert/catalog.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>

#include "laplace_cert/errors.hpp"

namespace lc {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep)) out.push_back(trim(item));
    return out;
}

class ParamReader {
public:
    ParamReader(std::string problem, const CatalogParams& params, std::set<std::string> allowed)
        : problem_(std::move(problem)), params_(params), allowed_(std::move(allowed)) {
        for (const auto& [k, v] : params_)
            if (!allowed_.count(k))
                throw ParameterError(problem_ + ": unknown parameter '" + k + "'");
    }

    bool has(const std::string& key) const { return params_.count(key) > 0; }

    double scalar(const std::string& key, double fallback) const {
        auto it = params_.find(key);
        return it == params_.end() ? fallback : parse_scalar(it->second, key);
    }
    Eigen::VectorXd vector(const std::string& key, int d, double fallback) const {
        auto it = params_.find(key);
        return it == params_.end() ? Eigen::VectorXd::Constant(d, fallback)
                                   : parse_vector(it->second, d, key);
    }
    Eigen::MatrixXd matrix(const std::string& key, int d, double fallback_diag) const {
        auto it = params_.find(key);
        return it == params_.end() ? Eigen::MatrixXd(fallback_diag * Eigen::MatrixXd::Identity(d, d))
                                   : parse_matrix(it->second, d, key);
    }
    std::string text(const std::string& key, const std::string& fallback) const {
        auto it = params_.find(key);
        return it == params_.end() ? fallback : it->second;
    }
    int dim(int fallback) const {
        const double d = scalar("d", fallback);
        if (d < 1 || d != std::floor(d) || d > 4096)
            throw ParameterError(problem_ + ": d must be a positive integer");
        return static_cast<int>(d);
    }

private:
    std::string problem_;
    const CatalogParams& params_;
    std::set<std::string> allowed_;
};

std::shared_ptr<const Prior> gaussian_prior(const ParamReader& r, int d) {
    return std::make_shared<GaussianPrior>(r.vector("m0", d, 0.0), r.matrix("sigma0", d, 1.0));
}

}  // namespace

double parse_scalar(const std::string& text, const std::string& key) {
    const std::string t = trim(text);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || t.empty() || !std::isfinite(v))
        throw ParameterError("parameter '" + key + "': expected a finite number, got '" + text + "'");
    return v;
}

Eigen::VectorXd parse_vector(const std::string& text, int d, const std::string& key) {
    const auto items = split(text, ',');
    if (items.size() == 1) return Eigen::VectorXd::Constant(d, parse_scalar(items[0], key));
    if (static_cast<int>(items.size()) != d)
        throw ParameterError("parameter '" + key + "': expected 1 or " + std::to_string(d) +
                             " components");
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = parse_scalar(items[i], key);
    return v;
}

Eigen::MatrixXd parse_matrix(const std::string& text, int d, const std::string& key) {
    const auto rows = split(text, ';');
    if (rows.size() == 1 && split(rows[0], ',').size() == 1)
        return parse_scalar(rows[0], key) * Eigen::MatrixXd::Identity(d, d);
    if (rows.size() == 1 && static_cast<int>(split(rows[0], ',').size()) == d && d > 1) {
        // a single row of d numbers is a diagonal
        return parse_vector(rows[0], d, key).asDiagonal();
    }
    if (static_cast<int>(rows.size()) != d)
        throw ParameterError("parameter '" + key + "': expected " + std::to_string(d) + " rows");
    Eigen::MatrixXd M(d, d);
    for (int i = 0; i < d; ++i) {
        const auto cols = split(rows[i], ',');
        if (static_cast<int>(cols.size()) != d)
            throw ParameterError("parameter '" + key + "': row " + std::to_string(i) + " needs " +
                                 std::to_string(d) + " entries");
        for (int j = 0; j < d; ++j) M(i, j) = parse_scalar(cols[j], key);
    }
    return M;
}

const std::vector<std::string>& catalog_names() {
    static const std::vector<std::string> names = {"linear_gaussian", "perturbed_linear",
                                                   "scalar_bimodal_demo", "cauchy_noise_linear"};
    return names;
}

InverseProblem catalog(const std::string& name, const CatalogParams& params) {
    if (name == "linear_gaussian") {
        const ParamReader r(name, params, {"d", "A", "eps", "y", "m0", "sigma0"});
        const int d = r.dim(1);
        auto G = std::make_shared<LinearMap>(r.matrix("A", d, 1.0));
        return InverseProblem(G, gaussian_prior(r, d), r.scalar("eps", 1.0), r.vector("y", d, 1.0),
                              NoiseModel::Gaussian, name);
    }
    if (name == "perturbed_linear") {
        const ParamReader r(name, params,
                            {"d", "A", "tau", "eps", "y", "m0", "sigma0", "bump_amp",
                             "bump_center", "bump_width"});
        const int d = r.dim(1);
        RadialBump F(r.vector("bump_amp", d, 1.0), r.vector("bump_center", d, 0.5),
                     r.scalar("bump_width", 2.0));
        auto G = std::make_shared<PerturbedLinearMap>(r.matrix("A", d, 1.0), r.scalar("tau", 0.1),
                                                      std::move(F));
        return InverseProblem(G, gaussian_prior(r, d), r.scalar("eps", 0.5), r.vector("y", d, 1.0),
                              NoiseModel::Gaussian, name);
    }
    if (name == "scalar_bimodal_demo") {
        const ParamReader r(name, params, {"d", "amp", "scale", "eps", "y", "m0", "sigma0"});
        if (r.dim(1) != 1) throw ParameterError(name + ": only d = 1 is supported");
        auto G = std::make_shared<ArctanMap>(1, r.scalar("amp", 1.0), r.scalar("scale", 1.0));
        return InverseProblem(G, gaussian_prior(r, 1), r.scalar("eps", 0.1), r.vector("y", 1, 1.2),
                              NoiseModel::Gaussian, name);
    }
    if (name == "cauchy_noise_linear") {
        const ParamReader r(name, params, {"d", "A", "eps", "y", "prior", "m0", "sigma0"});
        const int d = r.dim(1);
        auto G = std::make_shared<LinearMap>(r.matrix("A", d, 1.0));
        const std::string prior = r.text("prior", "flat");
        std::shared_ptr<const Prior> R;
        if (prior == "flat") {
            if (r.has("m0") || r.has("sigma0"))
                throw ParameterError(name + ": m0/sigma0 need prior = gaussian");
            R = std::make_shared<FlatPrior>(d);
        } else if (prior == "gaussian") {
            R = gaussian_prior(r, d);
        } else {
            throw ParameterError(name + ": prior must be 'flat' or 'gaussian'");
        }
        return InverseProblem(G, R, r.scalar("eps", 1.0), r.vector("y", d, 1.0),
                              NoiseModel::Cauchy, name);
    }
    throw ParameterError("unknown catalog problem '" + name + "'");
}

}  // namespace lc
