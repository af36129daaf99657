#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "laplace_cert/catalog.hpp"
#include "laplace_cert/errors.hpp"

namespace lc {

/// Malformed configuration text; carries the 1-based line and column.
class ConfigError : public ParameterError {
public:
    ConfigError(const std::string& what, int line, int column);
    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_, column_;
};

enum class ConstantsMode { Auto, Analytic, Estimate, User };
enum class OracleChoice { Auto, Quadrature, Importance, None };
enum class SweepAxis { Eps, Tau, Dim };

const char* to_string(ConstantsMode m);
const char* to_string(OracleChoice o);
const char* to_string(SweepAxis a);
OracleChoice parse_oracle(const std::string& s);

struct SweepSpec {
    SweepAxis axis = SweepAxis::Eps;
    std::vector<double> values;  // strictly increasing, positive
};

struct ExperimentConfig {
    std::string problem;
    CatalogParams params;
    ConstantsMode constants = ConstantsMode::Auto;
    double user_K = 0.0;
    double user_delta = 1.0;
    int constant_samples = 256;
    double constant_radius = 0.0;  // 0: default
    bool split_bound = true, closed_form = true, perturbation = true;  // bound set
    OracleChoice oracle = OracleChoice::Auto;
    long oracle_samples = 100000;
    double oracle_tol = 1e-10;
    std::optional<SweepSpec> sweep;
    std::uint64_t seed = 0;
    std::string output = "out";
    int density_grid = 401;
    int multistart = 8;
};

/// Parses `key = value` lines (`#` starts a comment) into a validated
/// config. See README for the key list.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

}  // namespace lc
