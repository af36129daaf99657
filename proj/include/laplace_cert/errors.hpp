#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace lc {

/// Invalid argument or contract violation by the caller.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed (overflow, non-convergence, non-finite value).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite intermediate while evaluating a potential; carries the point.
class EvaluationError : public NumericalError {
public:
    EvaluationError(const std::string& what, Eigen::VectorXd x)
        : NumericalError(what), x_(std::move(x)) {}
    const Eigen::VectorXd& point() const { return x_; }

private:
    Eigen::VectorXd x_;
};

/// One of the standing assumptions (unique SPD minimizer, quadratic
/// lower bound, ...) was detected to fail.
class AssumptionViolation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lc
