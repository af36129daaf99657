#pragma once

#include <Eigen/Dense>
#include <functional>
#include <optional>

#include "laplace_cert/tensor.hpp"

namespace lc {

using ScalarField = std::function<double(const Eigen::VectorXd&)>;
using VectorField = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct FdDifferentials {
    int order = 0;
    double value = 0.0;
    Eigen::VectorXd grad;  // order >= 1
    Eigen::MatrixXd hess;  // order >= 2
    Tensor3 third;         // order >= 3
};

/// Central-difference step for a derivative of the given order at x:
/// u^(1/(order+2)) * max(1, |x|_inf), u the double epsilon.
double fd_step(int order, const Eigen::VectorXd& x);

/// Central-difference differentials of f up to `order` (1..3). With no
/// explicit step the per-order default of fd_step() is used; an explicit
/// step is used for every order. Mixed partials use tensor products of
/// central differences, so the Hessian and third tensor come out exactly
/// symmetric. Throws ParameterError when the step vanishes against x.
FdDifferentials fd_differentials(const ScalarField& f, const Eigen::VectorXd& x, int order,
                                 std::optional<double> step = std::nullopt);

/// Central-difference Jacobian of a vector field.
Eigen::MatrixXd fd_jacobian(const VectorField& g, const Eigen::VectorXd& x,
                            std::optional<double> step = std::nullopt);

}  // namespace lc
