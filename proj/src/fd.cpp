#include "laplace_cert/fd.hpp"

#include <cmath>
#include <limits>
#include <tuple>

#include "laplace_cert/errors.hpp"

namespace lc {

namespace {

void check_step(double h, const Eigen::VectorXd& x) {
    if (!(h > 0.0) || !std::isfinite(h))
        throw ParameterError("finite-difference step must be positive and finite");
    for (Eigen::Index i = 0; i < x.size(); ++i)
        if (x(i) + h == x(i) || x(i) - h == x(i))
            throw ParameterError("finite-difference step underflows against x");
}

}  // namespace

double fd_step(int order, const Eigen::VectorXd& x) {
    const double u = std::numeric_limits<double>::epsilon();
    const double s = std::max(1.0, x.size() > 0 ? x.lpNorm<Eigen::Infinity>() : 0.0);
    return std::pow(u, 1.0 / (order + 2)) * s;
}

FdDifferentials fd_differentials(const ScalarField& f, const Eigen::VectorXd& x, int order,
                                 std::optional<double> step) {
    if (order < 1 || order > 3) throw ParameterError("fd_differentials: order must be 1..3");
    const int d = static_cast<int>(x.size());
    FdDifferentials out;
    out.order = order;
    out.value = f(x);

    auto shifted = [&](std::initializer_list<std::pair<int, double>> moves) {
        Eigen::VectorXd y = x;
        for (auto [i, dx] : moves) y(i) += dx;
        return f(y);
    };

    {
        const double h = step.value_or(fd_step(1, x));
        check_step(h, x);
        out.grad.resize(d);
        for (int i = 0; i < d; ++i)
            out.grad(i) = (shifted({{i, h}}) - shifted({{i, -h}})) / (2.0 * h);
    }
    if (order >= 2) {
        const double h = step.value_or(fd_step(2, x));
        check_step(h, x);
        out.hess.resize(d, d);
        for (int i = 0; i < d; ++i) {
            out.hess(i, i) = (shifted({{i, h}}) - 2.0 * out.value + shifted({{i, -h}})) / (h * h);
            for (int j = i + 1; j < d; ++j) {
                const double v = (shifted({{i, h}, {j, h}}) - shifted({{i, h}, {j, -h}}) -
                                  shifted({{i, -h}, {j, h}}) + shifted({{i, -h}, {j, -h}})) /
                                 (4.0 * h * h);
                out.hess(i, j) = v;
                out.hess(j, i) = v;
            }
        }
    }
    if (order >= 3) {
        const double h = step.value_or(fd_step(3, x));
        check_step(h, x);
        out.third = Tensor3(d);
        for (int i = 0; i < d; ++i)
            for (int j = i; j < d; ++j)
                for (int k = j; k < d; ++k) {
                    double s = 0.0;
                    for (int s1 : {-1, 1})
                        for (int s2 : {-1, 1})
                            for (int s3 : {-1, 1}) {
                                Eigen::VectorXd y = x;
                                y(i) += s1 * h;
                                y(j) += s2 * h;
                                y(k) += s3 * h;
                                s += s1 * s2 * s3 * f(y);
                            }
                    const double v = s / (8.0 * h * h * h);
                    for (auto [a, b, c] : {std::tuple{i, j, k}, std::tuple{i, k, j},
                                           std::tuple{j, i, k}, std::tuple{j, k, i},
                                           std::tuple{k, i, j}, std::tuple{k, j, i}})
                        out.third(a, b, c) = v;
                }
    }
    return out;
}

Eigen::MatrixXd fd_jacobian(const VectorField& g, const Eigen::VectorXd& x,
                            std::optional<double> step) {
    const double h = step.value_or(fd_step(1, x));
    check_step(h, x);
    const Eigen::VectorXd g0 = g(x);
    Eigen::MatrixXd J(g0.size(), x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        Eigen::VectorXd xp = x, xm = x;
        xp(i) += h;
        xm(i) -= h;
        J.col(i) = (g(xp) - g(xm)) / (2.0 * h);
    }
    return J;
}

}  // namespace lc
