#include <doctest.h>

#include <cmath>

#include "laplace_cert/errors.hpp"
#include "laplace_cert/fd.hpp"

using namespace lc;

TEST_CASE("constant field has vanishing differentials") {
    Eigen::VectorXd x(2);
    x << 0.4, -1.3;
    const auto r = fd_differentials([](const Eigen::VectorXd&) { return 3.7; }, x, 3);
    CHECK(r.value == 3.7);
    CHECK(r.grad.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(r.hess.cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(r.third.max_abs() <= 1e-8);
}

TEST_CASE("quadratic form returns its matrix") {
    Eigen::MatrixXd H(3, 3);
    H << 4, 1, 0.5, 1, 3, -1, 0.5, -1, 2;
    auto f = [&](const Eigen::VectorXd& x) { return 0.5 * x.dot(H * x); };
    Eigen::VectorXd x(3);
    x << 0.1, 0.2, -0.3;
    const auto r = fd_differentials(f, x, 2);
    CHECK((r.hess - H).norm() <= 1e-6 * H.norm());
    CHECK((r.grad - H * x).norm() <= 1e-8);
}

TEST_CASE("cubic third derivative") {
    Eigen::VectorXd x(1);
    x << 1.0;
    const auto r = fd_differentials([](const Eigen::VectorXd& v) { return std::pow(v(0), 3); }, x, 3);
    CHECK(r.third(0, 0, 0) == doctest::Approx(6.0).epsilon(1e-4));
}

TEST_CASE("mixed third partials are symmetric and correct") {
    auto f = [](const Eigen::VectorXd& v) { return std::sin(v(0)) * v(1) * v(1) + v(0) * v(1) * v(2); };
    Eigen::VectorXd x(3);
    x << 0.3, -0.8, 1.2;
    const auto r = fd_differentials(f, x, 3);
    CHECK(r.third.max_asymmetry() == 0.0);
    // d^3/dx0 dx1 dx1 = 2 cos(x0); d^3/dx0 dx1 dx2 = 1; d^3/dx0^3 = -cos(x0) x1^2
    CHECK(r.third(0, 1, 1) == doctest::Approx(2.0 * std::cos(0.3)).epsilon(1e-5));
    CHECK(r.third(2, 0, 1) == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(r.third(0, 0, 0) == doctest::Approx(-std::cos(0.3) * 0.64).epsilon(1e-4));
}

TEST_CASE("step underflow and bad arguments are rejected") {
    Eigen::VectorXd x(1);
    x << 1.0;
    auto f = [](const Eigen::VectorXd& v) { return v(0); };
    CHECK_THROWS_AS(fd_differentials(f, x, 1, 1e-300), ParameterError);
    CHECK_THROWS_AS(fd_differentials(f, x, 4), ParameterError);
    CHECK_THROWS_AS(fd_differentials(f, x, 1, -1.0), ParameterError);
}

TEST_CASE("jacobian of a linear field") {
    Eigen::MatrixXd A(2, 2);
    A << 1, 2, -3, 4;
    Eigen::VectorXd x(2);
    x << 5, 6;
    const Eigen::MatrixXd J = fd_jacobian([&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return A * v; }, x);
    CHECK((J - A).norm() <= 1e-8);
}
