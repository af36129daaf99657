#include <doctest.h>

#include <random>

#include "laplace_cert/tensor.hpp"

using lc::Tensor3;

namespace {

Tensor3 random_symmetric(int d, unsigned seed) {
    std::mt19937 rng(seed);
    std::normal_distribution<double> n01;
    Tensor3 T(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) T(i, j, k) = n01(rng);
    T.symmetrize();
    return T;
}

}  // namespace

TEST_CASE("symmetrize produces a totally symmetric tensor") {
    const Tensor3 T = random_symmetric(4, 1);
    CHECK(T.max_asymmetry() <= 1e-15);
    CHECK(T(0, 1, 2) == doctest::Approx(T(2, 0, 1)));
}

TEST_CASE("contractions agree with explicit sums") {
    const Tensor3 T = random_symmetric(3, 2);
    Eigen::VectorXd u(3), v(3), w(3);
    u << 1, -2, 0.5;
    v << 0.3, 0.1, -1;
    w << 2, 2, 1;
    double ref = 0.0;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) ref += T(i, j, k) * u(i) * v(j) * w(k);
    CHECK(T.apply(u, v, w) == doctest::Approx(ref).epsilon(1e-13));
    CHECK(T.apply_vec(u).dot(w) == doctest::Approx(T.apply(w, u, u)).epsilon(1e-13));
    CHECK(v.dot(T.apply_mat(u) * w) == doctest::Approx(T.apply(v, w, u)).epsilon(1e-13));
}

TEST_CASE("transform evaluates the tensor on mapped vectors") {
    const Tensor3 T = random_symmetric(3, 3);
    Eigen::MatrixXd B(3, 3);
    B << 1, 2, 0, 0, 1, -1, 3, 0, 1;
    const Tensor3 W = T.transform(B);
    Eigen::VectorXd u(3);
    u << 0.2, -0.7, 1.1;
    CHECK(W.apply(u, u, u) == doctest::Approx(T.apply(B * u, B * u, B * u)).epsilon(1e-12));
    CHECK(W.max_asymmetry() < 1e-12);
}

TEST_CASE("norms and arithmetic") {
    Tensor3 T(2);
    T(0, 0, 0) = 3.0;
    T(1, 1, 1) = -4.0;
    CHECK(T.frobenius() == doctest::Approx(5.0));
    CHECK(T.max_abs() == doctest::Approx(4.0));
    Tensor3 S = T;
    S += T;
    S *= 0.5;
    CHECK(S(1, 1, 1) == -4.0);
    S.set_zero();
    CHECK(S.max_abs() == 0.0);
}
