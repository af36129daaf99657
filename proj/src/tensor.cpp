#include "laplace_cert/tensor.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace lc {

Tensor3& Tensor3::operator+=(const Tensor3& o) {
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
    return *this;
}

Tensor3& Tensor3::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

double Tensor3::apply(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                      const Eigen::VectorXd& w) const {
    double s = 0.0;
    for (int i = 0; i < d_; ++i) {
        double si = 0.0;
        for (int j = 0; j < d_; ++j) {
            double sj = 0.0;
            for (int k = 0; k < d_; ++k) sj += (*this)(i, j, k) * w(k);
            si += sj * v(j);
        }
        s += si * u(i);
    }
    return s;
}

Eigen::VectorXd Tensor3::apply_vec(const Eigen::VectorXd& u) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(d_);
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j) {
            double sj = 0.0;
            for (int k = 0; k < d_; ++k) sj += (*this)(i, j, k) * u(k);
            out(i) += sj * u(j);
        }
    return out;
}

Eigen::MatrixXd Tensor3::apply_mat(const Eigen::VectorXd& u) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(d_, d_);
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
            for (int k = 0; k < d_; ++k) out(i, j) += (*this)(i, j, k) * u(k);
    return out;
}

Tensor3 Tensor3::transform(const Eigen::MatrixXd& B) const {
    const int n = static_cast<int>(B.cols());
    // Contract one slot at a time: d^3 n + d^2 n^2 + d n^3 flops.
    Tensor3 out(n);
    std::vector<double> a(static_cast<std::size_t>(d_) * d_ * n, 0.0);
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
            for (int c = 0; c < n; ++c) {
                double s = 0.0;
                for (int k = 0; k < d_; ++k) s += (*this)(i, j, k) * B(k, c);
                a[(static_cast<std::size_t>(i) * d_ + j) * n + c] = s;
            }
    std::vector<double> b(static_cast<std::size_t>(d_) * n * n, 0.0);
    for (int i = 0; i < d_; ++i)
        for (int bb = 0; bb < n; ++bb)
            for (int c = 0; c < n; ++c) {
                double s = 0.0;
                for (int j = 0; j < d_; ++j)
                    s += a[(static_cast<std::size_t>(i) * d_ + j) * n + c] * B(j, bb);
                b[(static_cast<std::size_t>(i) * n + bb) * n + c] = s;
            }
    for (int aa = 0; aa < n; ++aa)
        for (int bb = 0; bb < n; ++bb)
            for (int c = 0; c < n; ++c) {
                double s = 0.0;
                for (int i = 0; i < d_; ++i)
                    s += b[(static_cast<std::size_t>(i) * n + bb) * n + c] * B(i, aa);
                out(aa, bb, c) = s;
            }
    return out;
}

double Tensor3::max_asymmetry() const {
    double worst = 0.0;
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
            for (int k = 0; k < d_; ++k) {
                const double v = (*this)(i, j, k);
                const std::array<double, 5> others = {(*this)(i, k, j), (*this)(j, i, k),
                                                      (*this)(j, k, i), (*this)(k, i, j),
                                                      (*this)(k, j, i)};
                for (double o : others) worst = std::max(worst, std::abs(v - o));
            }
    return worst;
}

void Tensor3::symmetrize() {
    Tensor3 s(d_);
    for (int i = 0; i < d_; ++i)
        for (int j = 0; j < d_; ++j)
            for (int k = 0; k < d_; ++k)
                s(i, j, k) = ((*this)(i, j, k) + (*this)(i, k, j) + (*this)(j, i, k) +
                              (*this)(j, k, i) + (*this)(k, i, j) + (*this)(k, j, i)) /
                             6.0;
    *this = std::move(s);
}

double Tensor3::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

double Tensor3::frobenius() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return std::sqrt(s);
}

}  // namespace lc
