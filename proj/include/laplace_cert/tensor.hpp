#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

namespace lc {

/// Dense d x d x d array, row-major in (i, j, k). Used for third
/// differentials of scalar fields.
class Tensor3 {
public:
    Tensor3() = default;
    explicit Tensor3(int d) : d_(d), data_(static_cast<std::size_t>(d) * d * d, 0.0) {}

    int dim() const { return d_; }

    double& operator()(int i, int j, int k) { return data_[index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return data_[index(i, j, k)]; }

    const std::vector<double>& data() const { return data_; }

    void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }
    Tensor3& operator+=(const Tensor3& o);
    Tensor3& operator*=(double s);

    /// T(u, v, w)
    double apply(const Eigen::VectorXd& u, const Eigen::VectorXd& v,
                 const Eigen::VectorXd& w) const;
    /// T(., u, u) as a vector.
    Eigen::VectorXd apply_vec(const Eigen::VectorXd& u) const;
    /// T(., ., u) as a matrix.
    Eigen::MatrixXd apply_mat(const Eigen::VectorXd& u) const;

    /// T'(i,j,k) = sum T(a,b,c) B(a,i) B(b,j) B(c,k), i.e. T evaluated on
    /// the columns of B in every slot.
    Tensor3 transform(const Eigen::MatrixXd& B) const;

    /// Largest |T(i,j,k) - T(p)| over all slot permutations p.
    double max_asymmetry() const;
    /// Average over the six slot permutations.
    void symmetrize();

    double max_abs() const;
    double frobenius() const;

private:
    std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(i) * d_ + j) * d_ + k;
    }

    int d_ = 0;
    std::vector<double> data_;
};

}  // namespace lc
