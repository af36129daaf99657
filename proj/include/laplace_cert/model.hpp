#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "laplace_cert/fd.hpp"
#include "laplace_cert/tensor.hpp"

namespace lc {

/// Forward map G: R^d -> R^d with differentials up to third order.
///
/// Higher differentials are exposed as contractions against an output
/// weight w, i.e. sum_a w_a D^k G_a(x); this is all the chain rule for a
/// scalar potential needs and keeps memory at O(d^3) instead of O(d^4).
/// Overrides supply analytic versions; whatever is not overridden falls
/// back to central differences.
class ForwardMap {
public:
    virtual ~ForwardMap() = default;

    virtual int dim() const = 0;
    virtual Eigen::VectorXd value(const Eigen::VectorXd& x) const = 0;
    virtual Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
    virtual Eigen::MatrixXd second_contract(const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& w) const;
    virtual Tensor3 third_contract(const Eigen::VectorXd& x, const Eigen::VectorXd& w) const;

    /// Highest order k such that D^1..D^k are analytic (0..3).
    virtual int analytic_order() const { return 0; }
    /// True when G is affine, so D^2 G and D^3 G vanish identically.
    virtual bool is_linear() const { return false; }

    /// D^2 G(x) as one d x d matrix per output component.
    std::vector<Eigen::MatrixXd> second_diff(const Eigen::VectorXd& x) const;
    /// D^3 G(x) as one d x d x d tensor per output component.
    std::vector<Tensor3> third_diff(const Eigen::VectorXd& x) const;
};

/// G(x) = A x.
class LinearMap final : public ForwardMap {
public:
    explicit LinearMap(Eigen::MatrixXd A);

    int dim() const override { return static_cast<int>(A_.rows()); }
    Eigen::VectorXd value(const Eigen::VectorXd& x) const override { return A_ * x; }
    Eigen::MatrixXd jacobian(const Eigen::VectorXd&) const override { return A_; }
    Eigen::MatrixXd second_contract(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& w) const override;
    Tensor3 third_contract(const Eigen::VectorXd& x, const Eigen::VectorXd& w) const override;
    int analytic_order() const override { return 3; }
    bool is_linear() const override { return true; }

    const Eigen::MatrixXd& matrix() const { return A_; }

private:
    Eigen::MatrixXd A_;
};

/// Smooth compactly supported perturbation
///   F(x) = b * phi(|x - c|^2 / w^2),  phi(s) = (1 - s)^4 for s < 1, 0 otherwise.
/// phi is C^3 at s = 1, so F is C^3 and D^3 F vanishes outside the ball
/// B(c, w), hence outside the origin-centred ball of radius |c| + w.
class RadialBump {
public:
    RadialBump(Eigen::VectorXd amplitude, Eigen::VectorXd center, double width);

    int dim() const { return static_cast<int>(amp_.size()); }
    Eigen::VectorXd value(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const;
    Eigen::MatrixXd second_contract(const Eigen::VectorXd& x, const Eigen::VectorXd& w) const;
    Tensor3 third_contract(const Eigen::VectorXd& x, const Eigen::VectorXd& w) const;

    /// Euclidean operator-norm bounds sup_x |D^j F(x)|, j = 0..3.
    const std::array<double, 4>& euclidean_bounds() const { return bounds_; }
    /// Radius M of an origin-centred ball outside which D^3 F = 0.
    double support_radius() const { return center_.norm() + width_; }

    const Eigen::VectorXd& amplitude() const { return amp_; }
    const Eigen::VectorXd& center() const { return center_; }
    double width() const { return width_; }

private:
    Eigen::VectorXd amp_;
    Eigen::VectorXd center_;
    double width_;
    std::array<double, 4> bounds_{};
};

/// G_tau(x) = A x + tau F(x) with F a RadialBump.
class PerturbedLinearMap final : public ForwardMap {
public:
    PerturbedLinearMap(Eigen::MatrixXd A, double tau, RadialBump F);

    int dim() const override { return static_cast<int>(A_.rows()); }
    Eigen::VectorXd value(const Eigen::VectorXd& x) const override;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const override;
    Eigen::MatrixXd second_contract(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& w) const override;
    Tensor3 third_contract(const Eigen::VectorXd& x, const Eigen::VectorXd& w) const override;
    int analytic_order() const override { return 3; }
    bool is_linear() const override { return tau_ == 0.0; }

    const Eigen::MatrixXd& matrix() const { return A_; }
    double tau() const { return tau_; }
    const RadialBump& perturbation() const { return F_; }

private:
    Eigen::MatrixXd A_;
    double tau_;
    RadialBump F_;
};

/// Componentwise G_i(x) = amp * atan(x_i / scale).
class ArctanMap final : public ForwardMap {
public:
    ArctanMap(int dim, double amp, double scale);

    int dim() const override { return dim_; }
    Eigen::VectorXd value(const Eigen::VectorXd& x) const override;
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const override;
    Eigen::MatrixXd second_contract(const Eigen::VectorXd& x,
                                    const Eigen::VectorXd& w) const override;
    Tensor3 third_contract(const Eigen::VectorXd& x, const Eigen::VectorXd& w) const override;
    int analytic_order() const override { return 3; }

private:
    int dim_;
    double amp_, scale_;
};

/// User-supplied map; differentials beyond the optional Jacobian come from
/// finite differences.
class CallbackMap final : public ForwardMap {
public:
    CallbackMap(int dim, VectorField value,
                std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian = {});

    int dim() const override { return dim_; }
    Eigen::VectorXd value(const Eigen::VectorXd& x) const override { return value_(x); }
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& x) const override;
    int analytic_order() const override { return jacobian_ ? 1 : 0; }

private:
    int dim_;
    VectorField value_;
    std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian_;
};

struct GaussianParams {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

/// Negative log prior density R and its differentials.
class Prior {
public:
    virtual ~Prior() = default;
    virtual int dim() const = 0;
    virtual double value(const Eigen::VectorXd& x) const = 0;
    virtual Eigen::VectorXd grad(const Eigen::VectorXd& x) const = 0;
    virtual Eigen::MatrixXd hess(const Eigen::VectorXd& x) const = 0;
    virtual Tensor3 third(const Eigen::VectorXd& x) const = 0;
    virtual std::optional<GaussianParams> gaussian() const { return std::nullopt; }
    /// True when D^3 R vanishes identically.
    virtual bool third_vanishes() const { return false; }
};

/// R(x) = 1/2 |x - m0|^2_{Sigma0} + d/2 ln 2 pi + 1/2 ln det Sigma0.
class GaussianPrior final : public Prior {
public:
    GaussianPrior(Eigen::VectorXd mean, Eigen::MatrixXd cov);

    int dim() const override { return static_cast<int>(mean_.size()); }
    double value(const Eigen::VectorXd& x) const override;
    Eigen::VectorXd grad(const Eigen::VectorXd& x) const override;
    Eigen::MatrixXd hess(const Eigen::VectorXd&) const override { return precision_; }
    Tensor3 third(const Eigen::VectorXd&) const override { return Tensor3(dim()); }
    std::optional<GaussianParams> gaussian() const override {
        return GaussianParams{mean_, cov_};
    }
    bool third_vanishes() const override { return true; }

    const Eigen::MatrixXd& precision() const { return precision_; }

private:
    Eigen::VectorXd mean_;
    Eigen::MatrixXd cov_;
    Eigen::MatrixXd precision_;
    double log_norm_;
};

/// R = 0 (improper uniform prior).
class FlatPrior final : public Prior {
public:
    explicit FlatPrior(int dim) : dim_(dim) {}
    int dim() const override { return dim_; }
    double value(const Eigen::VectorXd&) const override { return 0.0; }
    Eigen::VectorXd grad(const Eigen::VectorXd&) const override {
        return Eigen::VectorXd::Zero(dim_);
    }
    Eigen::MatrixXd hess(const Eigen::VectorXd&) const override {
        return Eigen::MatrixXd::Zero(dim_, dim_);
    }
    Tensor3 third(const Eigen::VectorXd&) const override { return Tensor3(dim_); }
    bool third_vanishes() const override { return true; }

private:
    int dim_;
};

enum class NoiseModel { Gaussian, Cauchy };

/// y = G(x) + sqrt(eps) eta with prior R. Immutable once built.
///
/// For Gaussian noise Phi(x) = 1/2 |y - G(x)|^2. For standard multivariate
/// Cauchy noise Phi(x) = (d+1)/2 ln(1 + |y - G(x)|^2); the normalising
/// constant of the Cauchy density is dropped since it cancels in I.
class InverseProblem {
public:
    InverseProblem(std::shared_ptr<const ForwardMap> forward, std::shared_ptr<const Prior> prior,
                   double eps, Eigen::VectorXd data, NoiseModel noise = NoiseModel::Gaussian,
                   std::string name = "custom");

    int dim() const { return forward_->dim(); }
    const ForwardMap& forward() const { return *forward_; }
    std::shared_ptr<const ForwardMap> forward_ptr() const { return forward_; }
    const Prior& prior() const { return *prior_; }
    std::shared_ptr<const Prior> prior_ptr() const { return prior_; }
    double eps() const { return eps_; }
    const Eigen::VectorXd& data() const { return data_; }
    NoiseModel noise() const { return noise_; }
    const std::string& name() const { return name_; }

    /// Linear forward map, Gaussian noise and Gaussian prior: the posterior
    /// is exactly Gaussian.
    bool is_linear_gaussian() const;

    /// Same problem with a different noise level.
    InverseProblem with_eps(double eps) const;

private:
    std::shared_ptr<const ForwardMap> forward_;
    std::shared_ptr<const Prior> prior_;
    double eps_;
    Eigen::VectorXd data_;
    NoiseModel noise_;
    std::string name_;
};

/// Value and differentials (up to `order`) of a scalar field.
struct PotentialEval {
    int order = 0;
    double value = 0.0;
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    Tensor3 third;
};

/// Phi and its differentials.
PotentialEval likelihood(const InverseProblem& p, const Eigen::VectorXd& x, int order);
/// R and its differentials.
PotentialEval prior_potential(const InverseProblem& p, const Eigen::VectorXd& x, int order);
/// Unshifted potential Phi + eps R and its differentials. Throws
/// EvaluationError on non-finite intermediates.
PotentialEval potential(const InverseProblem& p, const Eigen::VectorXd& x, int order);
/// Phi(x) + eps R(x) only.
double potential_value(const InverseProblem& p, const Eigen::VectorXd& x);

}  // namespace lc
