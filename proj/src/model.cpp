#include "laplace_cert/model.hpp"

#include <cmath>
#include <numbers>

#include "laplace_cert/errors.hpp"

namespace lc {

// ---------------------------------------------------------------------------
// ForwardMap fallbacks

Eigen::MatrixXd ForwardMap::jacobian(const Eigen::VectorXd& x) const {
    return fd_jacobian([this](const Eigen::VectorXd& z) { return value(z); }, x);
}

Eigen::MatrixXd ForwardMap::second_contract(const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& w) const {
    if (analytic_order() >= 1) {
        Eigen::MatrixXd H = fd_jacobian(
            [this, &w](const Eigen::VectorXd& z) -> Eigen::VectorXd {
                return jacobian(z).transpose() * w;
            },
            x);
        return 0.5 * (H + H.transpose());
    }
    return fd_differentials([this, &w](const Eigen::VectorXd& z) { return w.dot(value(z)); }, x,
                            2)
        .hess;
}

Tensor3 ForwardMap::third_contract(const Eigen::VectorXd& x, const Eigen::VectorXd& w) const {
    const int d = dim();
    if (analytic_order() >= 2) {
        const double h = fd_step(1, x);
        Tensor3 T(d);
        for (int k = 0; k < d; ++k) {
            Eigen::VectorXd xp = x, xm = x;
            xp(k) += h;
            xm(k) -= h;
            const Eigen::MatrixXd D = (second_contract(xp, w) - second_contract(xm, w)) / (2 * h);
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j) T(i, j, k) = D(i, j);
        }
        T.symmetrize();
        return T;
    }
    return fd_differentials([this, &w](const Eigen::VectorXd& z) { return w.dot(value(z)); }, x,
                            3)
        .third;
}

std::vector<Eigen::MatrixXd> ForwardMap::second_diff(const Eigen::VectorXd& x) const {
    std::vector<Eigen::MatrixXd> out;
    for (int a = 0; a < dim(); ++a) out.push_back(second_contract(x, Eigen::VectorXd::Unit(dim(), a)));
    return out;
}

std::vector<Tensor3> ForwardMap::third_diff(const Eigen::VectorXd& x) const {
    std::vector<Tensor3> out;
    for (int a = 0; a < dim(); ++a) out.push_back(third_contract(x, Eigen::VectorXd::Unit(dim(), a)));
    return out;
}

// ---------------------------------------------------------------------------
// LinearMap

LinearMap::LinearMap(Eigen::MatrixXd A) : A_(std::move(A)) {
    if (A_.rows() != A_.cols() || A_.rows() == 0)
        throw ParameterError("LinearMap: A must be square and non-empty");
}

Eigen::MatrixXd LinearMap::second_contract(const Eigen::VectorXd&, const Eigen::VectorXd&) const {
    return Eigen::MatrixXd::Zero(dim(), dim());
}

Tensor3 LinearMap::third_contract(const Eigen::VectorXd&, const Eigen::VectorXd&) const {
    return Tensor3(dim());
}

// ---------------------------------------------------------------------------
// RadialBump

namespace {

// phi(s) = (1 - s)^4 on [0, 1), 0 beyond; derivatives in s.
struct PhiDerivs {
    double v, d1, d2, d3;
};

PhiDerivs phi(double s) {
    if (s >= 1.0) return {0.0, 0.0, 0.0, 0.0};
    const double m = 1.0 - s;
    return {m * m * m * m, -4.0 * m * m * m, 12.0 * m * m, -24.0 * m};
}

// sup over unit h of |d^3/dt^3 phi(|z + t h|^2 / w^2)| at t = 0, written in
// units of 1/w^3 as a function of s = |z|^2/w^2 and t = <z/|z|, h>:
//   g(s, t) = 8 phi'''(s) s^{3/2} t^3 + 12 phi''(s) s^{1/2} t.
double third_profile(double s) {
    const PhiDerivs p = phi(s);
    auto g = [&](double t) {
        return std::abs(8.0 * p.d3 * s * std::sqrt(s) * t * t * t + 12.0 * p.d2 * std::sqrt(s) * t);
    };
    double best = g(1.0);
    if (s > 0.0) {
        // interior critical point of the odd cubic in t
        const double t2 = -(12.0 * p.d2) / (3.0 * 8.0 * p.d3 * s);
        if (t2 > 0.0 && t2 <= 1.0) best = std::max(best, g(std::sqrt(t2)));
    }
    return best;
}

double sup_third_profile() {
    const int n = 200000;
    int arg = 0;
    double best = 0.0;
    for (int i = 0; i <= n; ++i) {
        const double v = third_profile(static_cast<double>(i) / n);
        if (v > best) {
            best = v;
            arg = i;
        }
    }
    // golden-section polish around the grid maximiser
    double lo = std::max(0.0, (arg - 1.0) / n), hi = std::min(1.0, (arg + 1.0) / n);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    for (int it = 0; it < 100; ++it) {
        const double a = hi - gr * (hi - lo), b = lo + gr * (hi - lo);
        if (third_profile(a) > third_profile(b))
            hi = b;
        else
            lo = a;
    }
    best = std::max(best, third_profile(0.5 * (lo + hi)));
    return best * (1.0 + 1e-9);
}

}  // namespace

RadialBump::RadialBump(Eigen::VectorXd amplitude, Eigen::VectorXd center, double width)
    : amp_(std::move(amplitude)), center_(std::move(center)), width_(width) {
    if (amp_.size() == 0 || amp_.size() != center_.size())
        throw ParameterError("RadialBump: amplitude and center must have equal, nonzero size");
    if (!(width_ > 0.0)) throw ParameterError("RadialBump: width must be positive");
    const double b = amp_.norm();
    // sup |phi| = 1; sup 2|phi'(s)| sqrt(s) = 8 (6/7)^3 / sqrt(7) at s = 1/7;
    // sup max(|2 phi'|, |4 s phi'' + 2 phi'|) = 8 at s = 0.
    const double c1 = 8.0 * std::pow(6.0 / 7.0, 3) / std::sqrt(7.0);
    static const double c3 = sup_third_profile();
    bounds_ = {b, b * c1 / width_, b * 8.0 / (width_ * width_),
               b * c3 / (width_ * width_ * width_)};
}

Eigen::VectorXd RadialBump::value(const Eigen::VectorXd& x) const {
    const double s = (x - center_).squaredNorm() / (width_ * width_);
    return amp_ * phi(s).v;
}

Eigen::MatrixXd RadialBump::jacobian(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd z = x - center_;
    const double w2 = width_ * width_;
    const PhiDerivs p = phi(z.squaredNorm() / w2);
    return amp_ * (p.d1 * 2.0 / w2 * z).transpose();
}

Eigen::MatrixXd RadialBump::second_contract(const Eigen::VectorXd& x,
                                            const Eigen::VectorXd& w) const {
    const Eigen::VectorXd z = x - center_;
    const double w2 = width_ * width_;
    const PhiDerivs p = phi(z.squaredNorm() / w2);
    const Eigen::VectorXd ds = 2.0 / w2 * z;
    const double wb = w.dot(amp_);
    const int d = dim();
    return wb * (p.d2 * ds * ds.transpose() +
                 p.d1 * 2.0 / w2 * Eigen::MatrixXd::Identity(d, d));
}

Tensor3 RadialBump::third_contract(const Eigen::VectorXd& x, const Eigen::VectorXd& w) const {
    const Eigen::VectorXd z = x - center_;
    const double w2 = width_ * width_;
    const PhiDerivs p = phi(z.squaredNorm() / w2);
    const Eigen::VectorXd ds = 2.0 / w2 * z;
    const double dss = 2.0 / w2;  // Hessian of s is dss * I
    const double wb = w.dot(amp_);
    const int d = dim();
    Tensor3 T(d);
    if (p.d2 == 0.0 && p.d3 == 0.0) return T;
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k) {
                double v = p.d3 * ds(i) * ds(j) * ds(k);
                v += p.d2 * dss * ((i == j ? ds(k) : 0.0) + (i == k ? ds(j) : 0.0) +
                                   (j == k ? ds(i) : 0.0));
                T(i, j, k) = wb * v;
            }
    return T;
}

// ---------------------------------------------------------------------------
// PerturbedLinearMap

PerturbedLinearMap::PerturbedLinearMap(Eigen::MatrixXd A, double tau, RadialBump F)
    : A_(std::move(A)), tau_(tau), F_(std::move(F)) {
    if (A_.rows() != A_.cols() || A_.rows() != F_.dim())
        throw ParameterError("PerturbedLinearMap: A must be square and match F");
    if (!(tau_ >= 0.0)) throw ParameterError("PerturbedLinearMap: tau must be >= 0");
}

Eigen::VectorXd PerturbedLinearMap::value(const Eigen::VectorXd& x) const {
    return A_ * x + tau_ * F_.value(x);
}

Eigen::MatrixXd PerturbedLinearMap::jacobian(const Eigen::VectorXd& x) const {
    return A_ + tau_ * F_.jacobian(x);
}

Eigen::MatrixXd PerturbedLinearMap::second_contract(const Eigen::VectorXd& x,
                                                    const Eigen::VectorXd& w) const {
    return tau_ * F_.second_contract(x, w);
}

Tensor3 PerturbedLinearMap::third_contract(const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& w) const {
    Tensor3 T = F_.third_contract(x, w);
    T *= tau_;
    return T;
}

// ---------------------------------------------------------------------------
// ArctanMap

ArctanMap::ArctanMap(int dim, double amp, double scale) : dim_(dim), amp_(amp), scale_(scale) {
    if (dim_ < 1 || !(scale_ > 0.0)) throw ParameterError("ArctanMap: bad dim or scale");
}

Eigen::VectorXd ArctanMap::value(const Eigen::VectorXd& x) const {
    return amp_ * (x / scale_).array().atan().matrix();
}

Eigen::MatrixXd ArctanMap::jacobian(const Eigen::VectorXd& x) const {
    Eigen::VectorXd g(dim_);
    for (int i = 0; i < dim_; ++i) {
        const double u = x(i) / scale_;
        g(i) = amp_ / (scale_ * (1.0 + u * u));
    }
    return g.asDiagonal();
}

Eigen::MatrixXd ArctanMap::second_contract(const Eigen::VectorXd& x,
                                           const Eigen::VectorXd& w) const {
    Eigen::VectorXd g(dim_);
    for (int i = 0; i < dim_; ++i) {
        const double u = x(i) / scale_, q = 1.0 + u * u;
        g(i) = w(i) * (-2.0 * amp_ * u / (scale_ * scale_ * q * q));
    }
    return g.asDiagonal();
}

Tensor3 ArctanMap::third_contract(const Eigen::VectorXd& x, const Eigen::VectorXd& w) const {
    Tensor3 T(dim_);
    for (int i = 0; i < dim_; ++i) {
        const double u = x(i) / scale_, q = 1.0 + u * u;
        T(i, i, i) = w(i) * amp_ * (6.0 * u * u - 2.0) / (scale_ * scale_ * scale_ * q * q * q);
    }
    return T;
}

// ---------------------------------------------------------------------------
// CallbackMap

CallbackMap::CallbackMap(int dim, VectorField value,
                         std::function<Eigen::MatrixXd(const Eigen::VectorXd&)> jacobian)
    : dim_(dim), value_(std::move(value)), jacobian_(std::move(jacobian)) {
    if (dim_ < 1 || !value_) throw ParameterError("CallbackMap: bad dim or empty callback");
}

Eigen::MatrixXd CallbackMap::jacobian(const Eigen::VectorXd& x) const {
    if (jacobian_) return jacobian_(x);
    return ForwardMap::jacobian(x);
}

// ---------------------------------------------------------------------------
// Priors

GaussianPrior::GaussianPrior(Eigen::VectorXd mean, Eigen::MatrixXd cov)
    : mean_(std::move(mean)), cov_(std::move(cov)) {
    const auto d = mean_.size();
    if (d == 0 || cov_.rows() != d || cov_.cols() != d)
        throw ParameterError("GaussianPrior: dimension mismatch");
    if ((cov_ - cov_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * cov_.cwiseAbs().maxCoeff())
        throw ParameterError("GaussianPrior: covariance must be symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(cov_);
    if (llt.info() != Eigen::Success)
        throw ParameterError("GaussianPrior: covariance must be positive definite");
    precision_ = llt.solve(Eigen::MatrixXd::Identity(d, d));
    precision_ = 0.5 * (precision_ + precision_.transpose());
    const Eigen::MatrixXd L = llt.matrixL();
    log_norm_ = 0.5 * static_cast<double>(d) * std::log(2.0 * std::numbers::pi) +
                L.diagonal().array().log().sum();
}

double GaussianPrior::value(const Eigen::VectorXd& x) const {
    const Eigen::VectorXd r = x - mean_;
    return 0.5 * r.dot(precision_ * r) + log_norm_;
}

Eigen::VectorXd GaussianPrior::grad(const Eigen::VectorXd& x) const {
    return precision_ * (x - mean_);
}

// ---------------------------------------------------------------------------
// InverseProblem

InverseProblem::InverseProblem(std::shared_ptr<const ForwardMap> forward,
                               std::shared_ptr<const Prior> prior, double eps,
                               Eigen::VectorXd data, NoiseModel noise, std::string name)
    : forward_(std::move(forward)),
      prior_(std::move(prior)),
      eps_(eps),
      data_(std::move(data)),
      noise_(noise),
      name_(std::move(name)) {
    if (!forward_ || !prior_) throw ParameterError("InverseProblem: null forward map or prior");
    if (!(eps_ > 0.0) || !std::isfinite(eps_))
        throw ParameterError("InverseProblem: eps must be positive and finite");
    if (prior_->dim() != forward_->dim() || data_.size() != forward_->dim())
        throw ParameterError("InverseProblem: dimension mismatch between map, prior and data");
}

bool InverseProblem::is_linear_gaussian() const {
    return forward_->is_linear() && noise_ == NoiseModel::Gaussian && prior_->gaussian();
}

InverseProblem InverseProblem::with_eps(double eps) const {
    return InverseProblem(forward_, prior_, eps, data_, noise_, name_);
}

// ---------------------------------------------------------------------------
// Potentials

namespace {

void require_finite(double v, const Eigen::VectorXd& x, const char* what) {
    if (!std::isfinite(v))
        throw EvaluationError(std::string("non-finite ") + what + " in potential evaluation", x);
}

}  // namespace

PotentialEval likelihood(const InverseProblem& p, const Eigen::VectorXd& x, int order) {
    if (order < 0 || order > 3) throw ParameterError("potential: order must be 0..3");
    if (x.size() != p.dim()) throw ParameterError("potential: dimension mismatch");
    if (!x.allFinite()) throw EvaluationError("potential: non-finite point", x);
    const ForwardMap& G = p.forward();
    const int d = p.dim();

    const Eigen::VectorXd r = G.value(x) - p.data();
    if (!r.allFinite()) throw EvaluationError("non-finite forward map value", x);
    const double q = 0.5 * r.squaredNorm();

    // Phi = g(q) with q = |G(x) - y|^2 / 2.
    double g0 = q, g1 = 1.0, g2 = 0.0, g3 = 0.0;
    if (p.noise() == NoiseModel::Cauchy) {
        const double c = 0.5 * (d + 1), t = 1.0 + 2.0 * q;
        g0 = c * std::log1p(2.0 * q);
        g1 = 2.0 * c / t;
        g2 = -4.0 * c / (t * t);
        g3 = 16.0 * c / (t * t * t);
    }

    PotentialEval out;
    out.order = order;
    out.value = g0;
    require_finite(out.value, x, "likelihood value");
    if (order == 0) return out;

    const Eigen::MatrixXd J = G.jacobian(x);
    const Eigen::VectorXd qg = J.transpose() * r;
    out.grad = g1 * qg;
    if (order == 1) {
        require_finite(out.grad.sum(), x, "likelihood gradient");
        return out;
    }

    Eigen::MatrixXd qh = J.transpose() * J;
    if (!G.is_linear()) qh += G.second_contract(x, r);
    out.hess = g1 * qh + g2 * qg * qg.transpose();
    if (order == 2) {
        require_finite(out.grad.sum() + out.hess.sum(), x, "likelihood differential");
        return out;
    }

    Tensor3 qt(d);
    if (!G.is_linear()) {
        qt = G.third_contract(x, r);
        // sum_a D^2 G_a(e_i, e_j) J_ak, one slice per k
        std::vector<Eigen::MatrixXd> slices;
        slices.reserve(d);
        for (int k = 0; k < d; ++k) slices.push_back(G.second_contract(x, J.col(k)));
        for (int i = 0; i < d; ++i)
            for (int j = 0; j < d; ++j)
                for (int k = 0; k < d; ++k)
                    qt(i, j, k) += slices[k](i, j) + slices[j](i, k) + slices[i](j, k);
    }
    out.third = Tensor3(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j)
            for (int k = 0; k < d; ++k)
                out.third(i, j, k) =
                    g1 * qt(i, j, k) +
                    g2 * (qh(i, j) * qg(k) + qh(i, k) * qg(j) + qh(j, k) * qg(i)) +
                    g3 * qg(i) * qg(j) * qg(k);
    require_finite(out.grad.sum() + out.hess.sum() + out.third.frobenius(), x,
                   "likelihood differential");
    return out;
}

PotentialEval prior_potential(const InverseProblem& p, const Eigen::VectorXd& x, int order) {
    if (order < 0 || order > 3) throw ParameterError("potential: order must be 0..3");
    if (x.size() != p.dim()) throw ParameterError("potential: dimension mismatch");
    const Prior& R = p.prior();
    PotentialEval out;
    out.order = order;
    out.value = R.value(x);
    if (order >= 1) out.grad = R.grad(x);
    if (order >= 2) out.hess = R.hess(x);
    if (order >= 3) out.third = R.third(x);
    return out;
}

PotentialEval potential(const InverseProblem& p, const Eigen::VectorXd& x, int order) {
    PotentialEval out = likelihood(p, x, order);
    const PotentialEval r = prior_potential(p, x, order);
    const double eps = p.eps();
    out.value += eps * r.value;
    require_finite(out.value, x, "potential value");
    if (order >= 1) out.grad += eps * r.grad;
    if (order >= 2) out.hess += eps * r.hess;
    if (order >= 3 && !p.prior().third_vanishes()) {
        Tensor3 t = r.third;
        t *= eps;
        out.third += t;
    }
    return out;
}

double potential_value(const InverseProblem& p, const Eigen::VectorXd& x) {
    return potential(p, x, 0).value;
}

}  // namespace lc
