#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <queue>
#include <vector>

namespace lc::quad {

/// Fixed-size vector of integrand components.
template <std::size_t N>
using Values = std::array<double, N>;

template <std::size_t N>
struct Result {
    Values<N> value{};
    double error = 0.0;  // max over components of the absolute error estimate
    int intervals = 0;
    long evaluations = 0;
    bool converged = false;
};

struct Options {
    double abs_tol = 1e-12;
    double rel_tol = 0.0;  // relative to |component 0|
    int max_intervals = 4000;
};

namespace detail {

// 15-point Kronrod nodes on [0, 1] (symmetric) with the embedded 7-point
// Gauss weights on the odd-indexed nodes.
inline constexpr std::array<double, 8> kNodes = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
inline constexpr std::array<double, 8> kKronrod = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr std::array<double, 4> kGauss = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

template <std::size_t N>
struct Segment {
    double a, b;
    Values<N> value;
    double error;
    bool operator<(const Segment& o) const { return error < o.error; }
};

template <std::size_t N, typename F>
Segment<N> gk15(F& f, double a, double b, long& evals) {
    const double c = 0.5 * (a + b), h = 0.5 * (b - a);
    Values<N> k{}, g{};
    auto add = [](Values<N>& acc, const Values<N>& v, double w) {
        for (std::size_t n = 0; n < N; ++n) acc[n] += w * v[n];
    };
    const Values<N> fc = f(c);
    add(k, fc, kKronrod[7]);
    add(g, fc, kGauss[3]);
    for (int i = 0; i < 7; ++i) {
        const Values<N> f1 = f(c - h * kNodes[i]);
        const Values<N> f2 = f(c + h * kNodes[i]);
        add(k, f1, kKronrod[i]);
        add(k, f2, kKronrod[i]);
        if (i % 2 == 1) {
            add(g, f1, kGauss[i / 2]);
            add(g, f2, kGauss[i / 2]);
        }
    }
    evals += 15;
    Segment<N> s{a, b, {}, 0.0};
    for (std::size_t n = 0; n < N; ++n) {
        s.value[n] = h * k[n];
        s.error = std::max(s.error, std::abs(h * (k[n] - g[n])));
    }
    return s;
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (7/15) integration of a vector-valued
/// integrand over [a, b]. The interval with the largest |K15 - G7|
/// estimate is bisected until the summed estimate meets the tolerance or
/// the interval budget runs out (converged = false, partial value kept).
/// `initial_splits` pre-divides [a, b] so narrow features are not missed.
template <std::size_t N, typename F>
Result<N> integrate(F&& f, double a, double b, const Options& opt = {}, int initial_splits = 1) {
    Result<N> r;
    if (a == b) {
        r.converged = true;
        return r;
    }
    std::priority_queue<detail::Segment<N>> heap;
    const int m = std::max(1, initial_splits);
    for (int i = 0; i < m; ++i) {
        const double lo = a + (b - a) * i / m, hi = (i + 1 == m) ? b : a + (b - a) * (i + 1) / m;
        heap.push(detail::gk15<N>(f, lo, hi, r.evaluations));
    }
    auto totals = [&](Values<N>& value, double& error) {
        value = {};
        error = 0.0;
        auto copy = heap;
        while (!copy.empty()) {
            const auto& s = copy.top();
            for (std::size_t n = 0; n < N; ++n) value[n] += s.value[n];
            error += s.error;
            copy.pop();
        }
    };
    // Running sums avoid re-summing the heap on every step; they are
    // recomputed exactly at the end.
    Values<N> value{};
    double error = 0.0;
    totals(value, error);
    int count = m;
    while (true) {
        const double tol = std::max(opt.abs_tol, opt.rel_tol * std::abs(value[0]));
        if (error <= tol) {
            r.converged = true;
            break;
        }
        if (count >= opt.max_intervals) break;
        const detail::Segment<N> worst = heap.top();
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        if (!(mid > worst.a && mid < worst.b)) {
            heap.push(worst);
            break;  // cannot split further at double precision
        }
        const auto left = detail::gk15<N>(f, worst.a, mid, r.evaluations);
        const auto right = detail::gk15<N>(f, mid, worst.b, r.evaluations);
        for (std::size_t n = 0; n < N; ++n)
            value[n] += left.value[n] + right.value[n] - worst.value[n];
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        ++count;
    }
    totals(r.value, r.error);
    r.intervals = count;
    return r;
}

/// Scalar convenience overload.
template <typename F>
Result<1> integrate_scalar(F&& f, double a, double b, const Options& opt = {},
                           int initial_splits = 1) {
    auto g = [&f](double x) { return Values<1>{f(x)}; };
    return integrate<1>(g, a, b, opt, initial_splits);
}

}  // namespace lc::quad
