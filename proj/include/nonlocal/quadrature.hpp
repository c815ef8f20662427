#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

namespace nonlocal::detail {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
};

// Integrator objects precompute abscissae and their integrate() is not const
// in this Boost, so each thread keeps its own.
inline boost::math::quadrature::tanh_sinh<double>& tanh_sinh_rule() {
    thread_local boost::math::quadrature::tanh_sinh<double> rule(15);
    return rule;
}

inline boost::math::quadrature::exp_sinh<double>& exp_sinh_rule() {
    thread_local boost::math::quadrature::exp_sinh<double> rule(12);
    return rule;
}

/// Endpoint-singular integrals on a finite interval.
template <class F>
QuadResult integrate_singular(F&& f, double a, double b, double tol = 1e-13) {
    QuadResult r;
    double l1 = 0.0;
    r.value = tanh_sinh_rule().integrate(f, a, b, tol, &r.error, &l1);
    return r;
}

/// Smooth integrand on a finite interval: adaptive Gauss-Kronrod 31.
template <class F>
QuadResult integrate_smooth(F&& f, double a, double b, double tol = 1e-12, unsigned depth = 10) {
    QuadResult r;
    double l1 = 0.0;
    r.value = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, depth, tol,
                                                                           &r.error, &l1);
    return r;
}

/// Integral over [a, inf).
template <class F>
QuadResult integrate_to_infinity(F&& f, double a, double tol = 1e-13) {
    QuadResult r;
    double l1 = 0.0;
    std::size_t levels = 0;
    r.value = exp_sinh_rule().integrate(f, a, std::numeric_limits<double>::infinity(), tol,
                                        &r.error, &l1, &levels);
    return r;
}

/// Cohen, Rodriguez Villegas and Zagier acceleration of sum_{k>=0} (-1)^k a_k.
/// Exact for a_k that are moments of a positive measure on [0,1], which covers
/// the monotone half-period integrals it is used for.
inline double alternating_sum(const std::vector<double>& a) {
    const int n = static_cast<int>(a.size());
    if (n == 0) return 0.0;
    double d = std::pow(3.0 + std::sqrt(8.0), n);
    d = 0.5 * (d + 1.0 / d);
    double b = -1.0, c = -d, s = 0.0;
    for (int k = 0; k < n; ++k) {
        c = b - c;
        s += c * a[k];
        b = (static_cast<double>(k + n) * (k - n) * b) / ((k + 0.5) * (k + 1.0));
    }
    return s / d;
}

} // namespace nonlocal::detail
