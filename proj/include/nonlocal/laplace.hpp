#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <sstream>

#include "nonlocal/errors.hpp"
#include "nonlocal/quadrature.hpp"

namespace nonlocal {

enum class InversionMethod { Talbot, GaverStehfest };

/// Laplace image h(s). Talbot needs the complex form; Gaver-Stehfest only
/// samples the positive axis and falls back to Re h(s + 0i) if no real form is given.
struct LaplaceImage {
    std::function<std::complex<double>(std::complex<double>)> complex_fn;
    std::function<double(double)> real_fn;

    [[nodiscard]] double real(double s) const {
        if (real_fn) return real_fn(s);
        return complex_fn(std::complex<double>(s, 0.0)).real();
    }
};

/// Fixed Talbot contour (Abate and Valko), M nodes. If `largest` is given it
/// receives the largest scaled summand, a proxy for round-off in the result.
template <class F>
double talbot(F&& h, double t, int M = 32, double* largest = nullptr) {
    using cd = std::complex<double>;
    const double r = 2.0 * M / (5.0 * t);
    double acc = 0.5 * std::real(h(cd(r, 0.0))) * std::exp(r * t);
    double big = std::abs(acc);
    for (int k = 1; k < M; ++k) {
        const double th = k * std::numbers::pi / M;
        const double cot = 1.0 / std::tan(th);
        const cd s = r * th * cd(cot, 1.0);
        const double sigma = th + (th * cot - 1.0) * cot;
        const double term = std::real(std::exp(t * s) * h(s) * cd(1.0, sigma));
        acc += term;
        big = std::max(big, std::abs(term));
    }
    if (largest) *largest = r / M * big;
    return r / M * acc;
}

namespace detail {

template <int N>
std::array<double, N + 1> stehfest_weights() {
    static_assert(N % 2 == 0);
    std::array<double, N + 1> v{};
    constexpr int half = N / 2;
    auto fact = [](int n) { return std::tgamma(n + 1.0); };
    for (int k = 1; k <= N; ++k) {
        double s = 0.0;
        for (int j = (k + 1) / 2; j <= std::min(k, half); ++j)
            s += std::pow(j, half) * fact(2 * j) /
                 (fact(half - j) * fact(j) * fact(j - 1) * fact(k - j) * fact(2 * j - k));
        v[static_cast<std::size_t>(k)] = ((k + half) % 2 == 0 ? 1.0 : -1.0) * s;
    }
    return v;
}

} // namespace detail

/// Gaver-Stehfest with 14 terms; real positive nodes only.
template <class F>
double gaver_stehfest(F&& h, double t) {
    static const auto V = detail::stehfest_weights<14>();
    const double a = std::numbers::ln2 / t;
    double acc = 0.0;
    for (int k = 1; k <= 14; ++k) acc += V[static_cast<std::size_t>(k)] * h(k * a);
    return a * acc;
}

/// Hyperbolic contour of Weideman and Trefethen, N nodes on the upper half.
/// Suited to images analytic off the negative real axis that decay like a
/// power of s; used for Mittag-Leffler type images at large |z|.
template <class F>
double hyperbolic_inversion(F&& h, double t, int N) {
    using cd = std::complex<double>;
    const double delta = 1.1721, step = 1.0818 / N, mu = 4.4921 * N / t;
    cd acc = 0.0;
    for (int k = 0; k <= N; ++k) {
        const cd w(-delta, k * step); // i u - delta
        const cd s = mu * (1.0 + std::sin(w));
        const cd ds = cd(0.0, mu) * std::cos(w);
        const cd term = std::exp(s * t) * h(s) * ds;
        acc += (k == 0 ? 0.5 : 1.0) * term;
    }
    return step / std::numbers::pi * acc.imag();
}

/// Bromwich contour folded onto the rays s = rho e^{+-i angle}, angle in (pi/2, pi).
/// Valid when h is analytic off the negative axis and decays inside the
/// sector; the image exp(-tau s g(s)) of the subordination density decays
/// only for |arg s| < pi/(2 alpha), which excludes Talbot's contour.
template <class F>
double ray_inversion(F&& h, double t, double angle, double tol = 1e-12) {
    const std::complex<double> e = std::polar(1.0, angle);
    auto f = [&](double rho) {
        if (rho == 0.0) return 0.0;
        const std::complex<double> s = rho * e;
        return std::imag(std::exp(s * t) * h(s) * e);
    };
    return detail::integrate_to_infinity(f, 0.0, tol).value / std::numbers::pi;
}

inline double laplace_invert(const LaplaceImage& image, double t,
                             InversionMethod method = InversionMethod::Talbot) {
    if (!(t > 0.0)) throw DomainError("laplace_invert: t must be positive");
    if (method == InversionMethod::Talbot) {
        if (!image.complex_fn) throw DomainError("Talbot inversion needs the complex image");
        return talbot(image.complex_fn, t);
    }
    return gaver_stehfest([&image](double s) { return image.real(s); }, t);
}

/// Both methods; throws CrossCheckError above `rel_tol` relative disagreement.
/// Returns the Talbot value.
inline double laplace_invert_checked(const LaplaceImage& image, double t, double rel_tol = 1e-4) {
    const double a = laplace_invert(image, t, InversionMethod::Talbot);
    const double b = laplace_invert(image, t, InversionMethod::GaverStehfest);
    const double scale = std::max(std::abs(a), std::abs(b));
    if (std::abs(a - b) > rel_tol * scale) {
        std::ostringstream os;
        os << "Talbot (" << a << ") and Gaver-Stehfest (" << b << ") disagree at t=" << t;
        throw CrossCheckError(os.str(), a, b);
    }
    return a;
}

} // namespace nonlocal
