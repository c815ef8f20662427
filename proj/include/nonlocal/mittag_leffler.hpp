#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <vector>

#include "nonlocal/errors.hpp"
#include "nonlocal/laplace.hpp"

namespace nonlocal {

inline constexpr int kMaxDerivativeOrder = 128;

struct MultiMLParams {
    std::vector<double> exponents; // a_i > 0
    double b = 1.0;                // b_ml > 0
    std::vector<double> arguments; // z_i
};

namespace detail {

struct SeriesSum {
    double value = 0.0;
    double max_term = 0.0; // largest |term|; max_term/|value| measures cancellation
    bool converged = false;
    int terms = 0;
};

/// sum_k (k+j)!/k! z^k / Gamma(alpha (k+j) + beta)
inline SeriesSum ml_series(double alpha, double beta, int j, double z, int kmax = 300) {
    SeriesSum r;
    const double lz = std::log(std::abs(z));
    double prev = std::numeric_limits<double>::infinity();
    for (int k = 0; k < kmax; ++k) {
        const double x = alpha * (k + j) + beta;
        double term;
        if (x < 170.0 && k < 600) {
            // Direct form; the log form loses digits in proportion to lgamma's size.
            double rising = 1.0;
            for (int i = 1; i <= j; ++i) rising *= (k + i);
            term = rising / std::tgamma(x) * std::pow(std::abs(z), k);
        } else {
            const double lc = std::lgamma(k + j + 1.0) - std::lgamma(k + 1.0) - std::lgamma(x);
            term = std::exp(lc + k * lz);
        }
        if (z < 0.0 && (k % 2)) term = -term;
        r.value += term;
        r.max_term = std::max(r.max_term, std::abs(term));
        r.terms = k + 1;
        if (!std::isfinite(r.value)) return r;
        if (k > 0 && std::abs(term) < 1e-16 * std::abs(r.value) && std::abs(term) < prev) {
            r.converged = true;
            return r;
        }
        prev = std::abs(term);
    }
    return r;
}

/// Same quantity for z < 0 by inverting j! s^{alpha-beta} / (s^alpha - z)^{j+1} at t = 1.
inline double ml_contour(double alpha, double beta, int j, double z) {
    using cd = std::complex<double>;
    const double lfj = std::lgamma(j + 1.0);
    auto image = [=](cd s) {
        const cd ls = std::log(s);
        return std::exp(lfj + (alpha - beta) * ls - (j + 1.0) * std::log(std::exp(alpha * ls) - z));
    };
    const int N = 16 + static_cast<int>(std::ceil(1.6 * j));
    return hyperbolic_inversion(image, 1.0, N);
}

inline void check_ml_args(double alpha, double beta, int j) {
    if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("Mittag-Leffler: alpha must lie in (0,1]");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw DomainError("Mittag-Leffler: beta must be positive");
    if (j < 0 || j > kMaxDerivativeOrder) throw DomainError("Mittag-Leffler: derivative order out of range");
}

} // namespace detail

/// j-th derivative of E_{alpha,beta} at real z.
inline double ml_derivative(double alpha, double beta, int j, double z) {
    detail::check_ml_args(alpha, beta, j);
    if (!std::isfinite(z)) throw DomainError("Mittag-Leffler: argument must be finite");
    if (z == 0.0) return std::exp(std::lgamma(j + 1.0) - std::lgamma(alpha * j + beta));
    if (alpha == 1.0 && beta == 1.0) return std::exp(z);

    if (z > 0.0) {
        // E ~ exp(z^{1/alpha}) / alpha; past ~700 the result is not representable.
        if (std::pow(z, 1.0 / alpha) > 700.0) {
            std::ostringstream os;
            os << "Mittag-Leffler overflow on the positive axis at z=" << z;
            throw OverflowError(os.str(), std::numeric_limits<double>::infinity());
        }
        auto s = detail::ml_series(alpha, beta, j, z, 20000);
        if (!s.converged || !std::isfinite(s.value)) {
            std::ostringstream os;
            os << "Mittag-Leffler series overflow at z=" << z;
            throw OverflowError(os.str(), s.value);
        }
        return s.value;
    }

    double value;
    bool done = false;
    if (-z <= 5.0) {
        // The alternating series loses log10(max_term/|sum|) digits.
        auto s = detail::ml_series(alpha, beta, j, z, 300);
        if (s.converged && s.max_term <= 1e4 * std::abs(s.value)) {
            value = s.value;
            done = true;
        }
    }
    if (!done) value = detail::ml_contour(alpha, beta, j, z);

    // For beta = 1 + j - j alpha the modulus is maximal at the origin.
    if (std::abs(beta - (1.0 + j - j * alpha)) < 1e-14) {
        const double bound = std::exp(std::lgamma(j + 1.0) - std::lgamma(alpha * j + beta));
        if (std::abs(value) > bound * (1.0 + 1e-9)) {
            std::ostringstream os;
            os << "Mittag-Leffler derivative exceeds its bound at z=" << z << " (j=" << j << ")";
            throw NumericalError(os.str(), value);
        }
    }
    return value;
}

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z), real z.
inline double ml(double alpha, double beta, double z) { return ml_derivative(alpha, beta, 0, z); }

/// sum_k sum_{|l|=k} (k; l) prod z_i^{l_i} / Gamma(b + sum a_i l_i), by degree shells.
inline double ml_multivariate(const MultiMLParams& p, int max_shells = 400,
                              double max_cancellation = 1e12) {
    const std::size_t m = p.exponents.size();
    if (m == 0 || m > 8 || p.arguments.size() != m)
        throw DomainError("ml_multivariate: need 1..8 exponents and matching arguments");
    for (double a : p.exponents)
        if (!(a > 0.0)) throw DomainError("ml_multivariate: exponents must be positive");
    if (!(p.b > 0.0)) throw DomainError("ml_multivariate: b must be positive");
    if (max_shells < 1 || max_shells > 400) throw DomainError("ml_multivariate: shell budget must be in [1,400]");

    std::vector<double> lz(m);
    std::vector<int> sz(m);
    for (std::size_t i = 0; i < m; ++i) {
        const double z = p.arguments[i];
        lz[i] = z == 0.0 ? -std::numeric_limits<double>::infinity() : std::log(std::abs(z));
        sz[i] = z < 0.0 ? -1 : 1;
    }

    double sum = 1.0 / std::tgamma(p.b);
    if (!std::isfinite(sum)) sum = std::exp(-std::lgamma(p.b));
    double max_term = std::abs(sum);
    int quiet = 0;
    std::vector<int> l(m);
    const double term_budget = 5e7;
    double enumerated = 0.0;

    for (int k = 1; k <= max_shells; ++k) {
        const double lk = std::lgamma(k + 1.0);
        double shell = 0.0, shell_max = 0.0;
        // Compositions of k into m parts, l[m-1] determined by the rest.
        std::fill(l.begin(), l.end(), 0);
        l[m - 1] = k;
        while (true) {
            double lt = lk, expo = p.b;
            int sign = 1;
            bool zero = false;
            for (std::size_t i = 0; i < m; ++i) {
                if (l[i] == 0) continue;
                if (p.arguments[i] == 0.0) {
                    zero = true;
                    break;
                }
                lt += l[i] * lz[i] - std::lgamma(l[i] + 1.0);
                expo += p.exponents[i] * l[i];
                if (sz[i] < 0 && (l[i] % 2)) sign = -sign;
            }
            if (!zero) {
                const double term = sign * std::exp(lt - std::lgamma(expo));
                shell += term;
                shell_max = std::max(shell_max, std::abs(term));
            }
            if (++enumerated > term_budget)
                throw TruncationError("ml_multivariate: term budget exhausted", sum + shell);
            if (m == 1) break;
            // next composition: odometer over l[0..m-2] with sum <= k
            std::size_t i = 0;
            for (; i + 1 < m; ++i) {
                int rest = 0;
                for (std::size_t q = 0; q + 1 < m; ++q) rest += l[q];
                if (rest < k) {
                    ++l[i];
                    break;
                }
                l[i] = 0;
            }
            if (i + 1 == m) break;
            int used = 0;
            for (std::size_t q = 0; q + 1 < m; ++q) used += l[q];
            l[m - 1] = k - used;
        }
        sum += shell;
        max_term = std::max(max_term, shell_max);
        if (!std::isfinite(sum)) throw TruncationError("ml_multivariate: series overflow", sum);
        if (shell_max < 1e-15 * std::abs(sum)) {
            if (++quiet >= 2) {
                if (max_term > max_cancellation * std::abs(sum))
                    throw TruncationError("ml_multivariate: cancellation destroys precision", sum);
                return sum;
            }
        } else {
            quiet = 0;
        }
    }
    throw TruncationError("ml_multivariate: no convergence within shell budget", sum);
}

} // namespace nonlocal
