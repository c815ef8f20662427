#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>

#include "nonlocal/errors.hpp"
#include "nonlocal/laplace.hpp"
#include "nonlocal/mittag_leffler.hpp"
#include "nonlocal/quadrature.hpp"
#include "nonlocal/space_kernel.hpp"
#include "nonlocal/time_kernel.hpp"

namespace nonlocal {

enum class RelaxationMethod { Auto, ClosedForm, Inverted };

struct RelaxationOptions {
    RelaxationMethod method = RelaxationMethod::Auto;
    bool cross_check = false;     // evaluate both routes and compare
    double cross_check_tol = 1e-5;
    double max_tempering = 30.0;  // largest b t accepted by the tempered series
};

namespace detail {

inline LaplaceImage relaxation_image(const TimeKernel& k, double lambda) {
    LaplaceImage img;
    if (k.has_complex_transform())
        img.complex_fn = [k, lambda](std::complex<double> s) {
            const auto g = k.laplace(s);
            return g / (s * g + lambda);
        };
    img.real_fn = [k, lambda](double s) {
        const double g = k.laplace(s);
        return g / (s * g + lambda);
    };
    return img;
}

/// Ray angle for the subordination image: halfway between pi/2 and the edge
/// pi/(2 alpha) of the sector where Re(s g(s)) > 0.
inline double sector_angle(const TimeKernel& k) {
    double alpha = 0.5;
    if (auto* c = std::get_if<TimeKernel::Caputo>(&k.variant())) alpha = c->alpha;
    if (auto* c = std::get_if<TimeKernel::Tempered>(&k.variant())) alpha = c->alpha;
    if (auto* c = std::get_if<TimeKernel::MultiTerm>(&k.variant())) alpha = c->orders.front();
    const double edge = std::min(std::numbers::pi, std::numbers::pi / (2.0 * alpha));
    return 0.5 * (0.5 * std::numbers::pi + edge);
}

inline double invert(const TimeKernel& k, const LaplaceImage& img, double t) {
    return laplace_invert(img, t, k.has_complex_transform() ? InversionMethod::Talbot
                                                           : InversionMethod::GaverStehfest);
}

/// e^{-bt} sum_j (bt)^j / j! E^{(j)}_{alpha,1+j-j alpha}(-lambda t^alpha)
inline double tempered_series(double alpha, double b, double lambda, double t, double max_bt) {
    const double bt = b * t;
    if (bt > max_bt) {
        std::ostringstream os;
        os << "tempered relaxation series used outside b*t <= " << max_bt << " (b*t=" << bt << ")";
        throw DomainError(os.str());
    }
    const double z = -lambda * std::pow(t, alpha);
    double sum = 0.0;
    double w = std::exp(-bt); // Poisson weight
    for (int j = 0; j <= kMaxDerivativeOrder; ++j) {
        if (j > 0) w *= bt / j;
        sum += w * ml_derivative(alpha, 1.0 + j - j * alpha, j, z);
        // Every derivative term lies in (0, 1], so the Poisson tail bounds the remainder.
        const double r = bt / (j + 2.0);
        if (r < 1.0 && w * r / (1.0 - r) < 1e-12 * sum) return sum;
        if (w == 0.0 && j > bt) return sum;
    }
    throw TruncationError("tempered relaxation series did not converge", sum);
}

/// Tempered relaxation for large b t: residue at the real pole s0 in (-b, 0)
/// plus the branch cut on (-inf, -b]. Both parts are positive, so unlike a
/// contour inversion this keeps relative accuracy as Z decays.
inline double tempered_spectral(double alpha, double b, double lambda, double t) {
    const double p = 1.0 - alpha;
    auto f = [&](double s) { return s + lambda * std::pow(s + b, p); };
    boost::uintmax_t iters = 200;
    const auto root = boost::math::tools::toms748_solve(f, -b, 0.0, boost::math::tools::eps_tolerance<double>(52), iters);
    const double s0 = 0.5 * (root.first + root.second);
    const double residue = 1.0 / (1.0 + lambda * p * std::pow(s0 + b, -alpha));
    const double sn = std::sin(std::numbers::pi * p), cs = std::cos(std::numbers::pi * p);
    auto cut = [&](double v) { // cut offset r = v / t
        if (v == 0.0) return 0.0;
        const double r = v / t, q = lambda * std::pow(r, p);
        const double re = -b - r + q * cs, im = q * sn;
        return std::exp(-v) * im / (re * re + im * im) / t;
    };
    const auto c = integrate_to_infinity(cut, 0.0, 1e-14);
    return residue * std::exp(s0 * t) + std::exp(-b * t) * c.value / std::numbers::pi;
}

} // namespace detail

/// Multi-term relaxation through the multivariate Mittag-Leffler function:
/// Z = 1 - (lambda/a_1) t^{alpha_1} E_{(alpha_1-alpha_2,...,alpha_1-alpha_m, alpha_1), 1+alpha_1}(...).
inline double relaxation_z_multivariate(const TimeKernel::MultiTerm& k, double lambda, double t,
                                        double max_cancellation = 1e12) {
    const auto& a = k.coefficients;
    const auto& o = k.orders;
    const std::size_t m = o.size();
    MultiMLParams p;
    p.b = 1.0 + o[0];
    for (std::size_t i = 1; i < m; ++i) {
        p.exponents.push_back(o[0] - o[i]);
        p.arguments.push_back(-a[i] / a[0] * std::pow(t, o[0] - o[i]));
    }
    p.exponents.push_back(o[0]);
    p.arguments.push_back(-lambda / a[0] * std::pow(t, o[0]));
    return 1.0 - lambda / a[0] * std::pow(t, o[0]) * ml_multivariate(p, 400, max_cancellation);
}

/// Sum of |arguments| of the multivariate route; the series is used up to 20.
inline double multivariate_argument_size(const TimeKernel::MultiTerm& k, double lambda, double t) {
    double s = lambda / k.coefficients[0] * std::pow(t, k.orders[0]);
    for (std::size_t i = 1; i < k.orders.size(); ++i)
        s += k.coefficients[i] / k.coefficients[0] * std::pow(t, k.orders[0] - k.orders[i]);
    return s;
}

/// Z(t, lambda): D_(g) Z = -lambda Z, Z(0) = 1.
inline double relaxation_z(const TimeKernel& kernel, double lambda, double t,
                           const RelaxationOptions& opt = {}) {
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("relaxation_z: lambda must be >= 0");
    if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("relaxation_z: t must be >= 0");
    if (t == 0.0 || lambda == 0.0) return 1.0;

    std::optional<double> closed;
    const bool want_closed = opt.method != RelaxationMethod::Inverted;
    if (want_closed || opt.cross_check) {
        double alpha;
        if (kernel.is_pure_caputo(&alpha)) {
            closed = ml(alpha, 1.0, -lambda * std::pow(t, alpha));
        } else if (auto* tk = std::get_if<TimeKernel::Tempered>(&kernel.variant())) {
            if (tk->rate * t <= opt.max_tempering || opt.method == RelaxationMethod::ClosedForm)
                closed = detail::tempered_series(tk->alpha, tk->rate, lambda, t, opt.max_tempering);
            else if (tk->alpha < 1.0)
                closed = detail::tempered_spectral(tk->alpha, tk->rate, lambda, t);
        } else if (auto* mk = std::get_if<TimeKernel::MultiTerm>(&kernel.variant())) {
            if (opt.method == RelaxationMethod::ClosedForm) {
                closed = relaxation_z_multivariate(*mk, lambda, t);
            } else if (multivariate_argument_size(*mk, lambda, t) <= 20.0) {
                // Auto: drop to inversion when the alternating series cancels badly.
                try {
                    closed = relaxation_z_multivariate(*mk, lambda, t, 1e5);
                } catch (const TruncationError&) {
                }
            }
        }
        if (!closed && opt.method == RelaxationMethod::ClosedForm)
            throw DomainError("relaxation_z: no closed form for " + kernel.describe());
    }

    std::optional<double> inverted;
    if (!want_closed || !closed || opt.cross_check)
        inverted = detail::invert(kernel, detail::relaxation_image(kernel, lambda), t);

    if (opt.cross_check && closed && inverted &&
        std::abs(*closed - *inverted) > opt.cross_check_tol) {
        std::ostringstream os;
        os << "relaxation_z: closed form " << *closed << " and inversion " << *inverted
           << " disagree at t=" << t << ", lambda=" << lambda;
        throw CrossCheckError(os.str(), *closed, *inverted);
    }
    if (want_closed && closed) return *closed;
    return *inverted;
}

/// Samples of Z(., lambda) with their complete-monotonicity diagnostics.
struct RelaxationCurve {
    double lambda = 0.0;
    std::vector<double> times;
    std::vector<double> values;
    std::string method;

    /// min over i of (-1)^m m! t_i^m Z[t_i..t_{i+m}] for m = 1..max_order; each
    /// entry must be >= -slack for a completely monotone curve.
    [[nodiscard]] std::vector<double> monotonicity_margins(int max_order = 3) const {
        std::vector<double> out;
        std::vector<double> dd = values;
        double fact = 1.0;
        for (int m = 1; m <= max_order; ++m) {
            fact *= m;
            std::vector<double> next(dd.size() - 1);
            for (std::size_t i = 0; i + 1 < dd.size(); ++i)
                next[i] = (dd[i + 1] - dd[i]) / (times[i + m] - times[i]);
            dd = std::move(next);
            double worst = std::numeric_limits<double>::infinity();
            const double sign = (m % 2) ? -1.0 : 1.0;
            for (std::size_t i = 0; i < dd.size(); ++i)
                worst = std::min(worst, sign * fact * std::pow(times[i], m) * dd[i]);
            out.push_back(worst);
        }
        return out;
    }

    [[nodiscard]] bool values_in_unit_interval() const {
        for (std::size_t i = 0; i < values.size(); ++i) {
            if (!(values[i] > 0.0 && values[i] <= 1.0 + 1e-12)) return false;
            if (i > 0 && values[i] > values[i - 1] + 1e-12) return false;
        }
        return true;
    }
};

inline RelaxationCurve relaxation_curve(const TimeKernel& kernel, double lambda,
                                        std::vector<double> times, const RelaxationOptions& opt = {}) {
    if (!std::is_sorted(times.begin(), times.end())) throw DomainError("relaxation_curve: times must ascend");
    RelaxationCurve c;
    c.lambda = lambda;
    c.times = std::move(times);
    c.values.reserve(c.times.size());
    for (double t : c.times) c.values.push_back(relaxation_z(kernel, lambda, t, opt));
    c.method = opt.method == RelaxationMethod::Inverted ? "inverted" : "auto";
    return c;
}

inline std::vector<double> log_grid(double lo, double hi, int n) {
    std::vector<double> g(static_cast<std::size_t>(n));
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) g[static_cast<std::size_t>(i)] = std::exp(a + (b - a) * i / (n - 1));
    return g;
}

// ---------------------------------------------------------------------------
// Subordination density phi(t, tau) = L^{-1}[ g(s) exp(-tau s g(s)) ](t)

struct SubordinationSample {
    double value = 0.0;   // clipped at 0
    double clipped = 0.0; // magnitude removed by the clip
};

inline SubordinationSample subordination_sample(const TimeKernel& kernel, double t, double tau) {
    if (!(t > 0.0) || !(tau >= 0.0)) throw DomainError("subordination_density: need t > 0, tau >= 0");
    LaplaceImage img;
    if (kernel.has_complex_transform())
        img.complex_fn = [&kernel, tau](std::complex<double> s) {
            const auto g = kernel.laplace(s);
            return g * std::exp(-tau * s * g);
        };
    img.real_fn = [&kernel, tau](double s) {
        const double g = kernel.laplace(s);
        return g * std::exp(-tau * s * g);
    };
    double v;
    if (kernel.has_complex_transform()) {
        v = ray_inversion(img.complex_fn, t, detail::sector_angle(kernel));
    } else {
        v = laplace_invert(img, t, InversionMethod::GaverStehfest);
    }
    return v < 0.0 ? SubordinationSample{0.0, -v} : SubordinationSample{v, 0.0};
}

inline double subordination_density(const TimeKernel& kernel, double t, double tau) {
    return subordination_sample(kernel, t, tau).value;
}

struct SubordinationNormalization {
    double integral = 0.0;
    double clip_mass = 0.0; // integral of the removed negative part
    double tau_max = 0.0;
    double peak = 0.0;
};

/// int_0^{T} phi(t, tau) d tau with T doubled until phi(T) < 1e-12 peak.
inline SubordinationNormalization subordination_normalization(const TimeKernel& kernel, double t,
                                                              double deficit_tol = 1e-2) {
    SubordinationNormalization out;
    double T = 1.0;
    auto scan_peak = [&](double hi) {
        for (int i = 0; i <= 16; ++i)
            out.peak = std::max(out.peak, subordination_density(kernel, t, hi * i / 16.0));
    };
    scan_peak(T);
    for (int it = 0; it < 60; ++it) {
        const double tail = subordination_density(kernel, t, T);
        if (tail < 1e-12 * out.peak) break;
        T *= 2.0;
        scan_peak(T);
    }
    out.tau_max = T;
    // Fixed 31-point Kronrod panels: phi is smooth in tau and each sample is
    // itself a contour integral, so adaptivity costs more than it gains.
    double clip = 0.0;
    const int panels = 24;
    for (int i = 0; i < panels; ++i) {
        const double a = T * i / panels, b = T * (i + 1) / panels;
        double vi = 0.0, ci = 0.0;
        const auto& x = boost::math::quadrature::gauss_kronrod<double, 31>::abscissa();
        const auto& w = boost::math::quadrature::gauss_kronrod<double, 31>::weights();
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (std::size_t j = 0; j < x.size(); ++j) {
            const double wt = w[j];
            auto p = subordination_sample(kernel, t, c + h * x[j]);
            vi += wt * p.value;
            ci += wt * p.clipped;
            if (j > 0) {
                auto q = subordination_sample(kernel, t, c - h * x[j]);
                vi += wt * q.value;
                ci += wt * q.clipped;
            }
        }
        out.integral += h * vi;
        clip += h * ci;
    }
    out.clip_mass = clip;
    if (std::abs(out.integral - 1.0) > deficit_tol) {
        std::ostringstream os;
        os << "subordination density normalization " << out.integral << " at t=" << t;
        throw NormalizationError(os.str(), out.integral);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Mean squared displacement

/// Analytic MSD, or nullopt when the jump second moment diverges.
inline std::optional<double> msd(const TimeKernel& time_kernel, const SpaceKernel& space_kernel, double t) {
    if (!(t >= 0.0)) throw DomainError("msd: t must be >= 0");
    const auto z2 = space_kernel.symbol_second_derivative_at_zero();
    if (!z2) return std::nullopt;
    if (t == 0.0) return 0.0;
    double alpha;
    if (time_kernel.is_pure_caputo(&alpha)) return *z2 * std::pow(t, alpha) / std::tgamma(1.0 + alpha);
    LaplaceImage img;
    const double c = *z2;
    if (time_kernel.has_complex_transform())
        img.complex_fn = [&time_kernel, c](std::complex<double> s) { return c / (s * s * time_kernel.laplace(s)); };
    img.real_fn = [&time_kernel, c](double s) { return c / (s * s * time_kernel.laplace(s)); };
    return detail::invert(time_kernel, img, t);
}

} // namespace nonlocal
