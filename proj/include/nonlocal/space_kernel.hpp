#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/special_functions/expint.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include "nonlocal/errors.hpp"
#include "nonlocal/quadrature.hpp"
#include "nonlocal/time_kernel.hpp"

namespace nonlocal {

/// Coefficient kappa with k(y) = kappa |y|^{-1-2 beta} having symbol |xi|^{2 beta}.
/// Equals half of 4^beta Gamma(1/2+beta) / (sqrt(pi) |Gamma(-beta)|).
inline double riesz_normalization(double beta) {
    const double c = std::pow(4.0, beta) * std::tgamma(0.5 + beta) /
                     (std::sqrt(std::numbers::pi) * std::abs(std::tgamma(-beta)));
    return 0.5 * c;
}

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_floor = 1e-14;
    int tail_terms = 28; // half periods fed to the alternating-series accelerator
};

/// Symmetric jump-intensity kernel k of the general Laplacian, n = 1.
class SpaceKernel {
public:
    struct Riesz {
        double beta;
    };
    struct MultiTerm {
        std::vector<double> coefficients;
        std::vector<double> orders;
    };
    struct Tempered {
        double q;
        double beta;
        double h;
    };
    struct Custom {
        std::function<double(double)> density; // called with y > 0
        bool finite_second_moment = false;
        std::string label = "custom";
    };
    using Variant = std::variant<Riesz, MultiTerm, Tempered, Custom>;

    static SpaceKernel riesz(double beta) {
        detail::require_order(beta, "beta");
        return SpaceKernel(Riesz{beta});
    }
    static SpaceKernel multi_term(std::vector<double> b, std::vector<double> orders) {
        detail::require_weights(b, orders, "multi-term space kernel");
        return SpaceKernel(MultiTerm{std::move(b), std::move(orders)});
    }
    static SpaceKernel tempered(double q, double beta, double h) {
        detail::require_order(beta, "beta");
        if (!(q > 0.0) || !std::isfinite(q)) throw DomainError("amplitude q must be positive");
        if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("tempering rate h must be positive");
        return SpaceKernel(Tempered{q, beta, h});
    }
    static SpaceKernel custom(std::function<double(double)> k, bool finite_second_moment,
                              std::string label = "custom") {
        if (!k) throw DomainError("custom space kernel needs a density");
        return SpaceKernel(Custom{std::move(k), finite_second_moment, std::move(label)});
    }

    [[nodiscard]] const Variant& variant() const noexcept { return v_; }

    /// k(y), y != 0.
    [[nodiscard]] double density(double y) const {
        const double a = std::abs(y);
        return std::visit(
            [a](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Riesz>) {
                    return riesz_normalization(k.beta) * std::pow(a, -1.0 - 2.0 * k.beta);
                } else if constexpr (std::is_same_v<K, MultiTerm>) {
                    double s = 0.0;
                    for (std::size_t i = 0; i < k.orders.size(); ++i)
                        s += k.coefficients[i] * riesz_normalization(k.orders[i]) *
                             std::pow(a, -1.0 - 2.0 * k.orders[i]);
                    return s;
                } else if constexpr (std::is_same_v<K, Tempered>) {
                    return k.q * std::pow(a, -1.0 - 2.0 * k.beta) * std::exp(-k.h * a);
                } else {
                    return k.density(a);
                }
            },
            v_);
    }

    /// zeta(xi). Closed form for (multi-term) Riesz, quadrature otherwise.
    [[nodiscard]] double symbol(double xi) const {
        const double a = std::abs(xi);
        if (a == 0.0) return 0.0;
        if (auto* r = std::get_if<Riesz>(&v_)) return std::pow(a, 2.0 * r->beta);
        if (auto* m = std::get_if<MultiTerm>(&v_)) {
            double s = 0.0;
            for (std::size_t i = 0; i < m->orders.size(); ++i)
                s += m->coefficients[i] * std::pow(a, 2.0 * m->orders[i]);
            return s;
        }
        return symbol_by_quadrature(a);
    }

    /// zeta(xi) = 4 int_0^inf 2 sin^2(xi y / 2) k(y) dy, for any variant.
    [[nodiscard]] double symbol_by_quadrature(double xi, const QuadratureOptions& opt = {}) const {
        using std::numbers::pi;
        const double a = std::abs(xi);
        if (a == 0.0) return 0.0;
        auto f = [this, a](double y) {
            if (y < 1e-90) return 0.0;
            const double s = std::sin(0.5 * a * y);
            return 2.0 * s * s * density(y);
        };
        double value = 0.0, err = 0.0;

        // Singular part near the origin; 2 sin^2 keeps full relative accuracy
        // where 1 - cos would cancel.
        const double y0 = 1.0 / (1.0 + a);
        auto ra = detail::integrate_singular(f, 0.0, y0, 1e-13);
        value += ra.value;
        err += ra.error;

        // Up to the next zero of cos(xi y), in panels no wider than a quarter period.
        const double period = pi / a;
        const double m = std::ceil(y0 / period - 0.5);
        const double y1 = (m + 0.5) * period;
        const int panels = std::max(1, static_cast<int>(std::ceil((y1 - y0) / (0.25 * period))));
        const double w = (y1 - y0) / panels;
        for (int i = 0; i < panels; ++i) {
            auto rb = detail::integrate_smooth(f, y0 + i * w, y0 + (i + 1) * w, 1e-12);
            value += rb.value;
            err += rb.error;
        }

        // Oscillatory tail: int k - int cos(xi y) k, the latter as an
        // accelerated alternating series over half periods.
        const double tail = tail_integral(y1);
        if (tail > 1e-18 * std::abs(value)) {
            std::vector<double> terms(static_cast<std::size_t>(opt.tail_terms));
            auto g = [this, a](double y) { return std::cos(a * y) * density(y); };
            for (int n = 0; n < opt.tail_terms; ++n) {
                auto rc = detail::integrate_smooth(g, y1 + n * period, y1 + (n + 1) * period, 1e-12);
                terms[static_cast<std::size_t>(n)] = (n % 2 == 0 ? 1.0 : -1.0) * rc.value;
                err += rc.error;
            }
            value += tail - detail::alternating_sum(terms);
        }

        value *= 4.0;
        err *= 4.0;
        // Kronrod error estimates run several orders above the true error, so
        // only a gross miss counts as non-convergence.
        if (!std::isfinite(value) || err > 1e4 * std::max(opt.rel_tol * std::abs(value), opt.abs_floor)) {
            std::ostringstream os;
            os << "symbol quadrature did not converge at xi=" << xi << " (estimate " << value
               << ", error " << err << ")";
            throw QuadratureError(os.str(), value);
        }
        return value;
    }

    /// int_Y^inf k(y) dy for Y > 0.
    [[nodiscard]] double tail_integral(double Y) const {
        if (!(Y > 0.0)) throw DomainError("tail_integral: Y must be positive");
        if (auto* r = std::get_if<Riesz>(&v_))
            return riesz_normalization(r->beta) * std::pow(Y, -2.0 * r->beta) / (2.0 * r->beta);
        if (auto* m = std::get_if<MultiTerm>(&v_)) {
            double s = 0.0;
            for (std::size_t i = 0; i < m->orders.size(); ++i)
                s += m->coefficients[i] * riesz_normalization(m->orders[i]) *
                     std::pow(Y, -2.0 * m->orders[i]) / (2.0 * m->orders[i]);
            return s;
        }
        if (auto* t = std::get_if<Tempered>(&v_)) {
            const double x = t->h * Y;
            if (x > 700.0) return 0.0;
            if (x < 25.0) return t->q * std::pow(t->h, 2.0 * t->beta) * upper_gamma_negative(-2.0 * t->beta, x);
        }
        auto r = detail::integrate_to_infinity([this](double y) { return density(y); }, Y);
        return r.value;
    }

    /// int_0^d y^2 k(y) dy.
    [[nodiscard]] double near_second_moment(double d) const {
        if (!(d > 0.0)) return 0.0;
        if (auto* r = std::get_if<Riesz>(&v_))
            return riesz_normalization(r->beta) * std::pow(d, 2.0 - 2.0 * r->beta) / (2.0 - 2.0 * r->beta);
        if (auto* m = std::get_if<MultiTerm>(&v_)) {
            double s = 0.0;
            for (std::size_t i = 0; i < m->orders.size(); ++i)
                s += m->coefficients[i] * riesz_normalization(m->orders[i]) *
                     std::pow(d, 2.0 - 2.0 * m->orders[i]) / (2.0 - 2.0 * m->orders[i]);
            return s;
        }
        if (auto* t = std::get_if<Tempered>(&v_)) {
            const double a = 2.0 - 2.0 * t->beta;
            return t->q * std::pow(t->h, -a) * boost::math::tgamma_lower(a, t->h * d);
        }
        auto r = detail::integrate_singular(
            [this](double y) { return y < 1e-90 ? 0.0 : y * y * density(y); }, 0.0, d);
        return r.value;
    }

    /// zeta''(0) = 2 int y^2 k(y) dy, or nullopt when it diverges.
    [[nodiscard]] std::optional<double> symbol_second_derivative_at_zero() const {
        if (std::holds_alternative<Riesz>(v_) || std::holds_alternative<MultiTerm>(v_))
            return std::nullopt;
        if (auto* t = std::get_if<Tempered>(&v_))
            return 4.0 * t->q * std::tgamma(2.0 - 2.0 * t->beta) / std::pow(t->h, 2.0 - 2.0 * t->beta);
        const auto& c = std::get<Custom>(v_);
        if (!c.finite_second_moment) return std::nullopt;
        auto f = [this](double y) { return y < 1e-90 ? 0.0 : y * y * density(y); };
        const double inner = detail::integrate_singular(f, 0.0, 1.0).value;
        const double outer = detail::integrate_to_infinity(f, 1.0).value;
        const double v = 4.0 * (inner + outer);
        if (!std::isfinite(v)) return std::nullopt;
        return v;
    }

    /// Closed-form symbol available (no quadrature per xi).
    [[nodiscard]] bool has_closed_form_symbol() const {
        return std::holds_alternative<Riesz>(v_) || std::holds_alternative<MultiTerm>(v_);
    }

    [[nodiscard]] std::string describe() const {
        std::ostringstream os;
        os.precision(15);
        std::visit(
            [&os](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Riesz>) {
                    os << "riesz(beta=" << k.beta << ")";
                } else if constexpr (std::is_same_v<K, MultiTerm>) {
                    os << "multi_term_riesz(";
                    for (std::size_t i = 0; i < k.orders.size(); ++i)
                        os << (i ? ";" : "") << k.coefficients[i] << "*" << k.orders[i];
                    os << ")";
                } else if constexpr (std::is_same_v<K, Tempered>) {
                    os << "tempered_riesz(q=" << k.q << ",beta=" << k.beta << ",h=" << k.h << ")";
                } else {
                    os << "custom(" << k.label << ")";
                }
            },
            v_);
        return os.str();
    }

private:
    explicit SpaceKernel(Variant v) : v_(std::move(v)) {}

    // Gamma(a, x) for -1 < a < 0 via Gamma(a+1,x) = a Gamma(a,x) + x^a e^{-x};
    // a = -1 (beta = 1/2) is the exponential integral E_1.
    static double upper_gamma_negative(double a, double x) {
        if (std::abs(a + 1.0) < 1e-14) return std::exp(-x) / x - boost::math::expint(1, x);
        if (a > -1.0) return (boost::math::tgamma(a + 1.0, x) - std::pow(x, a) * std::exp(-x)) / a;
        // -2 < a < -1: step twice.
        const double g1 = (boost::math::tgamma(a + 2.0, x) - std::pow(x, a + 1.0) * std::exp(-x)) / (a + 1.0);
        return (g1 - std::pow(x, a) * std::exp(-x)) / a;
    }

    Variant v_;
};

inline double zeta(const SpaceKernel& k, double xi) { return k.symbol(xi); }

inline std::optional<double> zeta_second_derivative_at_zero(const SpaceKernel& k) {
    return k.symbol_second_derivative_at_zero();
}

} // namespace nonlocal
