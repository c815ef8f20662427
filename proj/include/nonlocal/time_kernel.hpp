#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "nonlocal/errors.hpp"

namespace nonlocal {

namespace detail {

inline void require_order(double v, const char* name) {
    if (!(v > 0.0 && v < 1.0)) {
        std::ostringstream os;
        os << name << " must lie in (0,1), got " << v;
        throw DomainError(os.str());
    }
}

inline void require_weights(const std::vector<double>& c, const std::vector<double>& o,
                            const char* what) {
    if (c.empty() || c.size() != o.size())
        throw DomainError(std::string(what) + ": coefficient/order lists must be nonempty and equal length");
    for (double a : c)
        if (!(a > 0.0)) throw DomainError(std::string(what) + ": coefficients must be positive");
    for (std::size_t i = 0; i < o.size(); ++i) {
        require_order(o[i], "order");
        if (i > 0 && !(o[i] < o[i - 1]))
            throw DomainError(std::string(what) + ": orders must be strictly decreasing");
    }
}

} // namespace detail

/// Memory kernel g of the generalized Caputo derivative, described by its
/// Laplace transform.
class TimeKernel {
public:
    struct Caputo {
        double alpha;
    };
    struct MultiTerm {
        std::vector<double> coefficients; // a_j > 0
        std::vector<double> orders;       // 1 > alpha_1 > ... > alpha_m > 0
    };
    struct Tempered {
        double alpha;
        double rate; // b >= 0; b == 0 is plain Caputo
    };
    struct Custom {
        std::function<double(double)> transform;
        // Needed for Talbot inversion. Without it only Gaver-Stehfest is usable.
        std::function<std::complex<double>(std::complex<double>)> complex_transform;
        std::string label = "custom";
    };
    using Variant = std::variant<Caputo, MultiTerm, Tempered, Custom>;

    static TimeKernel caputo(double alpha) {
        detail::require_order(alpha, "alpha");
        return TimeKernel(Caputo{alpha});
    }
    static TimeKernel multi_term(std::vector<double> a, std::vector<double> orders) {
        detail::require_weights(a, orders, "multi-term time kernel");
        return TimeKernel(MultiTerm{std::move(a), std::move(orders)});
    }
    static TimeKernel tempered(double alpha, double b) {
        detail::require_order(alpha, "alpha");
        if (!(b >= 0.0) || !std::isfinite(b)) throw DomainError("tempering rate b must be >= 0");
        return TimeKernel(Tempered{alpha, b});
    }
    static TimeKernel custom(std::function<double(double)> g_hat,
                             std::function<std::complex<double>(std::complex<double>)> g_hat_complex = {},
                             std::string label = "custom") {
        if (!g_hat) throw DomainError("custom time kernel needs a transform");
        return TimeKernel(Custom{std::move(g_hat), std::move(g_hat_complex), std::move(label)});
    }

    [[nodiscard]] const Variant& variant() const noexcept { return v_; }

    /// ĝ(s) for real s > 0.
    [[nodiscard]] double laplace(double s) const {
        if (!(s > 0.0)) throw DomainError("g_laplace: s must be positive");
        return std::visit(
            [s](const auto& k) -> double {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Caputo>) {
                    return std::pow(s, k.alpha - 1.0);
                } else if constexpr (std::is_same_v<K, MultiTerm>) {
                    double acc = 0.0;
                    for (std::size_t i = 0; i < k.orders.size(); ++i)
                        acc += k.coefficients[i] * std::pow(s, k.orders[i] - 1.0);
                    return acc;
                } else if constexpr (std::is_same_v<K, Tempered>) {
                    return std::pow(s + k.rate, k.alpha - 1.0);
                } else {
                    return k.transform(s);
                }
            },
            v_);
    }

    /// ĝ(s) continued to the cut plane (principal branch).
    [[nodiscard]] std::complex<double> laplace(std::complex<double> s) const {
        return std::visit(
            [s](const auto& k) -> std::complex<double> {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Caputo>) {
                    return std::pow(s, k.alpha - 1.0);
                } else if constexpr (std::is_same_v<K, MultiTerm>) {
                    std::complex<double> acc = 0.0;
                    for (std::size_t i = 0; i < k.orders.size(); ++i)
                        acc += k.coefficients[i] * std::pow(s, k.orders[i] - 1.0);
                    return acc;
                } else if constexpr (std::is_same_v<K, Tempered>) {
                    return std::pow(s + k.rate, k.alpha - 1.0);
                } else {
                    if (!k.complex_transform)
                        throw DomainError("custom time kernel '" + k.label +
                                          "' has no complex continuation");
                    return k.complex_transform(s);
                }
            },
            v_);
    }

    [[nodiscard]] bool has_complex_transform() const {
        if (auto* c = std::get_if<Custom>(&v_)) return static_cast<bool>(c->complex_transform);
        return true;
    }

    /// Caputo, or tempered with b == 0.
    [[nodiscard]] bool is_pure_caputo(double* alpha = nullptr) const {
        if (auto* c = std::get_if<Caputo>(&v_)) {
            if (alpha) *alpha = c->alpha;
            return true;
        }
        if (auto* t = std::get_if<Tempered>(&v_); t && t->rate == 0.0) {
            if (alpha) *alpha = t->alpha;
            return true;
        }
        return false;
    }

    [[nodiscard]] std::string describe() const {
        std::ostringstream os;
        os.precision(15);
        std::visit(
            [&os](const auto& k) {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, Caputo>) {
                    os << "caputo(alpha=" << k.alpha << ")";
                } else if constexpr (std::is_same_v<K, MultiTerm>) {
                    os << "multi_term(";
                    for (std::size_t i = 0; i < k.orders.size(); ++i)
                        os << (i ? ";" : "") << k.coefficients[i] << "*" << k.orders[i];
                    os << ")";
                } else if constexpr (std::is_same_v<K, Tempered>) {
                    os << "tempered(alpha=" << k.alpha << ",b=" << k.rate << ")";
                } else {
                    os << "custom(" << k.label << ")";
                }
            },
            v_);
        return os.str();
    }

private:
    explicit TimeKernel(Variant v) : v_(std::move(v)) {}
    Variant v_;
};

inline double g_laplace(const TimeKernel& kernel, double s) { return kernel.laplace(s); }

} // namespace nonlocal
