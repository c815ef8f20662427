#pragma once

#include <cmath>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nonlocal/space_kernel.hpp"
#include "nonlocal/time_kernel.hpp"

namespace nonlocal {

struct ConditionCheck {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct ConditionReport {
    std::string kernel;
    std::vector<ConditionCheck> checks;
    std::string note =
        "numeric spot checks of necessary conditions only; Stieltjes and negative-definite "
        "structure cannot be certified by sampling";

    [[nodiscard]] bool all_passed() const {
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
    [[nodiscard]] const ConditionCheck* find(const std::string& name) const {
        for (const auto& c : checks)
            if (c.name == name) return &c;
        return nullptr;
    }
};

namespace detail {

inline void add_check(ConditionReport& r, std::string name, bool ok, std::string detail = {}) {
    r.checks.push_back({std::move(name), ok, std::move(detail)});
}

inline std::string at(double x, double v) {
    std::ostringstream os;
    os.precision(6);
    os << "at " << x << " value " << v;
    return os.str();
}

} // namespace detail

/// C1 positivity, Stieltjes-implied alternating differences up to order 4, and
/// the limit trends C3 / C4 on a log grid.
inline ConditionReport check_conditions(const TimeKernel& kernel) {
    ConditionReport r;
    r.kernel = kernel.describe();
    std::vector<double> s(61);
    for (int i = 0; i <= 60; ++i) s[static_cast<std::size_t>(i)] = std::pow(10.0, -3.0 + 0.1 * i);

    bool pos = true;
    std::string pos_detail;
    for (double x : s) {
        const double g = kernel.laplace(x);
        if (!(g > 0.0) || !std::isfinite(g)) {
            pos = false;
            pos_detail = detail::at(x, g);
            break;
        }
    }
    detail::add_check(r, "C1 positivity", pos, pos_detail);

    // (-1)^m Delta_h^m g(s) >= -tol, h = s/10.
    const char* names[] = {"", "monotone", "convex", "order-3 alternation", "order-4 alternation"};
    for (int m = 1; m <= 4; ++m) {
        bool ok = true;
        std::string where;
        for (double x : s) {
            const double h = 0.1 * x;
            double d = 0.0, scale = 0.0, binom = 1.0;
            for (int i = 0; i <= m; ++i) {
                if (i > 0) binom = binom * (m - i + 1) / i;
                const double g = kernel.laplace(x + i * h);
                d += ((m - i) % 2 ? -1.0 : 1.0) * binom * g;
                scale = std::max(scale, std::abs(g));
            }
            const double signed_d = (m % 2 ? -1.0 : 1.0) * d;
            // 1e-12 absolute plus round-off of the m+1 term combination
            if (signed_d < -(1e-12 + 64.0 * 2.2e-16 * scale)) {
                ok = false;
                where = detail::at(x, signed_d);
                break;
            }
        }
        detail::add_check(r, std::string("Stieltjes necessary: ") + names[m], ok, where);
    }

    // C3: s g(s) grows without bound; C4: s g(s) -> 0 and g(s) -> infinity as s -> 0.
    auto sg = [&](double x) { return x * kernel.laplace(x); };
    bool c3 = true;
    for (double x = 1.0; x < 1e8; x *= 10.0)
        if (!(sg(10.0 * x) > sg(x))) c3 = false;
    detail::add_check(r, "C3 s*g(s) increasing to infinity", c3);

    bool c4a = true;
    for (double x = 1e-10; x < 1.0; x *= 10.0)
        if (!(sg(x) < sg(10.0 * x))) c4a = false;
    c4a = c4a && sg(1e-10) < 1e-2 * sg(1.0);
    detail::add_check(r, "C4 s*g(s) -> 0 as s -> 0", c4a);

    const auto* tk = std::get_if<TimeKernel::Tempered>(&kernel.variant());
    if (tk && tk->rate > 0.0) {
        detail::add_check(r, "C4 g(s) -> infinity as s -> 0", true, "waived for tempered kernels with b > 0");
    } else {
        bool c4b = true;
        for (double x = 1e-10; x < 1.0; x *= 10.0)
            if (!(kernel.laplace(x) > kernel.laplace(10.0 * x))) c4b = false;
        detail::add_check(r, "C4 g(s) -> infinity as s -> 0", c4b);
    }
    return r;
}

struct NegativeDefinitenessOptions {
    int sets = 8;
    int max_size = 6;
    double spread = 5.0;
    double tol = 1e-9;
    std::uint64_t seed = 20240611;
};

/// Smallest eigenvalue over random point sets of [zeta(x_j)+zeta(x_k)-zeta(x_j-x_k)].
inline double negative_definiteness_margin(const SpaceKernel& kernel, const NegativeDefinitenessOptions& opt = {}) {
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u(-opt.spread, opt.spread);
    double worst = std::numeric_limits<double>::infinity();
    for (int set = 0; set < opt.sets; ++set) {
        const int n = 2 + set % (opt.max_size - 1);
        std::vector<double> x(static_cast<std::size_t>(n));
        for (auto& v : x) v = u(rng);
        Eigen::MatrixXd M(n, n);
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                M(j, k) = kernel.symbol(x[j]) + kernel.symbol(x[k]) - kernel.symbol(x[j] - x[k]);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M, Eigen::EigenvaluesOnly);
        const double scale = std::max(1.0, M.cwiseAbs().maxCoeff());
        worst = std::min(worst, es.eigenvalues().minCoeff() / scale);
    }
    return worst;
}

/// Positivity, symmetry, integrability of min(y^2,1) k, and symbol sanity.
inline ConditionReport check_conditions(const SpaceKernel& kernel) {
    ConditionReport r;
    r.kernel = kernel.describe();

    bool pos = true, sym = true;
    std::string pd, sd;
    for (int i = 0; i <= 80; ++i) {
        const double y = std::pow(10.0, -4.0 + 0.1 * i);
        const double a = kernel.density(y), b = kernel.density(-y);
        // Far out an exponentially tempered kernel underflows to 0; only a
        // negative or NaN value, or a zero inside |y| <= 1, is a violation.
        if ((!(a >= 0.0) || (a == 0.0 && y <= 1.0)) && pos) {
            pos = false;
            pd = detail::at(y, a);
        }
        if (std::abs(a - b) > 1e-14 * std::abs(a) && sym) {
            sym = false;
            sd = detail::at(y, a - b);
        }
    }
    detail::add_check(r, "kernel positivity", pos, pd);
    detail::add_check(r, "kernel symmetry", sym, sd);

    bool integrable = true;
    std::string id;
    try {
        const double near = kernel.near_second_moment(1.0);
        const double far = kernel.tail_integral(1.0);
        integrable = std::isfinite(near) && std::isfinite(far);
        if (!integrable) id = "min(y^2,1) k(y) not integrable";
        (void)kernel.symbol_by_quadrature(1.0);
    } catch (const std::exception& e) {
        integrable = false;
        id = e.what();
    }
    detail::add_check(r, "min(y^2,1) k integrable", integrable, id);

    detail::add_check(r, "zeta(0) = 0", kernel.symbol(0.0) == 0.0);
    bool even = true, nonneg = true;
    for (double xi : {0.01, 0.1, 0.5, 1.0, 2.0, 5.0, 20.0}) {
        const double a = kernel.symbol(xi), b = kernel.symbol(-xi);
        if (std::abs(a - b) > 1e-12 * (1.0 + a)) even = false;
        if (a < 0.0) nonneg = false;
    }
    detail::add_check(r, "zeta even", even);
    detail::add_check(r, "zeta nonnegative", nonneg);

    const double margin = negative_definiteness_margin(kernel);
    std::ostringstream os;
    os << "min scaled eigenvalue " << margin;
    detail::add_check(r, "C6 negative definiteness spot check", margin >= -1e-9, os.str());
    return r;
}

} // namespace nonlocal
