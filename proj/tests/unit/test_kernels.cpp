#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "nonlocal/conditions.hpp"
#include "nonlocal/space_kernel.hpp"
#include "nonlocal/time_kernel.hpp"

using namespace nonlocal;

namespace {

// closed-form symbol of the tempered kernel q e^{-h|y|} |y|^{-1-2b}
double tempered_symbol(double q, double b, double h, double xi) {
    if (b == 0.5) return 4.0 * q * (xi * std::atan(xi / h) - 0.5 * h * std::log1p(xi * xi / (h * h)));
    return -4.0 * q * std::tgamma(-2.0 * b) *
           (std::pow(h * h + xi * xi, b) * std::cos(2.0 * b * std::atan(xi / h)) - std::pow(h, 2.0 * b));
}

} // namespace

TEST(TimeKernel, CaputoTransformIsPowerLaw) {
    const auto k = TimeKernel::caputo(0.4);
    for (double s : {0.01, 1.0, 37.0}) EXPECT_NEAR(k.laplace(s), std::pow(s, -0.6), 1e-15 * std::pow(s, -0.6));
    EXPECT_NEAR(std::abs(k.laplace(std::complex<double>(2.0, 0.0)) - std::pow(2.0, -0.6)), 0.0, 1e-15);
}

TEST(TimeKernel, MultiTermAndTemperedTransforms) {
    const auto m = TimeKernel::multi_term({1.0, 2.0}, {0.8, 0.4});
    EXPECT_NEAR(m.laplace(3.0), std::pow(3.0, -0.2) + 2.0 * std::pow(3.0, -0.6), 1e-14);
    const auto t = TimeKernel::tempered(0.5, 1.0);
    EXPECT_NEAR(t.laplace(3.0), std::pow(4.0, -0.5), 1e-15);
    double a = 0.0;
    EXPECT_TRUE(TimeKernel::tempered(0.3, 0.0).is_pure_caputo(&a));
    EXPECT_DOUBLE_EQ(a, 0.3);
    EXPECT_FALSE(t.is_pure_caputo());
}

TEST(TimeKernel, RejectsInvalidParameters) {
    EXPECT_THROW(TimeKernel::caputo(1.2), DomainError);
    EXPECT_THROW(TimeKernel::caputo(0.0), DomainError);
    EXPECT_THROW(TimeKernel::tempered(0.5, -1.0), DomainError);
    EXPECT_THROW(TimeKernel::multi_term({1.0}, {0.5, 0.3}), DomainError);
    EXPECT_THROW(TimeKernel::multi_term({-1.0}, {0.5}), DomainError);
    EXPECT_THROW(static_cast<void>(TimeKernel::caputo(0.5).laplace(0.0)), DomainError);
}

TEST(SpaceKernel, RieszSymbolIsExactPower) {
    EXPECT_NEAR(SpaceKernel::riesz(0.75).symbol(2.0), 2.8284271247461903, 1e-15);
    EXPECT_NEAR(SpaceKernel::riesz(0.75).symbol(-2.0), 2.8284271247461903, 1e-15);
}

TEST(SpaceKernel, RieszNormalizationMatchesQuadratureSymbol) {
    for (double b : {0.25, 0.5, 0.75, 0.9}) {
        const auto k = SpaceKernel::riesz(b);
        for (double xi : {0.3, 1.0, 4.0}) {
            const double q = k.symbol_by_quadrature(xi);
            EXPECT_NEAR(q, std::pow(xi, 2.0 * b), 1e-9 * std::pow(xi, 2.0 * b)) << "beta=" << b << " xi=" << xi;
        }
    }
}

TEST(SpaceKernel, TemperedSymbolMatchesClosedForm) {
    for (double b : {0.3, 0.5, 0.7}) {
        const auto k = SpaceKernel::tempered(1.3, b, 0.8);
        for (double xi : {0.05, 0.5, 2.0, 20.0, 300.0}) {
            const double ref = tempered_symbol(1.3, b, 0.8, xi);
            EXPECT_NEAR(k.symbol(xi), ref, 1e-9 * ref + 1e-12) << "beta=" << b << " xi=" << xi;
        }
    }
}

TEST(SpaceKernel, TemperedSecondDerivativeAtZero) {
    const auto k = SpaceKernel::tempered(1.0, 0.5, 1.0);
    const auto d = zeta_second_derivative_at_zero(k);
    ASSERT_TRUE(d.has_value());
    EXPECT_NEAR(*d, 4.0, 1e-12);
    // independent check: 2 int y^2 k(y) dy over the line
    auto f = [&](double y) { return y * y * k.density(y); };
    double I = 0.0;
    for (int p = 0; p < 80; ++p) I += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, p, p + 1.0, 0, 0);
    EXPECT_NEAR(4.0 * I, 4.0, 1e-10);
    // and the curvature of the symbol itself
    const double h = 1e-3;
    EXPECT_NEAR(2.0 * k.symbol(h) / (h * h), 4.0, 1e-5);
    EXPECT_FALSE(zeta_second_derivative_at_zero(SpaceKernel::riesz(0.75)).has_value());
}

TEST(SpaceKernel, TailAndNearMomentsMatchQuadrature) {
    const auto k = SpaceKernel::tempered(1.0, 0.3, 2.0);
    auto tail = [&](double Y) {
        double I = 0.0;
        for (int p = 0; p < 60; ++p)
            I += boost::math::quadrature::gauss_kronrod<double, 61>::integrate([&](double y) { return k.density(y); },
                                                                              Y + p * 0.5, Y + (p + 1) * 0.5, 0, 0);
        return I;
    };
    for (double Y : {0.1, 1.0, 5.0}) EXPECT_NEAR(k.tail_integral(Y), tail(Y), 1e-10 * tail(Y));
    const double near = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double y) { return y * y * k.density(y); }, 0.0, 0.01, 12, 1e-14);
    EXPECT_NEAR(k.near_second_moment(0.01), near, 1e-10 * near);
}

TEST(SpaceKernel, MultiTermSymbolIsWeightedSum) {
    const auto k = SpaceKernel::multi_term({1.0, 0.5}, {0.75, 0.4});
    EXPECT_NEAR(k.symbol(1.7), std::pow(1.7, 1.5) + 0.5 * std::pow(1.7, 0.8), 1e-14);
    EXPECT_NEAR(k.symbol_by_quadrature(1.7), k.symbol(1.7), 1e-9);
}

TEST(SpaceKernel, CustomGaussianKernelUsesQuadrature) {
    const auto k = SpaceKernel::custom([](double y) { return std::exp(-y * y); }, true, "gauss");
    // zeta = 2 sqrt(pi) (1 - e^{-xi^2/4})
    for (double xi : {0.5, 2.0, 8.0}) {
        const double ref = 2.0 * std::sqrt(std::numbers::pi) * -std::expm1(-xi * xi / 4.0);
        EXPECT_NEAR(k.symbol(xi), ref, 1e-9 * ref);
    }
    ASSERT_TRUE(k.symbol_second_derivative_at_zero().has_value());
    EXPECT_NEAR(*k.symbol_second_derivative_at_zero(), std::sqrt(std::numbers::pi), 1e-9);
}

TEST(SpaceKernel, SymbolIsEvenAndVanishesAtZero) {
    const auto k = SpaceKernel::tempered(1.0, 0.6, 0.5);
    EXPECT_EQ(k.symbol(0.0), 0.0);
    for (double xi : {0.1, 1.0, 9.0}) EXPECT_LE(std::abs(k.symbol(xi) - k.symbol(-xi)), 1e-12 * (1 + k.symbol(xi)));
}

TEST(Conditions, BuiltInTimeKernelsPass) {
    for (const auto& k : {TimeKernel::caputo(0.5), TimeKernel::multi_term({1, 1}, {0.8, 0.4}),
                          TimeKernel::tempered(0.5, 1.0)}) {
        const auto r = check_conditions(k);
        EXPECT_TRUE(r.all_passed()) << r.kernel;
    }
}

TEST(Conditions, NonStieltjesTransformFails) {
    const auto k = TimeKernel::custom([](double s) { return s; }, {}, "g=s");
    const auto r = check_conditions(k);
    EXPECT_FALSE(r.all_passed());
}

TEST(Conditions, BuiltInSpaceKernelsPass) {
    for (const auto& k : {SpaceKernel::riesz(0.75), SpaceKernel::tempered(1, 0.5, 1),
                          SpaceKernel::multi_term({1, 0.5}, {0.75, 0.4})}) {
        const auto r = check_conditions(k);
        EXPECT_TRUE(r.all_passed()) << r.kernel;
        EXPECT_GT(negative_definiteness_margin(k), -1e-9);
    }
}
