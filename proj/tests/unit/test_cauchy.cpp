#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <numbers>

#include "nonlocal/cauchy.hpp"

using namespace nonlocal;

TEST(Grid, ValidatesSize) {
    EXPECT_THROW(Grid(10.0, 100), DomainError);
    EXPECT_THROW(Grid(10.0, 128), DomainError);
    EXPECT_THROW(Grid(-1.0, 256), DomainError);
    const Grid g(10.0, 256);
    EXPECT_EQ(g.mode(0), 0);
    EXPECT_EQ(g.mode(128), -128);
    EXPECT_EQ(g.mode(255), -1);
    EXPECT_DOUBLE_EQ(g.x(0), -10.0);
}

TEST(Spectrum, GaussianTransformIsGaussian) {
    const Grid g(20.0, 1024);
    const auto f = gaussian_field(g, 0.0, 1.0);
    const auto c = forward_spectrum(g, f.values);
    for (std::size_t m : {0u, 5u, 40u, 1000u}) {
        const double xi = g.xi(m);
        const double ref = std::exp(-0.5 * xi * xi) / std::sqrt(2.0 * std::numbers::pi);
        EXPECT_NEAR(c[m].real(), ref, 1e-14);
        EXPECT_NEAR(c[m].imag(), 0.0, 1e-14);
    }
}

TEST(Spectrum, RoundTrip) {
    const Grid g(5.0, 512);
    auto f = box_field(g, -1.0, 2.0);
    double im = 1.0;
    const auto back = inverse_spectrum(g, forward_spectrum(g, f.values), &im);
    for (std::size_t i = 0; i < back.size(); ++i) EXPECT_NEAR(back[i], f.values[i], 1e-14);
    EXPECT_LT(im, 1e-14);
}

TEST(Norms, ParsevalAndDegenerateSymbol) {
    const Grid g(20.0, 1024);
    const auto f = gaussian_field(g, 1.0, 0.7);
    EXPECT_NEAR(norm_l2(f), norm_l2_spectral(f), 1e-13);
    const SymbolGrid zero(g, std::vector<double>(g.size(), 0.0));
    EXPECT_NEAR(norm_mk(f, zero), norm_l2(f), 1e-13);
    // analytic L2 norm of a unit-mass Gaussian
    EXPECT_NEAR(norm_l2(f), std::pow(4.0 * std::numbers::pi * 0.49, -0.25), 1e-13);
}

TEST(GeneralizedLaplacian, TemperedOnGaussianMatchesSymbolIntegral) {
    // at x = 0: -(1/pi) int_0^inf zeta(xi) e^{-xi^2/2} dxi, zeta in closed form (beta = 1/2, q = h = 1)
    const Grid g(30.0, 2048);
    const auto f = gaussian_field(g, 0.0, 1.0);
    const auto L = apply_generalized_laplacian(f, SpaceKernel::tempered(1.0, 0.5, 1.0));
    auto integrand = [](double xi) {
        return 4.0 * (xi * std::atan(xi) - 0.5 * std::log1p(xi * xi)) * std::exp(-0.5 * xi * xi);
    };
    const double ref =
        -boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, 0.0, 40.0, 15, 1e-15) / std::numbers::pi;
    EXPECT_NEAR(L.values[g.size() / 2], ref, 1e-9);
}

TEST(CauchySolver, ZeroSymbolLeavesDataUnchanged) {
    const Grid g(10.0, 256);
    const auto f = gaussian_field(g, 0.0, 1.0);
    const SymbolGrid zero(g, std::vector<double>(g.size(), 0.0));
    const auto sol = solve_cauchy(TimeKernel::caputo(0.5), zero, f, {0.5, 2.0});
    for (const auto& p : sol.fields)
        for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(p.values[i], f.values[i], 1e-14);
}

TEST(CauchySolver, ConservesMassAndStaysPositive) {
    const Grid g(40.0, 2048);
    const auto f = gaussian_field(g, 0.0, 1.0);
    const auto sol = solve_cauchy(TimeKernel::caputo(0.5), SpaceKernel::tempered(1, 0.5, 1), f, {0.1, 1.0, 5.0});
    for (const auto& p : sol.fields) {
        EXPECT_NEAR(p.mass(), 1.0, 1e-12);
        EXPECT_GE(*std::min_element(p.values.begin(), p.values.end()), -1e-8);
    }
}

TEST(CauchySolver, ExponentialTimeKernelIsHeatLikeForGaussianJumps) {
    // g = 1 (alpha = 1) with Riesz beta -> symbol |xi|^{2b}; compare one mode directly
    const Grid g(20.0, 512);
    const auto f = gaussian_field(g, 0.0, 1.0);
    const SymbolGrid zeta(SpaceKernel::riesz(0.5), g);
    const auto one = TimeKernel::custom([](double) { return 1.0; }, [](std::complex<double>) { return 1.0; }, "g=1");
    const auto sol = solve_cauchy(one, zeta, f, {1.0});
    const auto c0 = forward_spectrum(g, f.values);
    const auto c1 = forward_spectrum(g, sol.fields[0].values);
    for (std::size_t m : {1u, 7u, 30u}) EXPECT_NEAR(c1[m].real(), c0[m].real() * std::exp(-zeta[m]), 1e-11);
}

TEST(CauchySolver, RejectsBadTimes) {
    const Grid g(10.0, 256);
    const auto f = gaussian_field(g, 0.0, 1.0);
    EXPECT_THROW(solve_cauchy(TimeKernel::caputo(0.5), SpaceKernel::riesz(0.5), f, {1.0, 0.5}), DomainError);
    EXPECT_THROW(solve_cauchy(TimeKernel::caputo(0.5), SpaceKernel::riesz(0.5), f, {-1.0}), DomainError);
}

TEST(CauchySolver, StrictModeRaisesOnBoundaryMass) {
    const Grid g(4.0, 256);
    const auto f = gaussian_field(g, 0.0, 0.5);
    CauchyOptions o;
    o.strict = true;
    EXPECT_THROW(solve_cauchy(TimeKernel::caputo(0.5), SpaceKernel::riesz(0.5), f, {5.0}, o), BoundaryMassError);
    o.strict = false;
    const auto sol = solve_cauchy(TimeKernel::caputo(0.5), SpaceKernel::riesz(0.5), f, {5.0}, o);
    EXPECT_FALSE(sol.warnings.empty());
}

TEST(CauchySolver, TemperedDualRouteAgrees) {
    const Grid g(40.0, 1024);
    const auto f = gaussian_field(g, 0.0, 1.0);
    const SymbolGrid zeta(SpaceKernel::tempered(1, 0.5, 1), g);
    CauchyOptions a, b;
    a.relaxation.method = RelaxationMethod::ClosedForm;
    b.relaxation.method = RelaxationMethod::Inverted;
    const auto tk = TimeKernel::tempered(0.5, 1.0);
    const auto s1 = solve_cauchy(tk, zeta, f, {0.5, 1.0}, a);
    const auto s2 = solve_cauchy(tk, zeta, f, {0.5, 1.0}, b);
    for (int k = 0; k < 2; ++k) {
        std::vector<double> d(g.size());
        for (std::size_t i = 0; i < d.size(); ++i) d[i] = s1.fields[k].values[i] - s2.fields[k].values[i];
        EXPECT_LT(norm_l2(Field(g, d)), 1e-8);
    }
}

TEST(CauchyEstimates, AllPassForGaussianData) {
    const Grid g(40.0, 2048);
    const auto f = gaussian_field(g, 0.0, 1.0);
    const auto tk = TimeKernel::caputo(0.5);
    const SymbolGrid zeta(SpaceKernel::riesz(0.75), g);
    const auto sol = solve_cauchy(tk, zeta, f, {0.01, 0.1, 1.0, 10.0});
    const auto r = verify_cauchy_estimates(sol, f, tk, zeta);
    EXPECT_TRUE(r.all_passed());
    EXPECT_GT(r.worst_margin("L2 contraction"), 0.0);
    EXPECT_GT(r.worst_margin("Mk contraction"), 0.0);
    EXPECT_TRUE(r.passed("large-time decay"));
}

TEST(CauchyEstimates, ZeroDataPasses) {
    const Grid g(10.0, 256);
    const Field f(g);
    const auto tk = TimeKernel::caputo(0.5);
    const SymbolGrid zeta(SpaceKernel::riesz(0.75), g);
    const auto sol = solve_cauchy(tk, zeta, f, {0.1, 1.0});
    EXPECT_TRUE(verify_cauchy_estimates(sol, f, tk, zeta).all_passed());
}

TEST(CauchyEstimates, SignedDataSkipsPositivity) {
    const Grid g(20.0, 512);
    Field f = gaussian_field(g, -2.0, 1.0);
    const auto h = gaussian_field(g, 2.0, 1.0);
    for (std::size_t i = 0; i < g.size(); ++i) f.values[i] -= h.values[i];
    const auto tk = TimeKernel::caputo(0.5);
    const SymbolGrid zeta(SpaceKernel::riesz(0.75), g);
    const auto sol = solve_cauchy(tk, zeta, f, {0.1, 1.0});
    const auto r = verify_cauchy_estimates(sol, f, tk, zeta);
    EXPECT_TRUE(r.passed("L2 contraction"));
    for (const auto& e : r.entries) EXPECT_NE(e.name, "positivity");
}
