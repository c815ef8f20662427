#include <gtest/gtest.h>

#include <cmath>

#include "nonlocal/ctrw.hpp"

using namespace nonlocal;

TEST(CounterRng, DeterministicAndStreamSeparated) {
    CounterRng a(7, 3), b(7, 3), c(7, 4);
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        EXPECT_EQ(x, b.next());
        EXPECT_NE(x, c.next());
    }
    CounterRng u(1, 0);
    double m = 0.0;
    for (int i = 0; i < 100000; ++i) {
        const double v = u.uniform();
        ASSERT_GT(v, 0.0);
        ASSERT_LT(v, 1.0);
        m += v;
    }
    EXPECT_NEAR(m / 100000, 0.5, 4.0 * std::sqrt(1.0 / 12.0 / 100000));
}

TEST(WaitingSampler, CaputoSurvivalMatchesMittagLeffler) {
    const auto w = build_waiting_sampler(TimeKernel::caputo(0.5));
    EXPECT_FALSE(w.has_table());
    CounterRng rng(11, 0);
    const int P = 100000;
    std::vector<double> s(P);
    for (auto& x : s) {
        x = w(rng);
        ASSERT_GT(x, 0.0);
    }
    for (double t : {0.1, 1.0, 10.0}) {
        const double p = ml(0.5, 1.0, -std::sqrt(t));
        const double emp = static_cast<double>(std::count_if(s.begin(), s.end(), [&](double x) { return x > t; })) / P;
        EXPECT_NEAR(emp, p, 3.0 * std::sqrt(p * (1 - p) / P)) << t;
    }
}

TEST(WaitingSampler, TableAgreesWithFastPath) {
    WaitingSamplerOptions o;
    o.force_table = true;
    const auto table = build_waiting_sampler(TimeKernel::caputo(0.5), o);
    const auto fast = build_waiting_sampler(TimeKernel::caputo(0.5));
    ASSERT_TRUE(table.has_table());
    for (double t : log_grid(1e-3, 1e3, 25)) EXPECT_NEAR(table.survival(t), fast.survival(t), 1e-3);
    // table invariants
    const auto& T = table.table();
    for (std::size_t i = 1; i < T.cdf.size(); ++i) ASSERT_GT(T.cdf[i], T.cdf[i - 1]);
    EXPECT_LT(T.cdf.front(), 1e-3 + 1e-12);
    EXPECT_GT(T.cdf.back(), 1.0 - 1e-3 - 1e-12);
}

TEST(WaitingSampler, TemperedTableAgreesWithStehfest) {
    const auto tk = TimeKernel::tempered(0.5, 1.0);
    const auto w = build_waiting_sampler(tk);
    ASSERT_TRUE(w.has_table());
    LaplaceImage img;
    img.real_fn = [&](double s) {
        const double g = tk.laplace(s);
        return g / (1.0 + s * g);
    };
    for (double t : {0.05, 0.3, 1.0, 4.0}) EXPECT_NEAR(w.survival(t), laplace_invert(img, t, InversionMethod::GaverStehfest), 1e-4);
}

TEST(WaitingSampler, RenewalScaleShrinksWaits) {
    WaitingSamplerOptions o;
    o.renewal_scale = 0.01;
    const auto w = build_waiting_sampler(TimeKernel::caputo(0.5), o);
    EXPECT_NEAR(w.survival(1e-4), ml(0.5, 1.0, -1.0), 1e-12);
}

TEST(JumpSampler, RieszIsSymmetricStable) {
    const auto j = build_jump_sampler(SpaceKernel::riesz(0.75));
    EXPECT_FALSE(j.has_table());
    CounterRng rng(3, 0);
    const int P = 200000;
    std::vector<double> x(P);
    for (auto& v : x) v = j(rng);
    for (double xi : {0.5, 1.0, 2.0}) {
        double c = 0.0, c2 = 0.0;
        for (double v : x) {
            const double cv = std::cos(xi * v);
            c += cv;
            c2 += cv * cv;
        }
        c /= P;
        const double se = std::sqrt((c2 / P - c * c) / P);
        EXPECT_NEAR(c, std::exp(-std::pow(xi, 1.5)), 3.0 * se) << xi;
    }
}

TEST(JumpSampler, TemperedTableMomentsAndCharacteristicFunction) {
    const auto k = SpaceKernel::tempered(1.0, 0.5, 1.0);
    const auto j = build_jump_sampler(k);
    ASSERT_TRUE(j.has_table());
    EXPECT_LT(j.table().clip_mass, 1e-4);
    CounterRng rng(5, 0);
    const int P = 1000000;
    double m = 0.0, m2 = 0.0, m4 = 0.0;
    std::vector<double> x(P);
    for (auto& v : x) {
        v = j(rng);
        m += v;
        m2 += v * v;
        m4 += v * v * v * v;
    }
    m /= P;
    m2 /= P;
    m4 /= P;
    EXPECT_NEAR(m, 0.0, 4.0 * std::sqrt(m2 / P));
    EXPECT_NEAR(m2, 4.0, 0.05 * 4.0);
    for (double xi : {0.5, 1.0, 2.0}) {
        double c = 0.0, c2 = 0.0;
        for (double v : x) {
            const double cv = std::cos(xi * v);
            c += cv;
            c2 += cv * cv;
        }
        c /= P;
        const double se = std::sqrt((c2 / P - c * c) / P);
        EXPECT_NEAR(c, std::exp(-k.symbol(xi)), 4.0 * se) << xi; // three looks at one sample
    }
}

TEST(JumpSampler, UnderResolvedGridIsRejected) {
    // near-Gaussian jumps whose characteristic function has not decayed at
    // the grid's largest frequency: the reconstruction rings negative
    JumpSamplerOptions o;
    o.half_width = 256.0;
    o.points = 256;
    o.force_table = true;
    EXPECT_THROW(build_jump_sampler(SpaceKernel::riesz(0.9), o), DensityReconstructionError);
}

TEST(JumpSampler, NarrowGridWarnsAboutWrapAround) {
    // a periodized positive density stays positive, so only the edge check fires
    JumpSamplerOptions o;
    o.half_width = 2.0;
    o.force_table = true;
    const auto j = build_jump_sampler(SpaceKernel::riesz(0.4), o);
    ASSERT_FALSE(j.warnings().empty());
    EXPECT_NE(j.warnings().back().find("edge"), std::string::npos);
}

TEST(Ensemble, NoRenewalBeforeFirstWait) {
    const auto r = simulate_ensemble(TimeKernel::caputo(0.5), SpaceKernel::riesz(0.75), 1000, {1e-12}, 9);
    for (double x : r.positions) EXPECT_EQ(x, 0.0);
}

TEST(Ensemble, DeterministicAcrossThreadCounts) {
    EnsembleOptions a, b;
    b.threads = 3;
    const auto r1 = simulate_ensemble(TimeKernel::tempered(0.5, 1.0), SpaceKernel::riesz(0.6), 2000, {0.5, 2.0}, 77, a);
    const auto r2 = simulate_ensemble(TimeKernel::tempered(0.5, 1.0), SpaceKernel::riesz(0.6), 2000, {0.5, 2.0}, 77, b);
    EXPECT_EQ(r1.positions, r2.positions);
    const auto r3 = simulate_ensemble(TimeKernel::tempered(0.5, 1.0), SpaceKernel::riesz(0.6), 2000, {0.5, 2.0}, 78, a);
    EXPECT_NE(r1.positions, r3.positions);
}

TEST(Ensemble, RenewalConsistencyOnTrajectories) {
    EnsembleOptions o;
    o.record_trajectories = true;
    const std::vector<double> times{0.5, 1.0, 3.0};
    const auto r = simulate_ensemble(TimeKernel::caputo(0.7), SpaceKernel::riesz(0.75), 100, times, 4, o);
    ASSERT_EQ(r.trajectories.size(), 100u);
    for (std::size_t p = 0; p < 100; ++p) {
        const auto& tr = r.trajectories[p];
        for (std::size_t k = 0; k < times.size(); ++k) {
            double x = 0.0;
            for (std::size_t i = 0; i < tr.epochs.size(); ++i)
                if (tr.epochs[i] <= times[k]) x += tr.jumps[i];
            EXPECT_NEAR(r.position(p, k), x, 1e-12 * (1 + std::abs(x)));
        }
    }
}

TEST(Ensemble, MsdMatchesAnalyticForTemperedJumps) {
    const auto tk = TimeKernel::caputo(0.5);
    const auto sk = SpaceKernel::tempered(1.0, 0.5, 1.0);
    const auto r = simulate_ensemble(tk, sk, 100000, {1.0}, 2024);
    const auto s = empirical_statistics(r);
    EXPECT_NEAR(s.msd[0] / *msd(tk, sk, 1.0), 1.0, 0.05);
}

TEST(Ensemble, MsdSlopeIsAlpha) {
    const auto tk = TimeKernel::caputo(0.6);
    const auto sk = SpaceKernel::tempered(1.0, 0.5, 1.0);
    const std::vector<double> times{0.1, 0.3, 1.0, 3.0, 10.0};
    const auto s = empirical_statistics(simulate_ensemble(tk, sk, 100000, times, 99));
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double x = std::log(times[k]), y = std::log(s.msd[k]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double n = static_cast<double>(times.size());
    EXPECT_NEAR((n * sxy - sx * sy) / (n * sxx - sx * sx), 0.6, 0.05);
}

TEST(Ensemble, SymmetricKernelHasNoSkew) {
    const auto r = simulate_ensemble(TimeKernel::caputo(0.5), SpaceKernel::tempered(1, 0.5, 1), 20000, {1.0, 4.0}, 5);
    for (std::size_t k = 0; k < r.times.size(); ++k) {
        double m2 = 0, m3 = 0;
        for (std::size_t p = 0; p < r.particles; ++p) {
            const double x = r.position(p, k);
            m2 += x * x;
            m3 += x * x * x;
        }
        m2 /= r.particles;
        m3 /= r.particles;
        double m6 = 0;
        for (std::size_t p = 0; p < r.particles; ++p) m6 += std::pow(r.position(p, k), 6);
        m6 /= r.particles;
        EXPECT_NEAR(m3, 0.0, 4.0 * std::sqrt(m6 / r.particles)) << r.times[k];
    }
}

TEST(Ensemble, ExactCharacteristicFunctionForScaledWalk) {
    const auto tk = TimeKernel::caputo(0.5);
    const auto sk = SpaceKernel::riesz(0.75);
    EnsembleOptions o;
    o.renewal_scale = 0.1;
    const auto r = simulate_ensemble(tk, sk, 50000, {1.0}, 8, o);
    const auto s = empirical_statistics(r, {}, {0.5, 1.0});
    for (const auto& e : s.ecf)
        EXPECT_NEAR(e.re, ctrw_characteristic_function(tk, sk.symbol(e.xi), e.time, 0.1), 3.0 * e.stderr_re);
}

TEST(Ensemble, RejectsBadInput) {
    EXPECT_THROW(simulate_ensemble(TimeKernel::caputo(0.5), SpaceKernel::riesz(0.5), 100, {1.0, 0.5}, 1), DomainError);
    EXPECT_THROW(simulate_ensemble(TimeKernel::caputo(0.5), SpaceKernel::riesz(0.5), 100, {0.0}, 1), DomainError);
}

TEST(Statistics, TrivialCases) {
    EnsembleResult r;
    r.particles = 2;
    r.times = {1.0};
    r.positions = {-1.0, 1.0};
    auto s = empirical_statistics(r, {-2.0, 2.0, 4}, {0.0, 1.0});
    EXPECT_DOUBLE_EQ(s.msd[0], 1.0);
    EXPECT_DOUBLE_EQ(s.ecf[0].re, 1.0);
    EXPECT_NEAR(s.ecf[1].re, std::cos(1.0), 1e-15);
    r.positions = {0.0, 0.0};
    s = empirical_statistics(r, {-2.0, 2.0, 4});
    EXPECT_DOUBLE_EQ(s.msd[0], 0.0);
    // delta at the origin: all mass in the bin [0, 1)
    EXPECT_DOUBLE_EQ(s.histograms[0].density[2], 1.0);
    double mass = 0.0;
    for (double d : s.histograms[0].density) mass += d;
    EXPECT_DOUBLE_EQ(mass, 1.0);
}
