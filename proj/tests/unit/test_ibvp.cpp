#include <gtest/gtest.h>

#include <cmath>

#include "nonlocal/cauchy.hpp"
#include "nonlocal/ibvp.hpp"

using namespace nonlocal;

namespace {

const SpaceKernel& tempered() {
    static const SpaceKernel k = SpaceKernel::tempered(1.0, 0.5, 1.0);
    return k;
}

// shared M = 1024 system for the truncated tempered kernel
const EigenSystem& system1024() {
    static const EigenSystem e = eigendecompose(truncate_kernel(tempered(), 1.0), 1024);
    return e;
}

// smallest eigenvalue by inverse iteration (avoids a full 2048 eigensolve)
double smallest_eigenvalue(const Eigen::MatrixXd& A) {
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    Eigen::VectorXd v = Eigen::VectorXd::Ones(A.rows()).normalized();
    double lambda = 0.0;
    for (int it = 0; it < 200; ++it) {
        Eigen::VectorXd w = llt.solve(v);
        const double next = 1.0 / v.dot(w);
        v = w.normalized();
        if (std::abs(next - lambda) < 1e-14 * next) return next;
        lambda = next;
    }
    return lambda;
}

} // namespace

TEST(Truncation, KeepsKernelInsideAndPowerLawOutside) {
    const auto k = truncate_kernel(tempered(), 1.0);
    EXPECT_NEAR(k.theta(), std::exp(-2.0), 1e-12); // infimum of e^{-|x|} on (0, 2]
    for (double x : {0.01, 0.5, 1.9, 2.0}) EXPECT_EQ(k.density(x), tempered().density(x));
    EXPECT_DOUBLE_EQ(k.density(5.0), k.theta() * std::pow(5.0, -2.0));
    EXPECT_NEAR(k.tail_integral(2.0), k.theta() / 2.0, 1e-15);
}

TEST(Truncation, TailIntegralIsContinuousAcrossCutoff) {
    const auto k = truncate_kernel(tempered(), 1.0);
    EXPECT_NEAR(k.tail_integral(2.0 - 1e-9), k.tail_integral(2.0), 1e-8);
    EXPECT_NEAR(k.tail_integral(1.0) - k.tail_integral(2.0), tempered().tail_integral(1.0) - tempered().tail_integral(2.0),
                1e-13);
}

TEST(Truncation, RejectsThetaViolatingLowerBound) {
    try {
        truncate_kernel(tempered(), 1.0, 0.2, 0.5);
        FAIL() << "expected C7Violation";
    } catch (const C7Violation& e) {
        EXPECT_GT(e.where(), 1.0); // the bound fails first near the edge of (0, 2H]
        EXPECT_LE(e.where(), 2.0);
    }
    EXPECT_THROW(truncate_kernel(tempered(), 1.0, -1.0, 0.5), DomainError);
    EXPECT_THROW(truncate_kernel(SpaceKernel::custom([](double y) { return std::exp(-y * y); }, true), 1.0),
                 DomainError);
}

TEST(Assembly, PositiveOnConstant) {
    const auto op = assemble_operator(truncate_kernel(tempered(), 1.0), 128);
    const Eigen::VectorXd u = Eigen::VectorXd::Ones(128);
    const Eigen::VectorXd Au = op.A * u;
    EXPECT_GT(Au.minCoeff(), 0.0);
    EXPECT_EQ(op.symmetry_defect, 0.0);
    EXPECT_THROW(assemble_operator(truncate_kernel(tempered(), 1.0), 32), DomainError);
}

TEST(Assembly, MatchesSpectralOperatorOnInteriorBump) {
    // bump supported in (-1/2, 1/2): exterior data play no role, so the matrix
    // and the full-line spectral operator must agree
    auto bump = [](double x) { return std::abs(x) < 0.5 ? std::exp(-1.0 / (1.0 - 4.0 * x * x)) : 0.0; };
    const IbvpGrid g(1.0, 1023);
    const auto op = assemble_operator(tempered(), g);
    Eigen::VectorXd b(1023);
    for (std::size_t i = 0; i < 1023; ++i) b(static_cast<Eigen::Index>(i)) = bump(g.x(i));
    const Eigen::VectorXd Ab = op.A * b;

    const Grid G(8.0, 4096); // G.x(2048) = g.x(511) = 0
    Field f(G);
    for (std::size_t i = 0; i < G.size(); ++i) f.values[i] = bump(G.x(i));
    const auto L = apply_generalized_laplacian(f, tempered());
    EXPECT_NEAR(Ab(511), -L.values[2048], 0.02 * std::abs(L.values[2048]));
    EXPECT_NEAR(Ab(511), -L.values[2048], 1e-5);
}

TEST(Eigensystem, PositiveOrthonormalAccurate) {
    const auto& e = system1024();
    EXPECT_GT(e.eigenvalues(0), 0.0);
    for (Eigen::Index j = 1; j < e.eigenvalues.size(); ++j) EXPECT_LE(e.eigenvalues(j - 1), e.eigenvalues(j));
    EXPECT_LE(e.orthonormality_defect, 1e-10);
    const double Anorm = e.A.norm();
    for (std::size_t j : {0u, 511u, 1023u}) EXPECT_LE(e.residual(j), 1e-9 * Anorm);
}

TEST(Eigensystem, RefinementConverges) {
    const auto k = truncate_kernel(tempered(), 1.0);
    const double l1 = system1024().eigenvalues(0);
    const double l2 = smallest_eigenvalue(assemble_operator(k, 2048).A);
    EXPECT_LE(std::abs(l2 - l1), 1e-2 * l1);
}

TEST(Eigensystem, FirstEigenvalueGrowsWithOrder) {
    double prev = 0.0;
    for (double b : {0.3, 0.5, 0.7}) {
        const auto k = truncate_kernel(SpaceKernel::riesz(b), 1.0);
        const double l = smallest_eigenvalue(assemble_operator(k, 512).A);
        EXPECT_GT(l, prev) << b;
        prev = l;
    }
}

TEST(Eigensystem, NegativeOperatorRejected) {
    AssembledOperator op{IbvpGrid(1.0, 64), -Eigen::MatrixXd::Identity(64, 64), 0.0};
    EXPECT_THROW(eigendecompose(op), PositivityError);
}

TEST(IbvpSolver, ReconstructsInitialDataAtTimeZero) {
    const auto& e = system1024();
    const auto f = ibvp_gaussian(e.grid, 0.1, 0.2);
    const auto sol = solve_ibvp(TimeKernel::caputo(0.5), e, f, {0.0});
    double s = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) s += std::pow(sol.fields[0][i] - f[i], 2);
    EXPECT_LE(std::sqrt(s * e.grid.dx()), 1e-8);
}

TEST(IbvpSolver, SingleModeEvolvesByRelaxation) {
    const auto& e = system1024();
    const auto tk = TimeKernel::caputo(0.5);
    const auto f = ibvp_eigenmode(e, 1);
    const auto sol = solve_ibvp(tk, e, f, {0.1, 1.0, 10.0});
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        const double z = ml(0.5, 1.0, -e.eigenvalues(0) * std::sqrt(sol.times[k]));
        for (std::size_t i = 0; i < f.size(); i += 97) EXPECT_NEAR(sol.fields[k][i], z * f[i], 1e-10);
    }
}

TEST(IbvpSolver, InvertedRelaxationMatchesMittagLefflerOnFirstMode) {
    const auto& e = system1024();
    IbvpOptions o;
    o.relaxation.method = RelaxationMethod::Inverted;
    const auto f = ibvp_gaussian(e.grid, 0.0, 0.3);
    const auto sol = solve_ibvp(TimeKernel::caputo(0.5), e, f, {0.01, 0.1, 1.0, 10.0}, o);
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        const double ratio = sol.modes[k](0) / sol.initial_modes(0);
        EXPECT_NEAR(ratio, ml(0.5, 1.0, -e.eigenvalues(0) * std::sqrt(sol.times[k])), 1e-7);
    }
}

TEST(IbvpEstimates, AllPassForGaussianData) {
    const auto& e = system1024();
    const auto tk = TimeKernel::caputo(0.5);
    const auto f = ibvp_gaussian(e.grid, 0.0, 0.2);
    const auto sol = solve_ibvp(tk, e, f, {0.01, 0.1, 1.0, 10.0});
    const auto r = verify_ibvp_estimates(sol, f, e, tk);
    EXPECT_TRUE(r.all_passed());
}

TEST(IbvpEstimates, FirstModeMarginIsOneMinusZ) {
    const auto& e = system1024();
    const auto tk = TimeKernel::caputo(0.5);
    const auto f = ibvp_eigenmode(e, 1);
    const auto sol = solve_ibvp(tk, e, f, {0.5, 2.0});
    const auto r = verify_ibvp_estimates(sol, f, e, tk);
    for (const auto& x : r.entries) {
        if (x.name == "L2 contraction") {
            EXPECT_NEAR(x.margin, 1.0 - relaxation_z(tk, e.eigenvalues(0), x.time), 1e-12);
        }
    }
}

TEST(IbvpEstimates, ZeroDataPasses) {
    const auto& e = system1024();
    const auto tk = TimeKernel::tempered(0.5, 1.0);
    const std::vector<double> f(e.size(), 0.0);
    const auto sol = solve_ibvp(tk, e, f, {0.1, 1.0});
    EXPECT_EQ(sol.modes_used, 0u);
    EXPECT_TRUE(verify_ibvp_estimates(sol, f, e, tk).all_passed());
}

TEST(IbvpEstimates, RandomDataPasses) {
    const auto& e = system1024();
    const auto tk = TimeKernel::caputo(0.5);
    std::vector<double> f(e.size());
    std::uint64_t s = 12345;
    for (auto& v : f) {
        s = s * 6364136223846793005ULL + 1442695040888963407ULL;
        v = static_cast<double>(s >> 11) * 0x1.0p-53 - 0.5;
    }
    const auto sol = solve_ibvp(tk, e, f, {0.01, 0.1, 1.0, 10.0});
    const auto r = verify_ibvp_estimates(sol, f, e, tk);
    EXPECT_TRUE(r.all_passed());
    EXPECT_FALSE(r.warnings.empty()); // rough data put energy in the top modes
}

TEST(Truncation, OperatorsDifferOnlyByConstantDiagonal) {
    // k and k* give the same off-diagonal entries; the exterior tail beyond 2H
    // enters the diagonal as 4 int_{2H}^inf (k* - k)
    const IbvpGrid g(1.0, 256);
    const auto k = truncate_kernel(tempered(), 1.0);
    const auto A = assemble_operator(tempered(), g).A;
    const auto B = assemble_operator(k, 256).A;
    Eigen::MatrixXd D = B - A;
    const double shift = 4.0 * (k.tail_integral(2.0) - tempered().tail_integral(2.0));
    EXPECT_NEAR(D.diagonal().minCoeff(), shift, 1e-12);
    EXPECT_NEAR(D.diagonal().maxCoeff(), shift, 1e-12);
    D.diagonal().setZero();
    EXPECT_EQ(D.cwiseAbs().maxCoeff(), 0.0);
}
