#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "nonlocal/errors.hpp"
#include "nonlocal/property_report.hpp"
#include "nonlocal/relaxation.hpp"
#include "nonlocal/space_kernel.hpp"
#include "nonlocal/time_kernel.hpp"

namespace nonlocal {

/// k*(x) = k(x) for |x| <= 2H, theta |x|^{-1-2 beta} beyond.
class TruncatedKernel {
public:
    TruncatedKernel(SpaceKernel base, double H, double theta, double beta)
        : base_(std::move(base)), H_(H), theta_(theta), beta_(beta) {}

    [[nodiscard]] const SpaceKernel& base() const noexcept { return base_; }
    [[nodiscard]] double half_width() const noexcept { return H_; }
    [[nodiscard]] double theta() const noexcept { return theta_; }
    [[nodiscard]] double beta() const noexcept { return beta_; }
    [[nodiscard]] double cutoff() const noexcept { return 2.0 * H_; }

    [[nodiscard]] double density(double y) const {
        const double a = std::abs(y);
        if (a <= cutoff()) return base_.density(a);
        return theta_ * std::pow(a, -1.0 - 2.0 * beta_);
    }

    /// int_Y^inf k*(y) dy
    [[nodiscard]] double tail_integral(double Y) const {
        const double far = theta_ * std::pow(std::max(Y, cutoff()), -2.0 * beta_) / (2.0 * beta_);
        if (Y >= cutoff()) return far;
        return base_.tail_integral(Y) - base_.tail_integral(cutoff()) + far;
    }

    [[nodiscard]] double near_second_moment(double d) const {
        if (d > cutoff()) throw DomainError("near_second_moment: d beyond the truncation radius");
        return base_.near_second_moment(d);
    }

private:
    SpaceKernel base_;
    double H_, theta_, beta_;
};

namespace detail {

inline std::vector<double> c7_sample_points(double H, std::size_t n = 2001) {
    // log-spaced on (0, 2H], dense near the origin where kernels differ most
    std::vector<double> x(n);
    const double lo = std::log(2.0 * H * 1e-8), hi = std::log(2.0 * H);
    for (std::size_t i = 0; i < n; ++i)
        x[i] = std::exp(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1));
    x.back() = 2.0 * H;
    return x;
}

inline std::optional<double> natural_beta(const SpaceKernel& k) {
    if (auto* r = std::get_if<SpaceKernel::Riesz>(&k.variant())) return r->beta;
    if (auto* t = std::get_if<SpaceKernel::Tempered>(&k.variant())) return t->beta;
    if (auto* m = std::get_if<SpaceKernel::MultiTerm>(&k.variant()))
        return *std::min_element(m->orders.begin(), m->orders.end());
    return std::nullopt;
}

} // namespace detail

/// Sampled infimum of k(x)|x|^{1+2 beta} over (0, 2H].
inline double default_truncation_theta(const SpaceKernel& base, double H, double beta) {
    if (!(H > 0.0)) throw DomainError("truncation: H must be positive");
    detail::require_order(beta, "beta");
    double th = 1e300;
    for (double x : detail::c7_sample_points(H)) th = std::min(th, base.density(x) * std::pow(x, 1.0 + 2.0 * beta));
    return th;
}

/// Checks k(x) >= theta |x|^{-1-2 beta} on sampled (0, 2H] and builds k*.
inline TruncatedKernel truncate_kernel(const SpaceKernel& base, double H, double theta, double beta) {
    if (!(H > 0.0) || !std::isfinite(H)) throw DomainError("truncation: H must be positive");
    if (!(theta > 0.0) || !std::isfinite(theta)) throw DomainError("truncation: theta must be positive");
    detail::require_order(beta, "beta");
    for (double x : detail::c7_sample_points(H)) {
        const double lower = theta * std::pow(x, -1.0 - 2.0 * beta);
        if (base.density(x) < lower * (1.0 - 1e-12)) {
            std::ostringstream os;
            os << "C7 fails at x=" << x << ": k(x)=" << base.density(x) << " < " << lower;
            throw C7Violation(os.str(), x);
        }
    }
    return TruncatedKernel(base, H, theta, beta);
}

/// theta and beta defaulted (beta from the kernel family, theta tight).
inline TruncatedKernel truncate_kernel(const SpaceKernel& base, double H, std::optional<double> theta = {},
                                       std::optional<double> beta = {}) {
    if (!beta) beta = detail::natural_beta(base);
    if (!beta) throw DomainError("truncation: custom kernels need an explicit beta");
    const double th = theta ? *theta : default_truncation_theta(base, H, *beta);
    return truncate_kernel(base, H, th, *beta);
}

/// Interior nodes x_i = -H + (i+1) dx, i < M, dx = 2H/(M+1); the shift
/// (M+1) dx = 2H spans the whole domain.
struct IbvpGrid {
    double H = 1.0;
    std::size_t M = 1024;

    IbvpGrid() = default;
    IbvpGrid(double h, std::size_t m) : H(h), M(m) {
        if (!(h > 0.0) || !std::isfinite(h)) throw DomainError("ibvp grid: H must be positive");
        if (m < 64) throw DomainError("ibvp grid: M must be >= 64");
    }
    [[nodiscard]] double dx() const noexcept { return 2.0 * H / static_cast<double>(M + 1); }
    [[nodiscard]] double x(std::size_t i) const noexcept { return -H + static_cast<double>(i + 1) * dx(); }
};

struct AssembledOperator {
    IbvpGrid grid;
    Eigen::MatrixXd A;
    double symmetry_defect = 0.0; // before symmetrization, relative max norm
};

namespace detail {

struct KernelAccess {
    std::function<double(double)> density, tail, near;
};

inline AssembledOperator assemble(const KernelAccess& k, const IbvpGrid& g) {
    const std::size_t M = g.M;
    const double dx = g.dx();
    const std::size_t Lc = M + 1;
    // trapezoid on [dx, Lc dx] with half weights at both ends
    std::vector<double> wk(Lc + 1, 0.0);
    for (std::size_t l = 1; l <= Lc; ++l) {
        const double w = (l == 1 || l == Lc) ? 0.5 * dx : dx;
        wk[l] = w * k.density(static_cast<double>(l) * dx);
    }
    double far_sum = 0.0;
    for (std::size_t l = 1; l <= Lc; ++l) far_sum += wk[l];
    const double tail = k.tail(static_cast<double>(Lc) * dx);
    const double near = 2.0 * k.near(dx) / (dx * dx); // u'' surrogate weight, two sides

    // -(D u)_i = -int_R (u(x+y)+u(x-y)-2u(x)) k dy with u = 0 off B
    AssembledOperator out{g, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M)), 0.0};
    auto& A = out.A;
    const double diag = 4.0 * far_sum + 4.0 * tail + 2.0 * near;
    for (std::size_t i = 0; i < M; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        A(ii, ii) = diag;
        for (std::size_t j = 0; j < M; ++j) {
            if (j == i) continue;
            const std::size_t d = i > j ? i - j : j - i;
            double v = -2.0 * wk[d];
            if (d == 1) v -= near;
            A(ii, static_cast<Eigen::Index>(j)) = v;
        }
    }
    const double amax = A.cwiseAbs().maxCoeff();
    out.symmetry_defect = amax > 0.0 ? (A - A.transpose()).cwiseAbs().maxCoeff() / amax : 0.0;
    if (out.symmetry_defect > 1e-6) throw AssemblyError("assembled operator is not symmetric", out.symmetry_defect);
    A = 0.5 * (A + A.transpose()).eval();
    return out;
}

} // namespace detail

/// Matrix of -D_(k*) on the interior nodes with zero exterior data.
inline AssembledOperator assemble_operator(const TruncatedKernel& k, std::size_t M) {
    const IbvpGrid g(k.half_width(), M);
    return detail::assemble({[&](double y) { return k.density(y); }, [&](double Y) { return k.tail_integral(Y); },
                             [&](double d) { return k.near_second_moment(d); }},
                            g);
}

/// Same scheme on the untruncated kernel (for comparing k against k*).
inline AssembledOperator assemble_operator(const SpaceKernel& k, const IbvpGrid& g) {
    return detail::assemble({[&](double y) { return k.density(y); }, [&](double Y) { return k.tail_integral(Y); },
                             [&](double d) { return k.near_second_moment(d); }},
                            g);
}

struct EigenSystem {
    IbvpGrid grid;
    Eigen::MatrixXd A;
    Eigen::VectorXd eigenvalues; // ascending
    Eigen::MatrixXd psi;         // columns, sum psi_j^2 dx = 1
    double symmetry_defect = 0.0;
    double orthonormality_defect = 0.0;

    [[nodiscard]] std::size_t size() const noexcept { return grid.M; }
    /// <psi_j, f> for all j
    [[nodiscard]] Eigen::VectorXd project(const std::vector<double>& f) const {
        if (f.size() != grid.M) throw DomainError("project: size mismatch");
        const Eigen::Map<const Eigen::VectorXd> v(f.data(), static_cast<Eigen::Index>(f.size()));
        return grid.dx() * (psi.transpose() * v);
    }
    [[nodiscard]] double residual(std::size_t j) const {
        const auto jj = static_cast<Eigen::Index>(j);
        return (A * psi.col(jj) - eigenvalues(jj) * psi.col(jj)).norm() * std::sqrt(grid.dx());
    }
};

inline EigenSystem eigendecompose(const AssembledOperator& op) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.A);
    if (es.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed", 0.0);
    EigenSystem e{op.grid, op.A, es.eigenvalues(), es.eigenvectors() / std::sqrt(op.grid.dx()), op.symmetry_defect, 0.0};
    const double lmax = std::abs(e.eigenvalues.maxCoeff());
    if (e.eigenvalues(0) < -1e-8 * lmax) {
        std::ostringstream os;
        os << "operator has eigenvalue " << e.eigenvalues(0);
        throw PositivityError(os.str(), e.eigenvalues(0));
    }
    const Eigen::Index M = e.psi.cols();
    e.orthonormality_defect =
        (op.grid.dx() * (e.psi.transpose() * e.psi) - Eigen::MatrixXd::Identity(M, M)).cwiseAbs().maxCoeff();
    return e;
}

inline EigenSystem eigendecompose(const TruncatedKernel& k, std::size_t M) {
    return eigendecompose(assemble_operator(k, M));
}

// ---------------------------------------------------------------------------
// initial data on the interior nodes

inline std::vector<double> ibvp_gaussian(const IbvpGrid& g, double center, double sigma) {
    if (!(sigma > 0.0)) throw DomainError("gaussian sigma must be positive");
    std::vector<double> f(g.M);
    for (std::size_t i = 0; i < g.M; ++i) {
        const double u = (g.x(i) - center) / sigma;
        f[i] = std::exp(-0.5 * u * u) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    }
    return f;
}

inline std::vector<double> ibvp_box(const IbvpGrid& g, double a, double b) {
    if (!(b > a)) throw DomainError("box needs a < b");
    std::vector<double> f(g.M);
    for (std::size_t i = 0; i < g.M; ++i) f[i] = (g.x(i) >= a && g.x(i) <= b) ? 1.0 / (b - a) : 0.0;
    return f;
}

/// psi_j with j counted from 1.
inline std::vector<double> ibvp_eigenmode(const EigenSystem& e, std::size_t j) {
    if (j < 1 || j > e.size()) throw DomainError("eigenmode index out of range");
    const auto c = e.psi.col(static_cast<Eigen::Index>(j - 1));
    return {c.data(), c.data() + c.size()};
}

// ---------------------------------------------------------------------------
// solver

struct IbvpOptions {
    RelaxationOptions relaxation;
    double tail_tol = 1e-10; // D-norm tail of dropped modes, relative to ||f||_D
};

struct IbvpSolution {
    std::vector<double> times;
    std::vector<std::vector<double>> fields;
    std::vector<Eigen::VectorXd> modes; // omega_j(t), j < modes_used
    Eigen::VectorXd initial_modes;      // <psi_j, f>, all j
    std::size_t modes_used = 0;
    std::vector<std::string> warnings;
};

namespace detail {

inline Eigen::VectorXd evolve_modes(const TimeKernel& tk, const EigenSystem& e, const Eigen::VectorXd& c,
                                    std::size_t J, double t, const RelaxationOptions& ro) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(J));
    for (std::size_t j = 0; j < J; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        w(jj) = c(jj) == 0.0 ? 0.0 : c(jj) * relaxation_z(tk, e.eigenvalues(jj), t, ro);
    }
    return w;
}

inline std::vector<double> synthesize(const EigenSystem& e, const Eigen::VectorXd& w) {
    const Eigen::VectorXd p = e.psi.leftCols(w.size()) * w;
    return {p.data(), p.data() + p.size()};
}

inline double d_norm(const Eigen::VectorXd& w, const Eigen::VectorXd& lambda) {
    return w.cwiseProduct(lambda.head(w.size())).norm();
}

} // namespace detail

/// p(t) = sum_j <psi_j, f> Z(t, lambda_j) psi_j, truncated where the
/// D-norm tail falls below tail_tol.
inline IbvpSolution solve_ibvp(const TimeKernel& tk, const EigenSystem& e, const std::vector<double>& f,
                               const std::vector<double>& times, const IbvpOptions& opt = {}) {
    if (!std::is_sorted(times.begin(), times.end())) throw DomainError("solve_ibvp: times must ascend");
    for (double t : times)
        if (!(t >= 0.0)) throw DomainError("solve_ibvp: times must be nonnegative");
    IbvpSolution sol;
    sol.initial_modes = e.project(f);
    const Eigen::VectorXd& c = sol.initial_modes;
    const std::size_t M = e.size();

    Eigen::VectorXd weighted = c.cwiseProduct(e.eigenvalues);
    const double total = weighted.norm();
    std::size_t J = M;
    if (total > 0.0) {
        double tail2 = 0.0;
        const double lim2 = opt.tail_tol * total * opt.tail_tol * total;
        while (J > 0 && tail2 + weighted(static_cast<Eigen::Index>(J - 1)) * weighted(static_cast<Eigen::Index>(J - 1)) < lim2) {
            tail2 += weighted(static_cast<Eigen::Index>(J - 1)) * weighted(static_cast<Eigen::Index>(J - 1));
            --J;
        }
    } else {
        J = 0;
    }
    sol.modes_used = J;

    const double energy = c.squaredNorm();
    const std::size_t top = M - M / 10;
    const double top_energy = c.tail(static_cast<Eigen::Index>(M - top)).squaredNorm();
    if (energy > 0.0 && top_energy > 0.01 * energy) {
        std::ostringstream os;
        os << "top decile of modes carries " << 100.0 * top_energy / energy << "% of the initial energy";
        sol.warnings.push_back(os.str());
    }

    for (double t : times) {
        Eigen::VectorXd w = detail::evolve_modes(tk, e, c, J, t, opt.relaxation);
        sol.fields.push_back(J ? detail::synthesize(e, w) : std::vector<double>(M, 0.0));
        sol.modes.push_back(std::move(w));
        sol.times.push_back(t);
    }
    return sol;
}

struct IbvpVerifyOptions {
    double derivative_slack = 0.05;
    double fd_relative_step = 1e-4;
    double decay_factor = 0.5; // ||p(T)||_D < factor ||p(T/10)||_D
    RelaxationOptions relaxation;
};

inline double ibvp_norm_l2(const std::vector<double>& v, const IbvpGrid& g) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s * g.dx());
}

inline PropertyReport verify_ibvp_estimates(const IbvpSolution& sol, const std::vector<double>& f,
                                            const EigenSystem& e, const TimeKernel& tk,
                                            const IbvpVerifyOptions& opt = {}) {
    PropertyReport r;
    const auto& lam = e.eigenvalues;
    const Eigen::VectorXd c = e.project(f);
    const std::size_t J = sol.modes_used;
    const Eigen::VectorXd cJ = c.head(static_cast<Eigen::Index>(J));
    const double f2 = ibvp_norm_l2(f, e.grid);
    const double fD = detail::d_norm(c, lam);
    const std::size_t nt = sol.times.size();

    for (std::size_t i = 0; i < nt; ++i) {
        const double t = sol.times[i];
        const Eigen::VectorXd& w = sol.modes[i];
        r.add_upper("L2 contraction", t, ibvp_norm_l2(sol.fields[i], e.grid), f2);
        const double pD = detail::d_norm(w, lam);
        r.add_upper("D-norm contraction", t, pD, fD);
        // D_(g) omega_j = -lambda_j omega_j
        r.add_upper("D_g bound", t, pD, fD, 1e-12, "sum |lambda_j omega_j|^2");
        if (t > 0.0) {
            const double d = opt.fd_relative_step * t;
            const Eigen::VectorXd a = detail::evolve_modes(tk, e, cJ, J, t + d, opt.relaxation);
            const Eigen::VectorXd b = detail::evolve_modes(tk, e, cJ, J, t - d, opt.relaxation);
            const double value = (a - b).norm() / (2.0 * d); // Parseval in the psi basis
            const double bound = f2 / (std::numbers::e * t) * (1.0 + opt.derivative_slack);
            r.add_upper("time derivative bound", t, value, bound, 0.0, "central difference, m = 1");
        }
    }

    std::vector<std::pair<double, double>> dist;
    for (std::size_t i = 0; i < nt && dist.size() < 3; ++i) {
        if (sol.times[i] <= 0.0) continue;
        dist.emplace_back(sol.times[i], detail::d_norm(sol.modes[i] - cJ, lam));
    }
    if (dist.size() >= 2) {
        bool mono = true;
        for (std::size_t i = 1; i < dist.size(); ++i)
            if (dist[i].second < dist[i - 1].second) mono = false;
        r.add("initial continuity trend", dist.front().first, dist.front().second, dist.back().second,
              dist.back().second - dist.front().second, mono, "||p(t)-f||_D nondecreasing over smallest times");
    }

    if (nt > 0 && sol.times.back() > 0.0) {
        const double T = sol.times.back();
        const Eigen::VectorXd early = detail::evolve_modes(tk, e, cJ, J, T / 10.0, opt.relaxation);
        const double late = detail::d_norm(sol.modes.back(), lam);
        const double ref = opt.decay_factor * detail::d_norm(early, lam);
        const bool zero = ref == 0.0 && late == 0.0;
        r.add("large-time decay", T, late, ref, ref > 0.0 ? (ref - late) / ref : 0.0, zero || late < ref,
              "||p(T)||_D < factor ||p(T/10)||_D");
    }

    // |omega_j| nonincreasing in t
    double worst = 0.0;
    for (std::size_t i = 1; i < nt; ++i)
        for (Eigen::Index j = 0; j < sol.modes[i].size(); ++j) {
            const double prev = std::abs(sol.modes[i - 1](j));
            const double growth = std::abs(sol.modes[i](j)) - prev;
            worst = std::max(worst, growth / std::max(prev, 1e-300));
        }
    if (nt > 1) r.add("mode energy monotone", sol.times.back(), worst, 1e-12, 1e-12 - worst, worst <= 1e-12);
    for (const auto& w : sol.warnings) r.warnings.push_back(w);
    return r;
}

} // namespace nonlocal
