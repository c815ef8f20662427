#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "nonlocal/errors.hpp"
#include "nonlocal/fft.hpp"
#include "nonlocal/property_report.hpp"
#include "nonlocal/relaxation.hpp"
#include "nonlocal/space_kernel.hpp"
#include "nonlocal/time_kernel.hpp"

namespace nonlocal {

/// Periodic grid x_i = -L + i dx on [-L, L), dx = 2L/N, and its dual
/// frequencies xi = pi k / L, k in [-N/2, N/2), stored in DFT order.
class Grid {
public:
    Grid(double half_width, std::size_t n) : L_(half_width), N_(n) {
        if (!(half_width > 0.0) || !std::isfinite(half_width)) throw DomainError("grid half-width must be positive");
        if (n < 256 || (n & (n - 1)) != 0) throw DomainError("grid size must be a power of two >= 256");
    }

    [[nodiscard]] double half_width() const noexcept { return L_; }
    [[nodiscard]] std::size_t size() const noexcept { return N_; }
    [[nodiscard]] double dx() const noexcept { return 2.0 * L_ / static_cast<double>(N_); }
    [[nodiscard]] double dxi() const noexcept { return std::numbers::pi / L_; }
    [[nodiscard]] double x(std::size_t i) const noexcept { return -L_ + static_cast<double>(i) * dx(); }
    /// Signed frequency index of DFT slot m.
    [[nodiscard]] long mode(std::size_t m) const noexcept {
        const long half = static_cast<long>(N_ / 2);
        const long k = static_cast<long>(m);
        return k < half ? k : k - static_cast<long>(N_);
    }
    [[nodiscard]] double xi(std::size_t m) const noexcept { return dxi() * static_cast<double>(mode(m)); }

    bool operator==(const Grid& o) const noexcept { return L_ == o.L_ && N_ == o.N_; }

private:
    double L_;
    std::size_t N_;
};

/// Samples on a Grid with optional spectral coefficients
/// p~(xi_m) = (2 pi)^{-1/2} sum_i p_i e^{-i xi_m x_i} dx.
struct Field {
    Grid grid;
    std::vector<double> values;
    std::vector<std::complex<double>> spectrum; // empty until computed

    explicit Field(Grid g) : grid(g), values(g.size(), 0.0) {}
    Field(Grid g, std::vector<double> v) : grid(g), values(std::move(v)) {
        if (values.size() != grid.size()) throw DomainError("field size does not match grid");
    }

    [[nodiscard]] bool has_spectrum() const noexcept { return !spectrum.empty(); }
    [[nodiscard]] double mass() const {
        double s = 0.0;
        for (double v : values) s += v;
        return s * grid.dx();
    }
};

inline std::vector<std::complex<double>> forward_spectrum(const Grid& g, const std::vector<double>& v) {
    std::vector<std::complex<double>> c(v.begin(), v.end());
    detail::dft(c, -1);
    const double scale = g.dx() / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t m = 0; m < c.size(); ++m) c[m] *= (g.mode(m) % 2 ? -scale : scale);
    return c;
}

/// Inverse of forward_spectrum; returns real part, reports the largest
/// discarded imaginary part through `imag_residue`.
inline std::vector<double> inverse_spectrum(const Grid& g, std::vector<std::complex<double>> c,
                                            double* imag_residue = nullptr) {
    const double scale = g.dxi() / std::sqrt(2.0 * std::numbers::pi);
    for (std::size_t m = 0; m < c.size(); ++m) c[m] *= (g.mode(m) % 2 ? -scale : scale);
    detail::dft(c, +1);
    std::vector<double> out(c.size());
    double im = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        out[i] = c[i].real();
        im = std::max(im, std::abs(c[i].imag()));
    }
    if (imag_residue) *imag_residue = im;
    return out;
}

inline void ensure_spectrum(Field& f) {
    if (!f.has_spectrum()) f.spectrum = forward_spectrum(f.grid, f.values);
}

/// zeta sampled on a grid's frequencies. Computed once, read-only afterwards.
class SymbolGrid {
public:
    SymbolGrid(const SpaceKernel& kernel, const Grid& grid) : grid_(grid), zeta_(grid.size()) {
        const std::size_t n = grid.size();
        for (std::size_t m = 0; m <= n / 2; ++m) {
            const double z = kernel.symbol(grid.dxi() * static_cast<double>(m));
            zeta_[m] = z;
            if (m > 0 && m < n / 2) zeta_[n - m] = z;
        }
    }
    /// Arbitrary multiplier (tests use zeta = 0).
    SymbolGrid(const Grid& grid, std::vector<double> zeta) : grid_(grid), zeta_(std::move(zeta)) {
        if (zeta_.size() != grid.size()) throw DomainError("symbol grid size mismatch");
    }

    [[nodiscard]] const Grid& grid() const noexcept { return grid_; }
    [[nodiscard]] double operator[](std::size_t m) const noexcept { return zeta_[m]; }
    [[nodiscard]] const std::vector<double>& values() const noexcept { return zeta_; }

private:
    Grid grid_;
    std::vector<double> zeta_;
};

// ---------------------------------------------------------------------------
// norms

inline double norm_l2(const Field& f) {
    double s = 0.0;
    for (double v : f.values) s += v * v;
    return std::sqrt(s * f.grid.dx());
}

inline double norm_l2_spectral(Field f) {
    ensure_spectrum(f);
    double s = 0.0;
    for (const auto& c : f.spectrum) s += std::norm(c);
    return std::sqrt(s * f.grid.dxi());
}

/// ||(1 + zeta) F f||_{L^2}
inline double norm_mk(Field f, const SymbolGrid& zeta) {
    if (!(f.grid == zeta.grid())) throw DomainError("norm_mk: grid mismatch");
    ensure_spectrum(f);
    double s = 0.0;
    for (std::size_t m = 0; m < f.spectrum.size(); ++m) s += std::norm((1.0 + zeta[m]) * f.spectrum[m]);
    return std::sqrt(s * f.grid.dxi());
}

inline double norm_mk(const Field& f, const SpaceKernel& kernel) { return norm_mk(f, SymbolGrid(kernel, f.grid)); }

/// ||zeta F f||_{L^2}, the L^2 norm of the generalized Laplacian of f.
inline double norm_symbol_weighted(Field f, const SymbolGrid& zeta) {
    ensure_spectrum(f);
    double s = 0.0;
    for (std::size_t m = 0; m < f.spectrum.size(); ++m) s += std::norm(zeta[m] * f.spectrum[m]);
    return std::sqrt(s * f.grid.dxi());
}

/// D_(k) f = -F^{-1}(zeta F f)
inline Field apply_generalized_laplacian(Field f, const SymbolGrid& zeta) {
    ensure_spectrum(f);
    std::vector<std::complex<double>> c(f.spectrum.size());
    for (std::size_t m = 0; m < c.size(); ++m) c[m] = -zeta[m] * f.spectrum[m];
    Field out(f.grid, inverse_spectrum(f.grid, c));
    out.spectrum = std::move(c);
    return out;
}

inline Field apply_generalized_laplacian(const Field& f, const SpaceKernel& kernel) {
    return apply_generalized_laplacian(f, SymbolGrid(kernel, f.grid));
}

// ---------------------------------------------------------------------------
// initial data

inline Field gaussian_field(const Grid& g, double center, double sigma) {
    if (!(sigma > 0.0)) throw DomainError("gaussian sigma must be positive");
    Field f(g);
    const double c = 1.0 / (sigma * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double u = (g.x(i) - center) / sigma;
        f.values[i] = c * std::exp(-0.5 * u * u);
    }
    return f;
}

/// Normalized indicator of [a, b].
inline Field box_field(const Grid& g, double a, double b) {
    if (!(b > a)) throw DomainError("box needs a < b");
    Field f(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.x(i);
        f.values[i] = (x >= a && x <= b) ? 1.0 : 0.0;
    }
    const double m = f.mass();
    if (m > 0.0)
        for (auto& v : f.values) v /= m;
    return f;
}

// ---------------------------------------------------------------------------
// solver

struct CauchyOptions {
    RelaxationOptions relaxation;
    bool strict = false;             // boundary density warning becomes an error
    double boundary_tol = 1e-6;
    double initial_boundary_tol = 1e-12;
};

struct CauchySolution {
    std::vector<double> times;
    std::vector<Field> fields;
    std::vector<double> boundary_density; // max |p| over the two edge cells, per time
    double max_imag_residue = 0.0;
    std::vector<std::string> warnings;
};

namespace detail {

inline double edge_density(const Field& f) {
    const std::size_t n = f.values.size();
    return std::max({std::abs(f.values[0]), std::abs(f.values[1]), std::abs(f.values[n - 1])});
}

inline Field evolve(const TimeKernel& tk, const SymbolGrid& zeta, const Field& initial, double t,
                    const RelaxationOptions& ropt, double* imag_residue) {
    const Grid& g = initial.grid;
    const std::size_t n = g.size();
    std::vector<double> Z(n / 2 + 1);
    for (std::size_t m = 0; m <= n / 2; ++m) Z[m] = relaxation_z(tk, zeta[m], t, ropt);
    std::vector<std::complex<double>> c(n);
    for (std::size_t m = 0; m < n; ++m) {
        const std::size_t k = m <= n / 2 ? m : n - m;
        c[m] = initial.spectrum[m] * Z[k];
    }
    Field out(g, inverse_spectrum(g, c, imag_residue));
    out.spectrum = std::move(c);
    return out;
}

} // namespace detail

/// p~(t, xi_m) = f~(xi_m) Z(t, zeta(xi_m)), then inverse DFT.
inline CauchySolution solve_cauchy(const TimeKernel& time_kernel, const SymbolGrid& zeta, Field initial,
                                   const std::vector<double>& times, const CauchyOptions& opt = {}) {
    if (!(initial.grid == zeta.grid())) throw DomainError("solve_cauchy: grid mismatch");
    if (!std::is_sorted(times.begin(), times.end())) throw DomainError("solve_cauchy: times must ascend");
    for (double t : times)
        if (!(t >= 0.0)) throw DomainError("solve_cauchy: times must be nonnegative");
    ensure_spectrum(initial);

    CauchySolution sol;
    if (detail::edge_density(initial) > opt.initial_boundary_tol) {
        std::ostringstream os;
        os << "initial data is " << detail::edge_density(initial) << " at the grid boundary";
        sol.warnings.push_back(os.str());
    }
    for (double t : times) {
        double im = 0.0;
        Field p = detail::evolve(time_kernel, zeta, initial, t, opt.relaxation, &im);
        sol.max_imag_residue = std::max(sol.max_imag_residue, im);
        const double edge = detail::edge_density(p);
        sol.boundary_density.push_back(edge);
        if (edge > opt.boundary_tol) {
            std::ostringstream os;
            os << "density " << edge << " at the grid boundary at t=" << t << "; domain may be too small";
            if (opt.strict) throw BoundaryMassError(os.str(), edge);
            sol.warnings.push_back(os.str());
        }
        sol.times.push_back(t);
        sol.fields.push_back(std::move(p));
    }
    if (sol.max_imag_residue > 1e-10) {
        std::ostringstream os;
        os << "imaginary residue " << sol.max_imag_residue << " discarded";
        sol.warnings.push_back(os.str());
    }
    return sol;
}

inline CauchySolution solve_cauchy(const TimeKernel& time_kernel, const SpaceKernel& space_kernel,
                                   const Field& initial, const std::vector<double>& times,
                                   const CauchyOptions& opt = {}) {
    return solve_cauchy(time_kernel, SymbolGrid(space_kernel, initial.grid), initial, times, opt);
}

// ---------------------------------------------------------------------------
// estimates

struct CauchyVerifyOptions {
    double derivative_slack = 0.05; // finite-difference allowance on the 1/(e t) bound
    double fd_relative_step = 1e-4;
    double positivity_tol = 1e-8;
    double bound_tol = 1e-8;
    RelaxationOptions relaxation;
};

/// Checks contraction in L^2 and M_(k), the t -> 0 trend, the first
/// derivative bound, the D_(g) bound, large-time decay, positivity and
/// boundedness on a computed solution.
inline PropertyReport verify_cauchy_estimates(const CauchySolution& sol, Field initial,
                                              const TimeKernel& time_kernel, const SymbolGrid& zeta,
                                              const CauchyVerifyOptions& opt = {}) {
    PropertyReport r;
    ensure_spectrum(initial);
    const double f2 = norm_l2(initial);
    const double fmk = norm_mk(initial, zeta);
    const std::size_t nt = sol.times.size();

    for (std::size_t i = 0; i < nt; ++i) {
        const double t = sol.times[i];
        const Field& p = sol.fields[i];
        r.add_upper("L2 contraction", t, norm_l2(p), f2);
        r.add_upper("Mk contraction", t, norm_mk(p, zeta), fmk);
        r.add_upper("D_g bound", t, norm_symbol_weighted(p, zeta), fmk);
        if (t > 0.0) {
            const double d = opt.fd_relative_step * t;
            double im;
            Field a = detail::evolve(time_kernel, zeta, initial, t + d, opt.relaxation, &im);
            Field b = detail::evolve(time_kernel, zeta, initial, t - d, opt.relaxation, &im);
            std::vector<double> dp(a.values.size());
            for (std::size_t j = 0; j < dp.size(); ++j) dp[j] = (a.values[j] - b.values[j]) / (2.0 * d);
            const double value = norm_l2(Field(initial.grid, dp));
            const double bound = f2 / (std::numbers::e * t) * (1.0 + opt.derivative_slack);
            r.add_upper("time derivative bound", t, value, bound, 0.0, "central difference, m = 1");
        }
    }

    // distance to f in M_(k) shrinks as t -> 0 (three smallest positive times)
    std::vector<std::pair<double, double>> dist;
    for (std::size_t i = 0; i < nt && dist.size() < 3; ++i) {
        if (sol.times[i] <= 0.0) continue;
        std::vector<double> diff(initial.values.size());
        for (std::size_t j = 0; j < diff.size(); ++j) diff[j] = sol.fields[i].values[j] - initial.values[j];
        dist.emplace_back(sol.times[i], norm_mk(Field(initial.grid, diff), zeta));
    }
    if (dist.size() >= 2) {
        bool mono = true;
        for (std::size_t i = 1; i < dist.size(); ++i)
            if (dist[i].second < dist[i - 1].second) mono = false;
        r.add("initial continuity trend", dist.front().first, dist.front().second, dist.back().second,
              dist.back().second - dist.front().second, mono, "||p(t)-f||_Mk nondecreasing over smallest times");
    }

    // large-time decay: ||p(T)||_Mk < ||p(T/10)||_Mk
    if (nt > 0 && sol.times.back() > 0.0) {
        const double T = sol.times.back();
        double im;
        Field early = detail::evolve(time_kernel, zeta, initial, T / 10.0, opt.relaxation, &im);
        const double late = norm_mk(sol.fields.back(), zeta);
        const double ref = norm_mk(early, zeta);
        const bool zero = ref == 0.0 && late == 0.0;
        r.add("large-time decay", T, late, ref, ref > 0.0 ? (ref - late) / ref : 0.0, zero || late < ref,
              "||p(T)||_Mk < ||p(T/10)||_Mk");
    }

    const double fmin = *std::min_element(initial.values.begin(), initial.values.end());
    const double fmax = *std::max_element(initial.values.begin(), initial.values.end());
    for (std::size_t i = 0; i < nt; ++i) {
        const auto& v = sol.fields[i].values;
        const double pmin = *std::min_element(v.begin(), v.end());
        const double pmax = *std::max_element(v.begin(), v.end());
        if (fmin >= 0.0)
            r.add("positivity", sol.times[i], pmin, -opt.positivity_tol, pmin + opt.positivity_tol,
                  pmin >= -opt.positivity_tol);
        r.add("boundedness", sol.times[i], pmax, fmax + opt.bound_tol, fmax + opt.bound_tol - pmax,
              pmax <= fmax + opt.bound_tol);
    }
    if (fmin < 0.0) r.warnings.push_back("initial data has a negative part; positivity check skipped");
    for (const auto& w : sol.warnings) r.warnings.push_back(w);
    return r;
}

} // namespace nonlocal
