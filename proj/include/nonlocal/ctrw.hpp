#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "nonlocal/cauchy.hpp"
#include "nonlocal/errors.hpp"
#include "nonlocal/relaxation.hpp"
#include "nonlocal/space_kernel.hpp"
#include "nonlocal/time_kernel.hpp"

namespace nonlocal {

// ---------------------------------------------------------------------------
// random streams

inline std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Counter-based stream: the n-th draw is a pure function of (key, n), so
/// one stream per particle needs no shared state.
class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept
        : key_(splitmix64(splitmix64(seed) ^ (stream * 0xd1342543de82ef95ULL + 1))) {}

    std::uint64_t next() noexcept { return splitmix64(key_ + 0x9e3779b97f4a7c15ULL * counter_++); }
    /// uniform on the open interval (0, 1)
    double uniform() noexcept { return (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53; }
    double exponential() noexcept { return -std::log(uniform()); }
    [[nodiscard]] std::uint64_t draws() const noexcept { return counter_; }

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

// ---------------------------------------------------------------------------
// sampler tables

/// Tabulated CDF with inverse-CDF sampling. With `log_abscissa` the
/// abscissae are positive and interpolation runs in log t; power laws extend
/// the head (cdf ~ c t^p) and the tail (1 - cdf ~ c t^-q).
struct SamplerTable {
    enum class Method { ClosedForm, TransformInverted };

    std::string source;
    Method method = Method::TransformInverted;
    std::vector<double> abscissae;
    std::vector<double> cdf;
    bool log_abscissa = false;
    double head_exponent = 0.0;
    double tail_exponent = 0.0;
    double clip_mass = 0.0;

    [[nodiscard]] double inverse(double u) const {
        const std::size_t n = cdf.size();
        if (log_abscissa) {
            if (u <= cdf.front()) return abscissae.front() * std::pow(u / cdf.front(), 1.0 / head_exponent);
            if (u >= cdf.back())
                return abscissae.back() * std::pow((1.0 - u) / (1.0 - cdf.back()), -1.0 / tail_exponent);
        } else {
            if (u <= cdf.front()) return abscissae.front();
            if (u >= cdf.back()) return abscissae.back();
        }
        const std::size_t i = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        const std::size_t lo = std::min(i, n - 1) - 1;
        const double w = (u - cdf[lo]) / (cdf[lo + 1] - cdf[lo]);
        if (log_abscissa)
            return std::exp(std::log(abscissae[lo]) + w * (std::log(abscissae[lo + 1]) - std::log(abscissae[lo])));
        return abscissae[lo] + w * (abscissae[lo + 1] - abscissae[lo]);
    }
};

struct WaitingSamplerOptions {
    double renewal_scale = 1.0; // waiting law 1/(1 + eps s g(s))
    bool force_table = false;
    int points_per_decade = 40;
    double head_mass = 1e-3; // 1 - survival at the first abscissa
    double tail_mass = 1e-3; // survival at the last abscissa
};

/// Waiting times with Laplace transform 1/(1 + eps s g(s)); survival is
/// Z(t, 1/eps).
class WaitingSampler {
public:
    [[nodiscard]] double operator()(CounterRng& rng) const {
        if (caputo_) {
            const double a = *caputo_;
            const double u = rng.uniform(), v = rng.uniform();
            if (a == 1.0) return -std::log(u) * scale_;
            const double c = std::sin(a * std::numbers::pi) / std::tan(a * std::numbers::pi * v) -
                             std::cos(a * std::numbers::pi);
            return -std::log(u) * std::pow(c, 1.0 / a) * scale_;
        }
        return table_->inverse(rng.uniform());
    }

    [[nodiscard]] bool has_table() const noexcept { return table_.has_value(); }
    [[nodiscard]] const SamplerTable& table() const { return *table_; }
    [[nodiscard]] double renewal_scale() const noexcept { return eps_; }

    /// Survival as represented by the sampler.
    [[nodiscard]] double survival(double t) const {
        if (t <= 0.0) return 1.0;
        if (caputo_) return ml(*caputo_, 1.0, -std::pow(t, *caputo_) / eps_);
        const auto& T = *table_;
        if (t <= T.abscissae.front()) return 1.0 - T.cdf.front() * std::pow(t / T.abscissae.front(), T.head_exponent);
        if (t >= T.abscissae.back())
            return (1.0 - T.cdf.back()) * std::pow(t / T.abscissae.back(), -T.tail_exponent);
        const std::size_t i = static_cast<std::size_t>(
            std::upper_bound(T.abscissae.begin(), T.abscissae.end(), t) - T.abscissae.begin());
        const double w = std::log(t / T.abscissae[i - 1]) / std::log(T.abscissae[i] / T.abscissae[i - 1]);
        return 1.0 - (T.cdf[i - 1] + w * (T.cdf[i] - T.cdf[i - 1]));
    }

    friend WaitingSampler build_waiting_sampler(const TimeKernel&, const WaitingSamplerOptions&);

private:
    std::optional<double> caputo_;
    double scale_ = 1.0;
    double eps_ = 1.0;
    std::optional<SamplerTable> table_;
};

inline WaitingSampler build_waiting_sampler(const TimeKernel& kernel, const WaitingSamplerOptions& opt = {}) {
    if (!(opt.renewal_scale > 0.0)) throw DomainError("renewal scale must be positive");
    WaitingSampler s;
    s.eps_ = opt.renewal_scale;
    double alpha = 0.0;
    if (!opt.force_table && kernel.is_pure_caputo(&alpha)) {
        s.caputo_ = alpha;
        s.scale_ = std::pow(opt.renewal_scale, 1.0 / alpha);
        return s;
    }

    RelaxationOptions ro;
    ro.method = RelaxationMethod::Inverted;
    const double lambda = 1.0 / opt.renewal_scale;
    auto surv = [&](double t) { return relaxation_z(kernel, lambda, t, ro); };

    double lo = 1e-4, hi = 1e3;
    while (1.0 - surv(lo) > opt.head_mass && lo > 1e-300) lo /= 10.0;
    while (surv(hi) > opt.tail_mass) {
        hi *= 10.0;
        if (hi > 1e12) {
            std::ostringstream os;
            os << "waiting-time survival still " << surv(hi) << " at t=" << hi;
            throw InversionQualityError(os.str(), surv(hi));
        }
    }
    const int n = static_cast<int>(std::ceil(std::log10(hi / lo) * opt.points_per_decade)) + 1;
    SamplerTable T;
    T.source = kernel.describe();
    T.log_abscissa = true;
    double prev = 1.0;
    for (double t : log_grid(lo, hi, n)) {
        const double p = surv(t);
        if (!std::isfinite(p) || p > prev + 1e-6 || p < -1e-6) {
            std::ostringstream os;
            os << "waiting-time survival not monotone at t=" << t << " (" << p << " after " << prev << ")";
            throw InversionQualityError(os.str(), p);
        }
        if (p >= prev || p <= 0.0) continue; // drop flat or round-off points
        T.abscissae.push_back(t);
        T.cdf.push_back(1.0 - p);
        prev = p;
    }
    if (T.cdf.size() < 4) throw InversionQualityError("waiting-time table too short", 0.0);
    T.head_exponent = std::log(T.cdf[1] / T.cdf[0]) / std::log(T.abscissae[1] / T.abscissae[0]);
    const std::size_t m = T.cdf.size();
    const std::size_t k = m > static_cast<std::size_t>(opt.points_per_decade) ? m - 1 - opt.points_per_decade : 0;
    T.tail_exponent = -std::log((1.0 - T.cdf[m - 1]) / (1.0 - T.cdf[k])) / std::log(T.abscissae[m - 1] / T.abscissae[k]);
    if (!(T.head_exponent > 0.0) || !(T.tail_exponent > 0.0))
        throw InversionQualityError("waiting-time table has a nonpositive power-law extension", T.tail_exponent);
    s.table_ = std::move(T);
    return s;
}

struct JumpSamplerOptions {
    double renewal_scale = 1.0; // jump law has characteristic function exp(-eps zeta)
    bool force_table = false;
    double half_width = 64.0;
    std::size_t points = 16384;
};

/// Jumps with characteristic function exp(-eps zeta(xi)).
class JumpSampler {
public:
    [[nodiscard]] double operator()(CounterRng& rng) const {
        if (!stable_.empty()) {
            double x = 0.0;
            for (const auto& [index, scale] : stable_) x += scale * symmetric_stable(index, rng);
            return x;
        }
        return table_->inverse(rng.uniform());
    }

    [[nodiscard]] bool has_table() const noexcept { return table_.has_value(); }
    [[nodiscard]] const SamplerTable& table() const { return *table_; }
    [[nodiscard]] const std::vector<std::string>& warnings() const noexcept { return warnings_; }

    /// Chambers-Mallows-Stuck, characteristic function exp(-|xi|^a).
    static double symmetric_stable(double a, CounterRng& rng) {
        const double v = std::numbers::pi * (rng.uniform() - 0.5);
        const double w = rng.exponential();
        if (a == 1.0) return std::tan(v);
        if (a == 2.0) return 2.0 * std::sqrt(w) * std::sin(v);
        return std::sin(a * v) / std::pow(std::cos(v), 1.0 / a) *
               std::pow(std::cos((1.0 - a) * v) / w, (1.0 - a) / a);
    }

    friend JumpSampler build_jump_sampler(const SpaceKernel&, const JumpSamplerOptions&);

private:
    std::vector<std::pair<double, double>> stable_; // (index, scale)
    std::optional<SamplerTable> table_;
    std::vector<std::string> warnings_;
};

inline JumpSampler build_jump_sampler(const SpaceKernel& kernel, const JumpSamplerOptions& opt = {}) {
    if (!(opt.renewal_scale > 0.0)) throw DomainError("renewal scale must be positive");
    const double eps = opt.renewal_scale;
    JumpSampler s;
    if (!opt.force_table) {
        if (auto* r = std::get_if<SpaceKernel::Riesz>(&kernel.variant())) {
            s.stable_.emplace_back(2.0 * r->beta, std::pow(eps, 1.0 / (2.0 * r->beta)));
            return s;
        }
        if (auto* m = std::get_if<SpaceKernel::MultiTerm>(&kernel.variant())) {
            // independent stable components, one per term
            for (std::size_t i = 0; i < m->orders.size(); ++i)
                s.stable_.emplace_back(2.0 * m->orders[i], std::pow(eps * m->coefficients[i], 1.0 / (2.0 * m->orders[i])));
            return s;
        }
    }

    const Grid g(opt.half_width, opt.points);
    const SymbolGrid zeta(kernel, g);
    std::vector<std::complex<double>> c(g.size());
    for (std::size_t m = 0; m < c.size(); ++m) c[m] = std::exp(-eps * zeta[m]) / std::sqrt(2.0 * std::numbers::pi);
    const double cutoff = std::exp(-eps * zeta[g.size() / 2]);
    if (cutoff > 1e-8) {
        std::ostringstream os;
        os << "jump characteristic function is " << cutoff << " at the largest frequency; grid too coarse";
        s.warnings_.push_back(os.str());
    }
    std::vector<double> w = inverse_spectrum(g, c);

    double neg = 0.0, total = 0.0;
    for (double& v : w) {
        total += std::abs(v);
        if (v < 0.0) {
            neg -= v;
            v = 0.0;
        }
    }
    const double clip = total > 0.0 ? neg / total : 1.0;
    if (clip >= 1e-3) {
        std::ostringstream os;
        os << "jump density reconstruction clipped mass " << clip << "; widen or refine the grid";
        throw DensityReconstructionError(os.str(), clip);
    }
    if (clip >= 1e-4) {
        std::ostringstream os;
        os << "jump density clip mass " << clip;
        s.warnings_.push_back(os.str());
    }
    const double wmax = *std::max_element(w.begin(), w.end());
    if (std::max(w.front(), w.back()) > 1e-8 * wmax) s.warnings_.push_back("jump density not negligible at grid edge");

    SamplerTable T;
    T.source = kernel.describe();
    T.clip_mass = clip;
    const double dx = g.dx();
    T.abscissae.reserve(g.size() + 1);
    T.cdf.reserve(g.size() + 1);
    double acc = 0.0;
    T.abscissae.push_back(g.x(0) - 0.5 * dx);
    T.cdf.push_back(0.0);
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (w[i] <= 0.0) continue; // keep the CDF strictly increasing
        acc += w[i];
        T.abscissae.push_back(g.x(i) + 0.5 * dx);
        T.cdf.push_back(acc);
    }
    for (double& v : T.cdf) v /= acc;
    // first kept cell may start well right of -L
    for (std::size_t i = 0; i < g.size(); ++i)
        if (w[i] > 0.0) {
            T.abscissae.front() = g.x(i) - 0.5 * dx;
            break;
        }
    s.table_ = std::move(T);
    return s;
}

// ---------------------------------------------------------------------------
// ensemble

struct EnsembleOptions {
    double renewal_scale = 1.0;
    unsigned threads = 1;
    bool record_trajectories = false; // only honoured for P <= 100
    std::uint64_t max_renewals = 100000000;
    WaitingSamplerOptions waiting;
    JumpSamplerOptions jumps;
};

struct Trajectory {
    std::vector<double> epochs; // renewal times
    std::vector<double> jumps;
};

struct EnsembleResult {
    std::size_t particles = 0;
    std::vector<double> times;
    std::vector<double> positions; // particle-major, particles x times
    std::uint64_t seed = 0;
    double renewal_scale = 1.0;
    std::vector<Trajectory> trajectories;
    std::vector<std::string> warnings;

    [[nodiscard]] double position(std::size_t p, std::size_t k) const { return positions[p * times.size() + k]; }
};

namespace detail {

inline void run_particles(const WaitingSampler& wait, const JumpSampler& jump, const std::vector<double>& times,
                          std::uint64_t seed, std::size_t begin, std::size_t end, std::uint64_t max_renewals,
                          double* out, Trajectory* traj) {
    const std::size_t nt = times.size();
    for (std::size_t p = begin; p < end; ++p) {
        CounterRng rng(seed, p);
        double clock = wait(rng), x = 0.0;
        std::uint64_t renewals = 0;
        for (std::size_t k = 0; k < nt; ++k) {
            while (clock <= times[k]) {
                const double j = jump(rng);
                x += j;
                if (traj) {
                    traj[p - begin].epochs.push_back(clock);
                    traj[p - begin].jumps.push_back(j);
                }
                clock += wait(rng);
                if (++renewals > max_renewals)
                    throw NumericalError("particle exceeded the renewal budget; renewal scale too small?",
                                         static_cast<double>(renewals));
            }
            out[p * nt + k] = x;
        }
    }
}

} // namespace detail

/// Uncoupled CTRW: waiting law 1/(1 + eps s g), jump law exp(-eps zeta).
/// Particle p always uses stream (seed, p), so the result does not depend
/// on the thread count.
inline EnsembleResult simulate_ensemble(const TimeKernel& time_kernel, const SpaceKernel& space_kernel,
                                        std::size_t P, const std::vector<double>& times, std::uint64_t seed,
                                        const EnsembleOptions& opt = {}) {
    if (P == 0) throw DomainError("simulate_ensemble: need at least one particle");
    if (times.empty()) throw DomainError("simulate_ensemble: no observation times");
    for (std::size_t i = 0; i < times.size(); ++i)
        if (!(times[i] > 0.0) || (i && !(times[i] > times[i - 1])))
            throw DomainError("simulate_ensemble: times must be positive and ascending");

    WaitingSamplerOptions wo = opt.waiting;
    wo.renewal_scale = opt.renewal_scale;
    JumpSamplerOptions jo = opt.jumps;
    jo.renewal_scale = opt.renewal_scale;
    const WaitingSampler wait = build_waiting_sampler(time_kernel, wo);
    const JumpSampler jump = build_jump_sampler(space_kernel, jo);

    EnsembleResult r;
    r.particles = P;
    r.times = times;
    r.seed = seed;
    r.renewal_scale = opt.renewal_scale;
    r.positions.assign(P * times.size(), 0.0);
    r.warnings = jump.warnings();
    const bool record = opt.record_trajectories && P <= 100;
    if (record) r.trajectories.resize(P);
    if (opt.record_trajectories && !record) r.warnings.push_back("trajectory recording needs P <= 100; skipped");

    const unsigned nthreads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(P)));
    if (nthreads == 1) {
        detail::run_particles(wait, jump, times, seed, 0, P, opt.max_renewals, r.positions.data(),
                              record ? r.trajectories.data() : nullptr);
        return r;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(nthreads);
    const std::size_t chunk = (P + nthreads - 1) / nthreads;
    for (unsigned w = 0; w < nthreads; ++w) {
        const std::size_t b = std::min(P, w * chunk), e = std::min(P, b + chunk);
        pool.emplace_back([&, w, b, e] {
            try {
                detail::run_particles(wait, jump, times, seed, b, e, opt.max_renewals, r.positions.data(),
                                      record ? r.trajectories.data() + b : nullptr);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
    return r;
}

struct HistogramSpec {
    double lo = -20.0;
    double hi = 20.0;
    std::size_t bins = 401;
};

struct Histogram {
    double time = 0.0;
    std::vector<double> centers;
    std::vector<double> density; // normalized by all particles, so mass outside [lo, hi] is missing
    double outside = 0.0;        // fraction of particles outside the range
};

struct EcfSample {
    double time = 0.0;
    double xi = 0.0;
    double re = 0.0;
    double im = 0.0;
    double stderr_re = 0.0;
};

struct EmpiricalStatistics {
    std::vector<double> times;
    std::vector<double> msd;
    std::vector<double> msd_stderr;
    std::vector<Histogram> histograms;
    std::vector<EcfSample> ecf;
};

inline EmpiricalStatistics empirical_statistics(const EnsembleResult& r, const HistogramSpec& hs = {},
                                                const std::vector<double>& xis = {}) {
    if (!(hs.hi > hs.lo) || hs.bins == 0) throw DomainError("histogram range is empty");
    EmpiricalStatistics s;
    s.times = r.times;
    const std::size_t P = r.particles, nt = r.times.size();
    const double width = (hs.hi - hs.lo) / static_cast<double>(hs.bins);
    for (std::size_t k = 0; k < nt; ++k) {
        double m = 0.0, m2 = 0.0;
        Histogram h;
        h.time = r.times[k];
        h.density.assign(hs.bins, 0.0);
        std::size_t out = 0;
        for (std::size_t p = 0; p < P; ++p) {
            const double x = r.position(p, k);
            const double x2 = x * x;
            m += x2;
            m2 += x2 * x2;
            const double u = (x - hs.lo) / width;
            if (u >= 0.0 && u < static_cast<double>(hs.bins))
                h.density[static_cast<std::size_t>(u)] += 1.0;
            else
                ++out;
        }
        m /= static_cast<double>(P);
        m2 /= static_cast<double>(P);
        s.msd.push_back(m);
        s.msd_stderr.push_back(P > 1 ? std::sqrt(std::max(0.0, m2 - m * m) / static_cast<double>(P - 1)) : 0.0);
        for (std::size_t b = 0; b < hs.bins; ++b) {
            h.centers.push_back(hs.lo + (static_cast<double>(b) + 0.5) * width);
            h.density[b] /= static_cast<double>(P) * width;
        }
        h.outside = static_cast<double>(out) / static_cast<double>(P);
        s.histograms.push_back(std::move(h));

        for (double xi : xis) {
            double c = 0.0, c2 = 0.0, sn = 0.0;
            for (std::size_t p = 0; p < P; ++p) {
                const double a = xi * r.position(p, k);
                const double cv = std::cos(a);
                c += cv;
                c2 += cv * cv;
                sn += std::sin(a);
            }
            c /= static_cast<double>(P);
            c2 /= static_cast<double>(P);
            s.ecf.push_back({r.times[k], xi, c, sn / static_cast<double>(P),
                             P > 1 ? std::sqrt(std::max(0.0, c2 - c * c) / static_cast<double>(P - 1)) : 0.0});
        }
    }
    return s;
}

/// Exact characteristic function of the eps-scaled walk: Z(t, (1 - e^{-eps zeta}) / eps).
inline double ctrw_characteristic_function(const TimeKernel& tk, double zeta_value, double t, double eps,
                                           const RelaxationOptions& ro = {}) {
    return relaxation_z(tk, -std::expm1(-eps * zeta_value) / eps, t, ro);
}

} // namespace nonlocal
