#pragma once

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "nonlocal/nonlocal.hpp"

namespace nonlocal::cli {

enum ExitCode : int { kOk = 0, kChecksFailed = 1, kUsage = 2, kNumerical = 3 };

struct GlobalFlags {
    std::string config;
    std::string out; // overrides [output] directory
    unsigned threads = 1;
    bool strict = false;
};

struct Context {
    RunConfig cfg;
    GlobalFlags flags;
    std::filesystem::path out;
    std::vector<std::string> provenance;
    std::ostream* log = &std::cout;
};

inline std::string time_tag(double t) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", t);
    return buf;
}

inline nlohmann::json report_json(const PropertyReport& r) {
    nlohmann::json j;
    j["all_passed"] = r.all_passed();
    j["entries"] = nlohmann::json::array();
    for (const auto& e : r.entries)
        j["entries"].push_back({{"name", e.name},
                                {"time", e.time},
                                {"value", e.value},
                                {"bound", e.bound},
                                {"margin", e.margin},
                                {"passed", e.passed},
                                {"note", e.note}});
    j["warnings"] = r.warnings;
    return j;
}

inline void write_json(const std::filesystem::path& p, const nlohmann::json& j) {
    std::ofstream out(p);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << j.dump(2) << '\n';
}

/// 0 iff every check passed (and, with --strict, nothing was warned about).
inline int finish(Context& ctx, const PropertyReport& r, nlohmann::json extra, const std::string& name) {
    nlohmann::json j = report_json(r);
    j["command"] = name;
    j["provenance"] = ctx.provenance;
    for (auto& [k, v] : extra.items()) j[k] = v;
    write_json(ctx.out / "report.json", j);
    std::size_t failed = 0;
    for (const auto& e : r.entries)
        if (!e.passed) {
            ++failed;
            *ctx.log << "FAILED " << e.name << " t=" << e.time << " value=" << e.value << " bound=" << e.bound
                     << "\n";
        }
    for (const auto& w : r.warnings) *ctx.log << "warning: " << w << "\n";
    *ctx.log << name << ": " << r.entries.size() - failed << "/" << r.entries.size() << " checks passed, "
             << r.warnings.size() << " warnings, output in " << ctx.out.string() << "\n";
    if (failed) return kChecksFailed;
    if (ctx.flags.strict && !r.warnings.empty()) return kChecksFailed;
    return kOk;
}

inline std::vector<double> interpolate_file(const std::string& path, const std::vector<double>& x) {
    const auto cols = read_csv_columns(path);
    if (cols.size() < 2 || cols[0].size() < 2) throw std::runtime_error(path + ": expected columns x, value");
    const auto& xs = cols[0];
    const auto& vs = cols[1];
    if (!std::is_sorted(xs.begin(), xs.end())) throw std::runtime_error(path + ": x column must ascend");
    std::vector<double> out(x.size(), 0.0);
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < xs.front() || x[i] > xs.back()) continue; // zero outside the tabulated range
        const std::size_t k = static_cast<std::size_t>(std::upper_bound(xs.begin(), xs.end(), x[i]) - xs.begin());
        if (k >= xs.size()) {
            out[i] = vs.back();
            continue;
        }
        const double w = (x[i] - xs[k - 1]) / (xs[k] - xs[k - 1]);
        out[i] = vs[k - 1] + w * (vs[k] - vs[k - 1]);
    }
    return out;
}

inline void need(const Ini& ini, const std::vector<std::string>& sections, const std::string& cmd) {
    for (const auto& s : sections) require_section(ini, s, cmd);
}

// ---------------------------------------------------------------------------

inline int cmd_solve_cauchy(Context& ctx, const Ini& ini) {
    need(ini, {"time_kernel", "space_kernel", "grid", "initial", "times"}, "solve-cauchy");
    const auto& c = ctx.cfg;
    const Grid& g = *c.grid;
    Field f(g);
    if (c.initial->type == "gaussian")
        f = gaussian_field(g, c.initial->center, c.initial->sigma);
    else if (c.initial->type == "box")
        f = box_field(g, c.initial->a, c.initial->b);
    else if (c.initial->type == "file") {
        std::vector<double> xs(g.size());
        for (std::size_t i = 0; i < g.size(); ++i) xs[i] = g.x(i);
        f = Field(g, interpolate_file(c.initial->path, xs));
    } else
        throw ConfigError(ini.file(), ini.section("initial")->line, "initial.type",
                          "eigenmode initial data only applies to solve-ibvp");

    ctx.provenance.push_back("grid: L=" + format_number(g.half_width()) + " N=" + std::to_string(g.size()));
    CauchyOptions opt;
    opt.strict = ctx.flags.strict;
    const SymbolGrid zeta(*c.space_kernel, g);
    const auto sol = solve_cauchy(*c.time_kernel, zeta, f, c.times, opt);

    std::vector<double> xs(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) xs[i] = g.x(i);
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        auto prov = ctx.provenance;
        prov.push_back("t: " + format_number(sol.times[k]));
        write_csv((ctx.out / ("p_t" + time_tag(sol.times[k]) + ".csv")).string(), prov, {"x", "p"},
                  {xs, sol.fields[k].values});
    }
    PropertyReport r;
    if (c.checks) r = verify_cauchy_estimates(sol, f, *c.time_kernel, zeta);
    else r.warnings = sol.warnings;
    nlohmann::json extra;
    extra["boundary_density"] = sol.boundary_density;
    extra["max_imag_residue"] = sol.max_imag_residue;
    return finish(ctx, r, extra, "solve-cauchy");
}

inline int cmd_solve_ibvp(Context& ctx, const Ini& ini) {
    need(ini, {"time_kernel", "space_kernel", "ibvp", "initial", "times"}, "solve-ibvp");
    const auto& c = ctx.cfg;
    const auto& b = *c.ibvp;
    const IbvpGrid grid(b.half_width, b.points);
    AssembledOperator op;
    if (b.truncate) {
        const auto tk = truncate_kernel(*c.space_kernel, b.half_width, b.theta, b.beta);
        ctx.provenance.push_back("truncation: theta=" + format_number(tk.theta()) + " beta=" + format_number(tk.beta()));
        op = assemble_operator(tk, b.points);
    } else {
        op = assemble_operator(*c.space_kernel, grid);
    }
    ctx.provenance.push_back("ibvp grid: H=" + format_number(grid.H) + " M=" + std::to_string(grid.M));
    const EigenSystem e = eigendecompose(op);

    std::vector<double> xs(grid.M);
    for (std::size_t i = 0; i < grid.M; ++i) xs[i] = grid.x(i);
    std::vector<double> f;
    const auto& in = *c.initial;
    if (in.type == "gaussian") f = ibvp_gaussian(grid, in.center, in.sigma);
    else if (in.type == "box") f = ibvp_box(grid, in.a, in.b);
    else if (in.type == "file") f = interpolate_file(in.path, xs);
    else {
        if (in.mode > grid.M)
            throw ConfigError(ini.file(), ini.section("initial")->line, "initial.mode", "exceeds the number of modes");
        f = ibvp_eigenmode(e, in.mode);
    }

    const auto sol = solve_ibvp(*c.time_kernel, e, f, c.times);
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        auto prov = ctx.provenance;
        prov.push_back("t: " + format_number(sol.times[k]));
        write_csv((ctx.out / ("p_t" + time_tag(sol.times[k]) + ".csv")).string(), prov, {"x", "p"},
                  {xs, sol.fields[k]});
    }
    std::vector<double> idx(grid.M), lam(grid.M);
    for (std::size_t j = 0; j < grid.M; ++j) {
        idx[j] = static_cast<double>(j + 1);
        lam[j] = e.eigenvalues(static_cast<Eigen::Index>(j));
    }
    write_csv((ctx.out / "eigenvalues.csv").string(), ctx.provenance, {"j", "lambda"}, {idx, lam});

    // mode of the initial data's dominant component (mode 1 unless an eigenmode was requested)
    const std::size_t jm = in.type == "eigenmode" ? in.mode - 1 : 0;
    std::vector<double> tcol, om, ratio, zc;
    const double w0 = sol.initial_modes(static_cast<Eigen::Index>(jm));
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        const double w = jm < sol.modes_used ? sol.modes[k](static_cast<Eigen::Index>(jm)) : 0.0;
        tcol.push_back(sol.times[k]);
        om.push_back(w);
        ratio.push_back(w0 != 0.0 ? w / w0 : 0.0);
        zc.push_back(relaxation_z(*c.time_kernel, lam[jm], sol.times[k]));
    }
    auto prov = ctx.provenance;
    prov.push_back("mode: " + std::to_string(jm + 1));
    write_csv((ctx.out / "modes.csv").string(), prov, {"t", "omega", "ratio", "Z"}, {tcol, om, ratio, zc});

    PropertyReport r;
    if (c.checks) r = verify_ibvp_estimates(sol, f, e, *c.time_kernel);
    else r.warnings = sol.warnings;
    if (c.checks) {
        r.add_upper("orthonormality defect", 0.0, e.orthonormality_defect, 1e-10, 0.0);
        r.add("eigenvalues positive", 0.0, lam.front(), 0.0, lam.front(), lam.front() > 0.0);
    }
    nlohmann::json extra;
    extra["modes_used"] = sol.modes_used;
    extra["symmetry_defect"] = e.symmetry_defect;
    extra["orthonormality_defect"] = e.orthonormality_defect;
    extra["lambda_1"] = lam.front();
    return finish(ctx, r, extra, "solve-ibvp");
}

/// Bin averages of a grid density over histogram cells (linear interpolation).
inline std::vector<double> bin_average(const Grid& g, const std::vector<double>& p, const Histogram& h, double width) {
    std::vector<double> out(h.centers.size(), 0.0);
    auto interp = [&](double x) {
        const double u = (x - g.x(0)) / g.dx();
        if (u < 0.0 || u >= static_cast<double>(g.size() - 1)) return 0.0;
        const auto i = static_cast<std::size_t>(u);
        const double w = u - static_cast<double>(i);
        return (1.0 - w) * p[i] + w * p[i + 1];
    };
    constexpr int sub = 32;
    for (std::size_t b = 0; b < out.size(); ++b) {
        double acc = 0.0;
        for (int s = 0; s < sub; ++s) acc += interp(h.centers[b] - 0.5 * width + (s + 0.5) * width / sub);
        out[b] = acc / sub;
    }
    return out;
}

inline int cmd_simulate(Context& ctx, const Ini& ini) {
    need(ini, {"time_kernel", "space_kernel", "times", "mc"}, "simulate");
    const auto& c = ctx.cfg;
    const auto& mc = *c.mc;
    for (double t : c.times)
        if (!(t > 0.0)) throw ConfigError(ini.file(), ini.section("times")->line, "times.values", "simulate needs positive times");
    EnsembleOptions eo;
    eo.renewal_scale = mc.renewal_scale;
    eo.threads = ctx.flags.threads;
    const auto res = simulate_ensemble(*c.time_kernel, *c.space_kernel, mc.particles, c.times, mc.seed, eo);
    const auto st = empirical_statistics(res, mc.histogram, mc.xi);
    ctx.provenance.push_back("particles: " + std::to_string(mc.particles) + " seed: " + std::to_string(mc.seed) +
                             " renewal_scale: " + format_number(mc.renewal_scale) + " streams: one per particle");

    std::vector<double> analytic;
    for (double t : c.times) {
        const auto m = msd(*c.time_kernel, *c.space_kernel, t);
        analytic.push_back(m ? *m : std::numeric_limits<double>::infinity());
    }
    write_csv((ctx.out / "msd.csv").string(), ctx.provenance, {"t", "msd_empirical", "msd_stderr", "msd_analytic"},
              {c.times, st.msd, st.msd_stderr, analytic});
    const double width = (mc.histogram.hi - mc.histogram.lo) / static_cast<double>(mc.histogram.bins);
    for (const auto& h : st.histograms) {
        auto prov = ctx.provenance;
        prov.push_back("t: " + format_number(h.time) + " outside_range_fraction: " + format_number(h.outside));
        write_csv((ctx.out / ("hist_t" + time_tag(h.time) + ".csv")).string(), prov, {"bin_center", "density"},
                  {h.centers, h.density});
    }

    PropertyReport r;
    r.warnings = res.warnings;
    std::vector<double> et, ex, ere, eim, ese, etarget, eexact;
    for (const auto& e : st.ecf) {
        const double z = c.space_kernel->symbol(e.xi);
        const double target = relaxation_z(*c.time_kernel, z, e.time);
        et.push_back(e.time);
        ex.push_back(e.xi);
        ere.push_back(e.re);
        eim.push_back(e.im);
        ese.push_back(e.stderr_re);
        etarget.push_back(target);
        eexact.push_back(ctrw_characteristic_function(*c.time_kernel, z, e.time, mc.renewal_scale));
        if (mc.compare) {
            const double tol = mc.ecf_sigmas * e.stderr_re;
            const double dev = std::abs(e.re - target);
            r.add("ECF vs propagator xi=" + format_number(e.xi), e.time, dev, tol, tol - dev, dev <= tol,
                  "|ECF - Z(t, zeta(xi))| within the configured number of standard errors");
        }
    }
    write_csv((ctx.out / "ecf.csv").string(), ctx.provenance,
              {"t", "xi", "re_ecf", "im_ecf", "stderr", "target", "ctrw_exact"}, {et, ex, ere, eim, ese, etarget, eexact});

    nlohmann::json extra;
    if (mc.compare) {
        const Grid g(mc.pde_half_width, mc.pde_points);
        const Field f0 = gaussian_field(g, 0.0, 2.0 * g.dx());
        const auto sol = solve_cauchy(*c.time_kernel, *c.space_kernel, f0, c.times);
        for (const auto& w : sol.warnings) r.warnings.push_back("pde: " + w);
        std::vector<double> l1;
        for (std::size_t k = 0; k < c.times.size(); ++k) {
            const auto& h = st.histograms[k];
            const auto ref = bin_average(g, sol.fields[k].values, h, width);
            double d = 0.0;
            for (std::size_t b = 0; b < ref.size(); ++b) d += std::abs(h.density[b] - ref[b]) * width;
            l1.push_back(d);
            r.add_upper("L1 histogram distance", c.times[k], d, mc.l1_tol, 0.0);
        }
        extra["l1_distance"] = l1;
    }
    return finish(ctx, r, extra, "simulate");
}

inline int cmd_msd(Context& ctx, const Ini& ini) {
    need(ini, {"time_kernel", "space_kernel", "times"}, "msd");
    const auto& c = ctx.cfg;
    std::vector<double> vals;
    bool diverges = false;
    for (double t : c.times) {
        const auto m = msd(*c.time_kernel, *c.space_kernel, t);
        if (!m) diverges = true;
        vals.push_back(m ? *m : std::numeric_limits<double>::infinity());
    }
    auto prov = ctx.provenance;
    if (diverges) prov.push_back("msd diverges: jump kernel has no finite second moment");
    else prov.push_back("zeta''(0): " + format_number(*zeta_second_derivative_at_zero(*c.space_kernel)));
    write_csv((ctx.out / "msd_analytic.csv").string(), prov, {"t", "msd"}, {c.times, vals});
    *ctx.log << "msd: " << (diverges ? "diverges (infinite second moment)" : "finite") << ", output in "
             << ctx.out.string() << "\n";
    return kOk;
}

inline int cmd_check_kernels(Context& ctx, const Ini& ini) {
    if (!ini.has("time_kernel") && !ini.has("space_kernel"))
        throw ConfigError(ini.file(), 0, "time_kernel", "check-kernels needs a time_kernel or space_kernel section");
    nlohmann::json j;
    j["provenance"] = ctx.provenance;
    bool ok = true;
    auto dump = [&](const ConditionReport& r, const char* key) {
        nlohmann::json a = nlohmann::json::array();
        for (const auto& ch : r.checks) {
            a.push_back({{"name", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
            *ctx.log << (ch.passed ? "pass " : "FAIL ") << key << ": " << ch.name
                     << (ch.detail.empty() ? "" : " (" + ch.detail + ")") << "\n";
        }
        j[key] = {{"kernel", r.kernel}, {"checks", a}, {"all_passed", r.all_passed()}, {"note", r.note}};
        ok = ok && r.all_passed();
    };
    if (ctx.cfg.time_kernel) dump(check_conditions(*ctx.cfg.time_kernel), "time_kernel");
    if (ctx.cfg.space_kernel) dump(check_conditions(*ctx.cfg.space_kernel), "space_kernel");
    j["all_passed"] = ok;
    write_json(ctx.out / "conditions.json", j);
    return ok ? kOk : kChecksFailed;
}

// ---------------------------------------------------------------------------

/// Entry point shared by the binary and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& log = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"nonlocal diffusion solvers and CTRW simulator"};
    app.require_subcommand(1, 1);
    GlobalFlags flags;
    app.add_option("--config", flags.config, "INI run configuration")->required();
    app.add_option("--out", flags.out, "output directory (overrides [output] directory)");
    app.add_option("--threads", flags.threads, "worker threads for the simulator")->check(CLI::Range(1u, 1024u));
    app.add_flag("--strict", flags.strict, "treat warnings as errors");
    const std::vector<std::pair<std::string, std::string>> subs{
        {"solve-cauchy", "Cauchy problem on the line (spectral)"},
        {"solve-ibvp", "bounded-domain problem (eigenexpansion)"},
        {"simulate", "CTRW Monte Carlo ensemble"},
        {"msd", "analytic mean squared displacement"},
        {"check-kernels", "numeric condition checks on the kernels"}};
    for (const auto& [name, help] : subs) app.add_subcommand(name, help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, log, err);
        return rc == 0 ? kOk : kUsage;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    Context ctx;
    ctx.flags = flags;
    ctx.log = &log;
    try {
        const Ini ini = Ini::load(flags.config);
        ctx.cfg = parse_config(ini);
        ctx.out = flags.out.empty() ? std::filesystem::path(ctx.cfg.output_dir) : std::filesystem::path(flags.out);
        std::filesystem::create_directories(ctx.out);
        ctx.provenance.push_back("command: " + cmd);
        ctx.provenance.push_back("config: " + flags.config);
        if (ctx.cfg.time_kernel) ctx.provenance.push_back("time_kernel: " + ctx.cfg.time_kernel->describe());
        if (ctx.cfg.space_kernel) ctx.provenance.push_back("space_kernel: " + ctx.cfg.space_kernel->describe());

        if (cmd == "solve-cauchy") return cmd_solve_cauchy(ctx, ini);
        if (cmd == "solve-ibvp") return cmd_solve_ibvp(ctx, ini);
        if (cmd == "simulate") return cmd_simulate(ctx, ini);
        if (cmd == "msd") return cmd_msd(ctx, ini);
        return cmd_check_kernels(ctx, ini);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kUsage;
    } catch (const C7Violation& e) {
        err << "truncation error: " << e.what() << "\n";
        return kUsage;
    } catch (const DomainError& e) {
        err << "invalid input: " << e.what() << "\n";
        return kUsage;
    } catch (const NumericalError& e) {
        err << "numerical error: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kNumerical;
    }
}

} // namespace nonlocal::cli
