#pragma once

// INI-style run configuration. Grammar:
//   [section]            one concern per section
//   key = value          values are numbers, words or comma-separated lists
//   ; or # at line start comments
// Unknown sections or keys, duplicates and malformed values are errors that
// name the line and key.

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nonlocal/nonlocal.hpp"

namespace nonlocal::cli {

class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& file, std::size_t line, const std::string& key, const std::string& msg)
        : std::runtime_error(format(file, line, key, msg)), line_(line), key_(key) {}
    [[nodiscard]] std::size_t line() const noexcept { return line_; }
    [[nodiscard]] const std::string& key() const noexcept { return key_; }

private:
    static std::string format(const std::string& file, std::size_t line, const std::string& key,
                              const std::string& msg) {
        std::ostringstream os;
        os << file;
        if (line) os << ":" << line;
        if (!key.empty()) os << ": " << key;
        os << ": " << msg;
        return os.str();
    }
    std::size_t line_;
    std::string key_;
};

struct IniEntry {
    std::string value;
    std::size_t line = 0;
};

struct IniSection {
    std::size_t line = 0;
    std::map<std::string, IniEntry> entries;
};

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

class Ini {
public:
    static Ini parse(std::istream& in, const std::string& name) {
        Ini ini;
        ini.file_ = name;
        std::string raw, current;
        std::size_t lineno = 0;
        while (std::getline(in, raw)) {
            ++lineno;
            const std::string line = trim(raw);
            if (line.empty() || line[0] == ';' || line[0] == '#') continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw ConfigError(name, lineno, "", "unterminated section header");
                current = trim(line.substr(1, line.size() - 2));
                if (current.empty()) throw ConfigError(name, lineno, "", "empty section name");
                if (ini.sections_.count(current)) throw ConfigError(name, lineno, current, "duplicate section");
                ini.sections_[current].line = lineno;
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos) throw ConfigError(name, lineno, "", "expected key = value");
            const std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw ConfigError(name, lineno, "", "missing key");
            if (current.empty()) throw ConfigError(name, lineno, key, "key outside any section");
            auto& sec = ini.sections_[current];
            if (sec.entries.count(key)) throw ConfigError(name, lineno, current + "." + key, "duplicate key");
            sec.entries[key] = {value, lineno};
        }
        return ini;
    }

    static Ini load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError(path, 0, "", "cannot open config file");
        return parse(in, path);
    }

    [[nodiscard]] const std::string& file() const noexcept { return file_; }
    [[nodiscard]] bool has(const std::string& section) const { return sections_.count(section) != 0; }
    [[nodiscard]] const IniSection* section(const std::string& s) const {
        auto it = sections_.find(s);
        return it == sections_.end() ? nullptr : &it->second;
    }
    [[nodiscard]] const std::map<std::string, IniSection>& sections() const noexcept { return sections_; }

private:
    std::string file_;
    std::map<std::string, IniSection> sections_;
};

/// Typed access to one section; remembers which keys were read so unknown
/// keys can be reported.
class SectionReader {
public:
    SectionReader(const Ini& ini, std::string name) : ini_(ini), name_(std::move(name)), sec_(ini.section(name_)) {}

    [[nodiscard]] bool present() const noexcept { return sec_ != nullptr; }
    [[nodiscard]] std::size_t line() const noexcept { return sec_ ? sec_->line : 0; }
    [[nodiscard]] std::string qualified(const std::string& key) const { return name_ + "." + key; }

    [[nodiscard]] bool has(const std::string& key) const { return sec_ && sec_->entries.count(key); }

    [[nodiscard]] const IniEntry& entry(const std::string& key) {
        used_.insert(key);
        if (!has(key)) throw ConfigError(ini_.file(), line(), qualified(key), "required key is missing");
        return sec_->entries.at(key);
    }

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        const std::size_t l = has(key) ? sec_->entries.at(key).line : line();
        throw ConfigError(ini_.file(), l, qualified(key), msg);
    }

    std::string word(const std::string& key) { return entry(key).value; }
    std::string word(const std::string& key, const std::string& def) { return has(key) ? word(key) : def; }

    double number(const std::string& key) {
        const auto& e = entry(key);
        return to_number(e, key);
    }
    double number(const std::string& key, double def) { return has(key) ? number(key) : def; }
    std::optional<double> maybe_number(const std::string& key) {
        if (!has(key)) return std::nullopt;
        return number(key);
    }

    std::uint64_t integer(const std::string& key) {
        const auto& e = entry(key);
        try {
            std::size_t used = 0;
            if (!e.value.empty() && e.value[0] == '-') throw std::invalid_argument("negative");
            const unsigned long long v = std::stoull(e.value, &used);
            if (used != e.value.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            fail(key, "expected a nonnegative integer, got '" + e.value + "'");
        }
    }
    std::uint64_t integer(const std::string& key, std::uint64_t def) { return has(key) ? integer(key) : def; }

    bool boolean(const std::string& key, bool def) {
        if (!has(key)) return def;
        const std::string v = word(key);
        if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
        if (v == "false" || v == "no" || v == "0" || v == "off") return false;
        fail(key, "expected true or false, got '" + v + "'");
    }

    std::vector<double> list(const std::string& key) {
        const auto& e = entry(key);
        std::vector<double> out;
        std::stringstream ss(e.value);
        std::string item;
        while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (item.empty()) fail(key, "empty list item");
            out.push_back(to_number({item, e.line}, key));
        }
        return out;
    }

    /// Throws on keys never read.
    void reject_unknown() const {
        if (!sec_) return;
        for (const auto& [k, e] : sec_->entries)
            if (!used_.count(k)) throw ConfigError(ini_.file(), e.line, qualified(k), "unknown key");
    }

private:
    double to_number(const IniEntry& e, const std::string& key) const {
        try {
            std::size_t used = 0;
            const double v = std::stod(e.value, &used);
            if (used != e.value.size()) throw std::invalid_argument("trailing");
            if (!std::isfinite(v)) throw std::invalid_argument("not finite");
            return v;
        } catch (const std::exception&) {
            throw ConfigError(ini_.file(), e.line, qualified(key), "expected a number, got '" + e.value + "'");
        }
    }

    const Ini& ini_;
    std::string name_;
    const IniSection* sec_;
    std::set<std::string> used_;
};

struct InitialSpec {
    std::string type = "gaussian"; // gaussian | box | eigenmode | file
    double center = 0.0;
    double sigma = 1.0;
    double a = -1.0, b = 1.0;
    std::size_t mode = 1;
    std::string path;
};

struct McSpec {
    std::size_t particles = 1000;
    std::uint64_t seed = 1;
    double renewal_scale = 1.0;
    HistogramSpec histogram;
    std::vector<double> xi{0.5, 1.0};
    bool compare = false;
    double pde_half_width = 40.0;
    std::size_t pde_points = 8192;
    double l1_tol = 0.05;
    double ecf_sigmas = 3.0;
};

struct IbvpSpec {
    double half_width = 1.0;
    std::size_t points = 1024;
    bool truncate = true;
    std::optional<double> theta;
    std::optional<double> beta;
};

struct RunConfig {
    std::string source;
    std::optional<TimeKernel> time_kernel;
    std::optional<SpaceKernel> space_kernel;
    std::optional<Grid> grid;
    std::optional<IbvpSpec> ibvp;
    std::optional<InitialSpec> initial;
    std::optional<McSpec> mc;
    std::vector<double> times;
    bool times_given = false;
    std::string output_dir = "out";
    bool checks = true;
};

namespace detail {

inline std::vector<double> weights_or_fail(SectionReader& s, const std::string& key) {
    auto v = s.list(key);
    if (v.empty()) s.fail(key, "list must not be empty");
    return v;
}

inline void order_in_range(SectionReader& s, const std::string& key, double v) {
    if (!(v > 0.0 && v < 1.0)) {
        std::ostringstream os;
        os << "must lie in (0,1), got " << v;
        s.fail(key, os.str());
    }
}

inline TimeKernel parse_time_kernel(SectionReader& s) {
    const std::string type = s.word("type");
    if (type == "caputo") {
        const double a = s.number("alpha");
        order_in_range(s, "alpha", a);
        return TimeKernel::caputo(a);
    }
    if (type == "tempered") {
        const double a = s.number("alpha");
        order_in_range(s, "alpha", a);
        const double b = s.number("rate");
        if (!(b >= 0.0)) s.fail("rate", "must be nonnegative");
        return TimeKernel::tempered(a, b);
    }
    if (type == "multi_term") {
        const auto c = weights_or_fail(s, "coefficients");
        const auto o = weights_or_fail(s, "orders");
        if (c.size() != o.size()) s.fail("orders", "needs as many entries as coefficients");
        for (double v : o) order_in_range(s, "orders", v);
        for (double v : c)
            if (!(v > 0.0)) s.fail("coefficients", "must be positive");
        try {
            return TimeKernel::multi_term(c, o);
        } catch (const DomainError& e) {
            s.fail("orders", e.what());
        }
    }
    s.fail("type", "unknown time kernel '" + type + "' (caputo, tempered, multi_term)");
}

inline SpaceKernel parse_space_kernel(SectionReader& s) {
    const std::string type = s.word("type");
    if (type == "riesz") {
        const double b = s.number("beta");
        order_in_range(s, "beta", b);
        return SpaceKernel::riesz(b);
    }
    if (type == "tempered") {
        const double q = s.number("q");
        const double b = s.number("beta");
        const double h = s.number("h");
        if (!(q > 0.0)) s.fail("q", "must be positive");
        order_in_range(s, "beta", b);
        if (!(h > 0.0)) s.fail("h", "must be positive");
        return SpaceKernel::tempered(q, b, h);
    }
    if (type == "multi_term") {
        const auto c = weights_or_fail(s, "coefficients");
        const auto o = weights_or_fail(s, "orders");
        if (c.size() != o.size()) s.fail("orders", "needs as many entries as coefficients");
        for (double v : o) order_in_range(s, "orders", v);
        for (double v : c)
            if (!(v > 0.0)) s.fail("coefficients", "must be positive");
        try {
            return SpaceKernel::multi_term(c, o);
        } catch (const DomainError& e) {
            s.fail("orders", e.what());
        }
    }
    s.fail("type", "unknown space kernel '" + type + "' (riesz, tempered, multi_term)");
}

} // namespace detail

inline RunConfig parse_config(const Ini& ini) {
    static const std::set<std::string> known{"time_kernel", "space_kernel", "grid", "ibvp", "initial",
                                             "times",       "mc",           "output"};
    for (const auto& [name, sec] : ini.sections())
        if (!known.count(name)) throw ConfigError(ini.file(), sec.line, name, "unknown section");

    RunConfig c;
    c.source = ini.file();

    if (SectionReader s(ini, "time_kernel"); s.present()) {
        c.time_kernel = detail::parse_time_kernel(s);
        s.reject_unknown();
    }
    if (SectionReader s(ini, "space_kernel"); s.present()) {
        c.space_kernel = detail::parse_space_kernel(s);
        s.reject_unknown();
    }
    if (SectionReader s(ini, "grid"); s.present()) {
        const double L = s.number("half_width");
        const auto N = s.integer("points");
        if (!(L > 0.0)) s.fail("half_width", "must be positive");
        if (N < 256 || (N & (N - 1)) != 0) s.fail("points", "must be a power of two >= 256");
        c.grid = Grid(L, static_cast<std::size_t>(N));
        s.reject_unknown();
    }
    if (SectionReader s(ini, "ibvp"); s.present()) {
        IbvpSpec b;
        b.half_width = s.number("half_width");
        b.points = static_cast<std::size_t>(s.integer("points"));
        if (!(b.half_width > 0.0)) s.fail("half_width", "must be positive");
        if (b.points < 64) s.fail("points", "must be >= 64");
        b.truncate = s.boolean("truncate", true);
        b.theta = s.maybe_number("theta");
        b.beta = s.maybe_number("beta");
        if (b.theta && !(*b.theta > 0.0)) s.fail("theta", "must be positive");
        if (b.beta) detail::order_in_range(s, "beta", *b.beta);
        c.ibvp = b;
        s.reject_unknown();
    }
    if (SectionReader s(ini, "initial"); s.present()) {
        InitialSpec i;
        i.type = s.word("type");
        if (i.type == "gaussian") {
            i.center = s.number("center", 0.0);
            i.sigma = s.number("sigma");
            if (!(i.sigma > 0.0)) s.fail("sigma", "must be positive");
        } else if (i.type == "box") {
            i.a = s.number("a");
            i.b = s.number("b");
            if (!(i.b > i.a)) s.fail("b", "must exceed a");
        } else if (i.type == "eigenmode") {
            i.mode = static_cast<std::size_t>(s.integer("mode"));
            if (i.mode < 1) s.fail("mode", "modes are numbered from 1");
        } else if (i.type == "file") {
            i.path = s.word("path");
        } else {
            s.fail("type", "unknown initial condition '" + i.type + "' (gaussian, box, eigenmode, file)");
        }
        c.initial = i;
        s.reject_unknown();
    }
    if (SectionReader s(ini, "times"); s.present()) {
        c.times = s.list("values");
        c.times_given = true;
        if (c.times.empty()) s.fail("values", "at least one time is required");
        for (std::size_t k = 0; k < c.times.size(); ++k) {
            if (!(c.times[k] >= 0.0)) s.fail("values", "times must be nonnegative");
            if (k && !(c.times[k] > c.times[k - 1])) s.fail("values", "times must be strictly ascending");
        }
        s.reject_unknown();
    }
    if (SectionReader s(ini, "mc"); s.present()) {
        McSpec m;
        m.particles = static_cast<std::size_t>(s.integer("particles", m.particles));
        if (m.particles < 1000) s.fail("particles", "need at least 1000 particles");
        m.seed = s.integer("seed", m.seed);
        m.renewal_scale = s.number("renewal_scale", m.renewal_scale);
        if (!(m.renewal_scale > 0.0 && m.renewal_scale <= 1.0)) s.fail("renewal_scale", "must lie in (0,1]");
        if (s.has("range")) {
            const auto r = s.list("range");
            if (r.size() != 2 || !(r[1] > r[0])) s.fail("range", "expected 'lo, hi' with lo < hi");
            m.histogram.lo = r[0];
            m.histogram.hi = r[1];
        }
        m.histogram.bins = static_cast<std::size_t>(s.integer("bins", m.histogram.bins));
        if (m.histogram.bins == 0) s.fail("bins", "must be positive");
        if (s.has("xi")) m.xi = s.list("xi");
        m.compare = s.boolean("compare", false);
        m.pde_half_width = s.number("pde_half_width", m.pde_half_width);
        m.pde_points = static_cast<std::size_t>(s.integer("pde_points", m.pde_points));
        if (m.pde_points < 256 || (m.pde_points & (m.pde_points - 1)) != 0)
            s.fail("pde_points", "must be a power of two >= 256");
        m.l1_tol = s.number("l1_tol", m.l1_tol);
        m.ecf_sigmas = s.number("ecf_sigmas", m.ecf_sigmas);
        c.mc = m;
        s.reject_unknown();
    }
    if (SectionReader s(ini, "output"); s.present()) {
        c.output_dir = s.word("directory", c.output_dir);
        c.checks = s.boolean("checks", true);
        s.reject_unknown();
    }
    return c;
}

/// Fails with the section line when a command needs a section that is absent.
inline void require_section(const Ini& ini, const std::string& name, const std::string& command) {
    if (!ini.has(name)) throw ConfigError(ini.file(), 0, name, "section required by " + command + " is missing");
}

} // namespace nonlocal::cli
