#pragma once

#include <string>
#include <vector>

namespace nonlocal {

/// One checked estimate. `margin` is (bound - value) / bound where that makes
/// sense, otherwise a signed slack; `passed` is the verdict.
struct PropertyEntry {
    std::string name;
    double time = 0.0;
    double value = 0.0;
    double bound = 0.0;
    double margin = 0.0;
    bool passed = true;
    std::string note;
};

struct PropertyReport {
    std::vector<PropertyEntry> entries;
    std::vector<std::string> warnings;

    [[nodiscard]] bool all_passed() const {
        for (const auto& e : entries)
            if (!e.passed) return false;
        return true;
    }

    /// Smallest margin among entries whose name starts with `prefix`.
    [[nodiscard]] double worst_margin(const std::string& prefix) const {
        double w = 1e300;
        for (const auto& e : entries)
            if (e.name.rfind(prefix, 0) == 0) w = std::min(w, e.margin);
        return w;
    }

    [[nodiscard]] bool passed(const std::string& prefix) const {
        for (const auto& e : entries)
            if (e.name.rfind(prefix, 0) == 0 && !e.passed) return false;
        return true;
    }

    void add(std::string name, double t, double value, double bound, double margin, bool ok,
             std::string note = {}) {
        entries.push_back({std::move(name), t, value, bound, margin, ok, std::move(note)});
    }

    /// value <= bound with relative margin; tolerance absorbs round-off.
    void add_upper(std::string name, double t, double value, double bound, double tol = 1e-12,
                   std::string note = {}) {
        const double margin = bound > 0.0 ? (bound - value) / bound : (value <= 0.0 ? 0.0 : -1.0);
        add(std::move(name), t, value, bound, margin, margin >= -tol, std::move(note));
    }
};

} // namespace nonlocal
