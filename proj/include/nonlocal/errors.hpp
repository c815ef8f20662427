#pragma once

#include <stdexcept>
#include <string>

namespace nonlocal {

/// Bad parameter or argument outside the documented range.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical procedure failed; `partial()` is the best estimate reached.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double partial)
        : std::runtime_error(what), partial_(partial) {}
    [[nodiscard]] double partial() const noexcept { return partial_; }

private:
    double partial_;
};

class QuadratureError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Series did not converge within its term budget.
class TruncationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Mittag-Leffler evaluation on the positive axis beyond double range.
class OverflowError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Two independent evaluation routes disagree.
class CrossCheckError : public NumericalError {
public:
    CrossCheckError(const std::string& what, double a, double b)
        : NumericalError(what, a), other_(b) {}
    [[nodiscard]] double other() const noexcept { return other_; }

private:
    double other_;
};

/// Tabulated survival / density failed a quality gate.
class InversionQualityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DensityReconstructionError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NormalizationError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Base kernel violates k(x) >= theta |x|^{-(1+2 beta)} at `where()`.
class C7Violation : public std::domain_error {
public:
    C7Violation(const std::string& what, double x) : std::domain_error(what), x_(x) {}
    [[nodiscard]] double where() const noexcept { return x_; }

private:
    double x_;
};

class AssemblyError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class PositivityError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Solution carries too much density at the periodic boundary.
class BoundaryMassError : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace nonlocal
