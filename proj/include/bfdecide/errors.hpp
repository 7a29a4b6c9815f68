#pragma once

#include <stdexcept>
#include <string>

namespace bfd {

// Base for every error raised by the engine. `code()` is a stable
// machine-readable identifier used by the CLI and the HTTP layer.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

// Argument outside the parameter space, malformed grid, etc.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error("domain_error", msg) {}
};

// Schema or payload violation.
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& msg) : Error("validation_error", msg) {}
};

class ImproperPriorError : public Error {
public:
    explicit ImproperPriorError(const std::string& msg)
        : Error("improper_prior_bf",
                msg + " (Bayes factors require proper prior distributions; an improper prior "
                      "leaves the prior odds undefined, so use the decision analysis directly)") {}
};

class ImproperPosteriorError : public Error {
public:
    explicit ImproperPosteriorError(const std::string& msg) : Error("improper_posterior", msg) {}
};

class IndeterminateProperness : public Error {
public:
    explicit IndeterminateProperness(const std::string& msg) : Error("indeterminate_properness", msg) {}
};

class PriorMassError : public Error {
public:
    explicit PriorMassError(const std::string& msg) : Error("prior_mass", msg) {}
};

class DegenerateHypothesisMass : public Error {
public:
    DegenerateHypothesisMass(const std::string& hypothesis, const std::string& msg)
        : Error("degenerate_hypothesis_mass", hypothesis + ": " + msg), hypothesis_(hypothesis) {}

    const std::string& hypothesis() const noexcept { return hypothesis_; }

private:
    std::string hypothesis_;
};

class DegenerateEvidence : public Error {
public:
    explicit DegenerateEvidence(const std::string& msg) : Error("degenerate_evidence", msg) {}
};

class DegenerateOdds : public Error {
public:
    explicit DegenerateOdds(const std::string& msg) : Error("degenerate_odds", msg) {}
};

class InvalidDecomposition : public Error {
public:
    explicit InvalidDecomposition(const std::string& msg) : Error("invalid_decomposition", msg) {}
};

// Quadrature failed to reach the requested tolerance.
class NumericalError : public Error {
public:
    NumericalError(const std::string& msg, double achieved_error)
        : Error("numerical_error", msg + " (achieved error estimate " + std::to_string(achieved_error) + ")"),
          achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

// Workflow errors.
class DependencyError : public Error {
public:
    explicit DependencyError(const std::string& msg) : Error("dependency_error", msg) {}
};

// Guide B applicability checklist failed; the imported BF must not be used.
class ApplicabilityError : public Error {
public:
    explicit ApplicabilityError(const std::string& msg) : Error("applicability_failed", msg) {}
};

class LockError : public Error {
public:
    explicit LockError(const std::string& msg) : Error("locked", msg) {}
};

class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& msg) : Error("not_found", msg) {}
};

class VersionConflict : public Error {
public:
    explicit VersionConflict(const std::string& msg) : Error("version_conflict", msg) {}
};

} // namespace bfd
