#pragma once

#include <stdexcept>
#include <string>

namespace gb {

/// Base class for all toolkit errors. `code()` is a stable machine-readable
/// identifier used by the CLI when emitting JSON error documents.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

/// L_vv (or H_pp) failed to be positive definite at a query point.
struct ConvexityError : Error {
    explicit ConvexityError(const std::string& m) : Error("convexity-violation", m) {}
};

/// The inner maximization of the Legendre transform did not converge.
struct TransformError : Error {
    explicit TransformError(const std::string& m) : Error("transform-failure", m) {}
};

/// Trajectory left the region where integration is meaningful.
struct EscapeError : Error {
    EscapeError(const std::string& m, double t) : Error("escape", m), last_good_time(t) {}
    double last_good_time;
};

/// Orbit failed the periodicity closure test.
struct NotPeriodicError : Error {
    NotPeriodicError(const std::string& m, double g) : Error("not-periodic", m), gap(g) {}
    double gap;
};

struct PoleError : Error {
    explicit PoleError(const std::string& m) : Error("pole", m) {}
};

struct InsufficientWindowError : Error {
    explicit InsufficientWindowError(const std::string& m)
        : Error("insufficient-window", m) {}
};

struct DisconjugacyError : Error {
    explicit DisconjugacyError(const std::string& m)
        : Error("disconjugacy-violation", m) {}
};

struct ReconstructionDomainError : Error {
    explicit ReconstructionDomainError(const std::string& m)
        : Error("reconstruction-domain", m) {}
};

struct DegenerateFrameError : Error {
    explicit DegenerateFrameError(const std::string& m) : Error("degenerate-frame", m) {}
};

struct SingularProjectionError : Error {
    explicit SingularProjectionError(const std::string& m)
        : Error("singular-projection", m) {}
};

struct NoContractionError : Error {
    explicit NoContractionError(const std::string& m) : Error("no-contraction", m) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& m) : Error("config", m) {}
};

}  // namespace gb
