#pragma once

#include <stdexcept>
#include <string>

namespace mfl {

/// Error categories shared by the C++ core and the C API status codes.
enum class ErrorCode {
    domain = 1,
    shape = 2,
    numeric = 3,
    blow_up = 4,
    singular = 5,
    unsupported = 6,
    config = 7,
    io = 8,
    non_convergence = 9,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

struct DomainError : Error {
    explicit DomainError(const std::string& w) : Error(ErrorCode::domain, w) {}
};
struct ShapeError : Error {
    explicit ShapeError(const std::string& w) : Error(ErrorCode::shape, w) {}
};
struct NumericError : Error {
    explicit NumericError(const std::string& w) : Error(ErrorCode::numeric, w) {}
};
struct SingularError : Error {
    explicit SingularError(const std::string& w) : Error(ErrorCode::singular, w) {}
};
struct UnsupportedError : Error {
    explicit UnsupportedError(const std::string& w) : Error(ErrorCode::unsupported, w) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& w) : Error(ErrorCode::config, w) {}
};
struct IoError : Error {
    explicit IoError(const std::string& w) : Error(ErrorCode::io, w) {}
};

/// Non-finite state during simulation; carries the offending step and particle.
class BlowUpError : public Error {
public:
    BlowUpError(std::size_t step, std::size_t particle)
        : Error(ErrorCode::blow_up, "non-finite state at step " + std::to_string(step) + ", particle " +
                                        std::to_string(particle)),
          step_(step),
          particle_(particle) {}
    [[nodiscard]] std::size_t step() const noexcept { return step_; }
    [[nodiscard]] std::size_t particle() const noexcept { return particle_; }

private:
    std::size_t step_;
    std::size_t particle_;
};

}  // namespace mfl
