#pragma once

#include <stdexcept>

namespace btlab {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Container construction / validation.
struct InvalidValue : Error { using Error::Error; };
struct GridTooSmall : Error { using Error::Error; };
struct GridMismatch : Error { using Error::Error; };
struct WindowTooNarrow : Error { using Error::Error; };
struct WindowMismatch : Error { using Error::Error; };
struct DomainTooNarrow : Error { using Error::Error; };
struct CarrierMismatch : Error { using Error::Error; };

// Numerical failures.
struct CFLViolation : Error { using Error::Error; };
struct Blowup : Error { using Error::Error; };
struct ResidualTooLarge : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct LogDomain : Error { using Error::Error; };
struct WrongCase : Error { using Error::Error; };
struct NotOrthogonal : Error { using Error::Error; };
struct Overflow : Error { using Error::Error; };

// CLI / configuration.
struct ConfigError : Error { using Error::Error; };

} // namespace btlab
