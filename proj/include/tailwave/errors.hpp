#pragma once

#include <stdexcept>
#include <string>

namespace tailwave {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };
struct UnsupportedOrder : Error { using Error::Error; };
struct NoHorizon : Error { using Error::Error; };
struct Nonconvergence : Error { using Error::Error; };
struct BadSupport : Error { using Error::Error; };
struct QuadratureFailure : Error { using Error::Error; };
struct InsufficientMargin : Error { using Error::Error; };
struct InsufficientRadialRange : Error { using Error::Error; };
struct WrongMode : Error { using Error::Error; };
struct UnsupportedK : Error { using Error::Error; };
struct HypothesisViolated : Error { using Error::Error; };
struct SupportViolation : Error { using Error::Error; };
struct NonpositiveValues : Error { using Error::Error; };
struct InsufficientPoints : Error { using Error::Error; };
struct DegenerateDifferences : Error { using Error::Error; };
struct MissingSeries : Error { using Error::Error; };
struct I0Unresolved : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

} // namespace tailwave
