#pragma once

#include <stdexcept>
#include <string>

namespace capsim {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Axis conversion requested for a vector too close to ±z.
struct DegenerateAxis : Error {
    using Error::Error;
};

/// Dipole evaluation requested inside the singular range threshold.
struct SingularRange : Error {
    using Error::Error;
};

/// A vector expected to be nonzero had norm below tolerance.
struct ZeroVector : Error {
    using Error::Error;
};

/// Spline construction rejected repeated consecutive key points.
struct DuplicateConsecutivePoints : Error {
    using Error::Error;
};

/// Residual function returned NaN/Inf at the start point.
struct NonFiniteResidual : Error {
    using Error::Error;
};

/// Scenario/config file errors, with position info when available.
struct ConfigError : Error {
    using Error::Error;
};

}  // namespace capsim
