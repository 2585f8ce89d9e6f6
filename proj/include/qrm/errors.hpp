// errors.hpp — exception types shared across the library

#pragma once

#include <stdexcept>
#include <string>

namespace qrm {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Parameter or configuration rejected before any computation ran.
struct InvalidParams : Error {
    using Error::Error;
};

// Quadratic coupling at or beyond the spectral-collapse point g2 >= g_T.
struct CollapseRegion : Error {
    using Error::Error;
};

// Negative radicand in the transition-coupling formula (epsilon/omega > 1/2).
struct NegativeRadicand : Error {
    using Error::Error;
};

// Eigensolve hit the truncation cap before meeting the convergence criteria.
struct NotConverged : Error {
    using Error::Error;
};

// Variational minimizer found no interior minimum within bounds.
struct OptimizationFailed : Error {
    using Error::Error;
};

// Finite-difference step could not be stabilized before reaching the floor.
struct StepTooCoarse : Error {
    using Error::Error;
};

// Variational minimizer jumped branches between the two stencil points.
struct BranchJump : Error {
    using Error::Error;
};

// 1/gap exceeded the configured cap inside the preparation-time integral.
struct IntegrandBlowup : Error {
    using Error::Error;
};

} // namespace qrm
