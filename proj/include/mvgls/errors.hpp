#pragma once

#include <stdexcept>

namespace mvgls {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };

// linear algebra
struct NotPositiveDefinite : Error { using Error::Error; };
struct NoConvergence : Error { using Error::Error; };
struct SingularMatrix : Error { using Error::Error; };

// estimation
struct SingularDesign : Error { using Error::Error; };
struct SingularGram : Error { using Error::Error; };
struct InsufficientSample : Error { using Error::Error; };
struct NonStationaryVar : Error { using Error::Error; };

// hypothesis tests
struct SingularRestriction : Error { using Error::Error; };
struct SingularCovariance : Error { using Error::Error; };
struct NotCommonFactors : Error { using Error::Error; };

// simulation
struct AllReplicationsFailed : Error { using Error::Error; };

}  // namespace mvgls
