#pragma once

#include <stdexcept>
#include <string>

namespace qkin {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define QKIN_ERROR(Name)                                   \
    struct Name : Error {                                  \
        explicit Name(const std::string& what) : Error(#Name ": " + what) {} \
    }

QKIN_ERROR(NonPositiveDefinite);
QKIN_ERROR(DimensionMismatch);
QKIN_ERROR(IncompatibleState);
QKIN_ERROR(NonConvergentEstimate);
QKIN_ERROR(DivergentLimit);
QKIN_ERROR(PotentialVanishes);
QKIN_ERROR(PotentialNonVanishing);
QKIN_ERROR(DimensionTooHigh);
QKIN_ERROR(ToleranceNotMet);
QKIN_ERROR(StabilityViolation);
QKIN_ERROR(ConfigError);
QKIN_ERROR(IoError);

#undef QKIN_ERROR

}  // namespace qkin
