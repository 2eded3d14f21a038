#pragma once

#include <stdexcept>
#include <string>

namespace moveband {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define MOVEBAND_ERROR(Name)                    \
    struct Name : Error {                       \
        using Error::Error;                     \
    }

// metric validation
MOVEBAND_ERROR(AsymmetricMatrix);
MOVEBAND_ERROR(NonzeroDiagonal);
MOVEBAND_ERROR(TriangleViolation);
MOVEBAND_ERROR(EntryOutOfRange);
MOVEBAND_ERROR(ExactTooLarge);
MOVEBAND_ERROR(BadSpec);

// trees
MOVEBAND_ERROR(UnknownAction);
MOVEBAND_ERROR(TooShallow);
MOVEBAND_ERROR(DominanceViolation);
MOVEBAND_ERROR(ActionMismatch);
MOVEBAND_ERROR(BadTreeFile);

// policies
MOVEBAND_ERROR(BadEta);
MOVEBAND_ERROR(OutOfRangeLoss);
MOVEBAND_ERROR(NotSelected);
MOVEBAND_ERROR(EstimateTooNegative);

// harness
MOVEBAND_ERROR(FileShapeMismatch);
MOVEBAND_ERROR(HorizonMismatch);
MOVEBAND_ERROR(EnumerationTooLarge);
MOVEBAND_ERROR(DimensionUnsupported);

#undef MOVEBAND_ERROR

} // namespace moveband
