#pragma once

#include <stdexcept>
#include <string>

namespace ctxsep {

// Base of all library errors. Two families below map onto the CLI exit
// codes: DataError -> 2, NumericalError -> 3.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : Error {
    using Error::Error;
};

struct NumericalError : Error {
    using Error::Error;
};

struct DimensionMismatch : DataError {
    using DataError::DataError;
};

struct NonFinite : DataError {
    using DataError::DataError;
};

struct EmptyProblem : DataError {
    using DataError::DataError;
};

struct IndivisibleWindow : DataError {
    using DataError::DataError;
};

struct NonHourly : DataError {
    using DataError::DataError;
};

struct DomainError : DataError {
    using DataError::DataError;
};

struct ParseError : DataError {
    using DataError::DataError;
};

struct NonMonotoneTimestamps : DataError {
    using DataError::DataError;
};

struct NegativeUsage : DataError {
    using DataError::DataError;
};

struct NoOverlap : DataError {
    using DataError::DataError;
};

struct SingularDesign : NumericalError {
    using NumericalError::NumericalError;
};

struct NumericalBreakdown : NumericalError {
    using NumericalError::NumericalError;
};

}  // namespace ctxsep
