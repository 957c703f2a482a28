#pragma once

#include <stdexcept>
#include <string>

namespace gantsne {

// Base class for everything this library throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Dimension mismatches between matrices / layers / batches.
struct ShapeError : Error {
    using Error::Error;
};

// A caller violated an argument precondition (digit out of range, n > N, ...).
struct InputError : Error {
    using Error::Error;
};

// A file's structure is wrong (bad magic, wrong column count, bad version).
struct FormatError : Error {
    using Error::Error;
};

// A file ended before its declared payload did.
struct LengthError : FormatError {
    using FormatError::FormatError;
};

// Two inputs that must agree do not (image count vs label count).
struct ConsistencyError : FormatError {
    using FormatError::FormatError;
};

// A field failed to parse as a number.
struct ParseError : FormatError {
    using FormatError::FormatError;
};

// A parsed value is outside its legal range (label 17, pixel 300).
struct ValueError : Error {
    using Error::Error;
};

// An API contract between components was broken (stale tape, missing label).
struct ContractError : Error {
    using Error::Error;
};

// A computation produced non-finite values and was aborted.
struct NumericError : Error {
    using Error::Error;
};

} // namespace gantsne
