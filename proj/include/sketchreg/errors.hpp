#pragma once

#include <stdexcept>
#include <string>

namespace sketchreg {

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidDimensions : Error {
    using Error::Error;
};
struct DimensionMismatch : Error {
    using Error::Error;
};
struct NonPowerOfTwo : Error {
    using Error::Error;
};
struct ConvergenceFailure : Error {
    using Error::Error;
};
struct SparsityExceedsRows : Error {
    using Error::Error;
};
struct TooLarge : Error {
    using Error::Error;
};
struct RankDeficient : Error {
    using Error::Error;
};
struct ZeroDirection : Error {
    using Error::Error;
};
struct NotOrthonormal : Error {
    using Error::Error;
};
struct TNormTooLarge : Error {
    using Error::Error;
};
struct InvalidParams : Error {
    using Error::Error;
};
struct ConfigInvalid : Error {
    using Error::Error;
};
struct EmptyInput : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

// Thrown when a computed result violates a structural invariant. The harness
// treats this as a library bug and aborts the run (exit code 1).
struct InternalInvariant : Error {
    using Error::Error;
};

}  // namespace sketchreg
