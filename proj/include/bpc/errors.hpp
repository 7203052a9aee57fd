#pragma once

#include <stdexcept>
#include <string>

namespace bpc {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RankDeficient : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParams : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FilterStarvation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NoOverlap : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Process exit codes used by the CLI.
enum ExitCode : int {
    kExitOk = 0,
    kExitParse = 2,      // malformed input, bad file, bad flag value
    kExitDimension = 3,  // dimension mismatch or rank failure
    kExitNumerical = 4,  // NaN/inf escaped a numerical kernel
    kExitStarvation = 5, // syndrome filter acceptance collapsed
};

} // namespace bpc
