#pragma once

#include <stdexcept>

namespace lmforecast {

/// Base class for every error raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Invalid or contradictory configuration (bad fractions, bad layout, ...).
struct ConfigError : Error {
    using Error::Error;
};

/// The damped normal system could not be factorized even after jitter escalation.
struct SolveFailure : Error {
    using Error::Error;
};

/// Min-max normalization over a constant (or empty) range is undefined.
struct DegenerateSeries : Error {
    using Error::Error;
};

/// A requested block split would leave some partition empty.
struct DegenerateSplit : Error {
    using Error::Error;
};

/// Input file does not exist or cannot be opened.
struct FileNotFound : Error {
    using Error::Error;
};

/// Requested CSV column is missing from the file.
struct ColumnNotFound : Error {
    using Error::Error;
};

/// Too few usable rows survived CSV ingestion.
struct EmptySeries : Error {
    using Error::Error;
};

/// Series is shorter than the largest configured lag allows.
struct SeriesTooShort : Error {
    using Error::Error;
};

/// Percentage error is undefined when a target value is zero.
struct ZeroTarget : Error {
    using Error::Error;
};

/// Correlation-style statistics are undefined on constant data.
struct ZeroVariance : Error {
    using Error::Error;
};

} // namespace lmforecast
