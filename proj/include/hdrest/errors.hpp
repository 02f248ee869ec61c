#pragma once

#include <stdexcept>
#include <string>

namespace hdrest {

/// Base for all library errors. Callers that only care about failure catch this.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Fewer than three distinct points, or all points collinear.
class DegenerateInput : public Error {
public:
    using Error::Error;
};

/// Sample covariance (or a derived bandwidth) is not positive definite.
class DegenerateSample : public Error {
public:
    using Error::Error;
};

/// Threshold above the grid maximum: the contour level set is empty.
class EmptyRegion : public Error {
public:
    using Error::Error;
};

/// Malformed input files (CSV header, JSON documents).
class FormatError : public Error {
public:
    using Error::Error;
};

/// CSV header missing or lacking a mapped column; aborts ingestion.
class MalformedHeader : public FormatError {
public:
    using FormatError::FormatError;
};

}  // namespace hdrest
