#pragma once

#include <stdexcept>
#include <string>

namespace rsid {

/// Base class for all library errors.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NonConvergence : Error {
    using Error::Error;
};

struct NotSymmetric : Error {
    using Error::Error;
};

/// A Cholesky pivot fell below the relative threshold; the matrix is
/// numerically singular or indefinite.
struct NotPositiveDefinite : Error {
    using Error::Error;
};

struct TooFewTrajectories : Error {
    using Error::Error;
};

struct InfeasiblePlan : Error {
    using Error::Error;
};

/// A bucket's empirical covariance could not be inverted. Carries the
/// offending bucket index (-1 when raised outside the bucket loop).
struct SingularCovariance : Error {
    explicit SingularCovariance(const std::string& what, int bucket = -1)
        : Error(what), bucket_index(bucket) {}
    int bucket_index;
};

struct JensenViolation : Error {
    using Error::Error;
};

struct EtaTooLarge : Error {
    using Error::Error;
};

struct EmptyGroup : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

}  // namespace rsid
