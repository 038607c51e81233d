#pragma once

#include <stdexcept>
#include <string>

namespace cotrack {

// Error taxonomy shared by the whole library. The CLI maps these onto
// process exit codes (see tools/cotrack.cpp).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A call violated a documented precondition.
class InvalidArgument : public Error {
public:
    using Error::Error;
};

// File missing or unreadable.
class IoError : public Error {
public:
    using Error::Error;
};

// A config file key failed validation. Message names the key.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A data file parsed but its content is inconsistent.
class DataError : public Error {
public:
    using Error::Error;
};

// A numerical computation produced an inconsistent result (NaN iterate,
// non-real inverse transform, ...).
class NumericalError : public Error {
public:
    using Error::Error;
};

// The target cannot be located any more (degenerate search window).
class TrackingLost : public Error {
public:
    using Error::Error;
};

// A linear system without a unique solution.
class SingularError : public Error {
public:
    using Error::Error;
};

} // namespace cotrack
