#ifndef DYS_ERROR_HPP
#define DYS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dys {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor dimensions do not chain or do not match an input.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A scalar argument is outside its admissible range.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Input table does not match the declared schema.
class SchemaError : public Error {
public:
    using Error::Error;
};

/// Input values violate a data contract (negative time, bad event flag, ...).
class DataError : public Error {
public:
    using Error::Error;
};

/// A loss or gradient became NaN/inf.
class NumericError : public Error {
public:
    using Error::Error;
};

/// Training could not proceed (e.g. nothing left to fit).
class TrainingError : public Error {
public:
    using Error::Error;
};

} // namespace dys

#endif // DYS_ERROR_HPP
