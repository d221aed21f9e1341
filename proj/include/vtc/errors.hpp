#pragma once

#include <stdexcept>
#include <string>

namespace vtc {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Tensor/layer dimension mismatch. The message names the offending dimension.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A parameter value outside its legal range (rate >= 1, lr <= 0, ...).
class ValueError : public Error {
public:
    using Error::Error;
};

/// An operation was called in an illegal order (backward without forward, ...).
class StateError : public Error {
public:
    using Error::Error;
};

/// File system / stream failure.
class IoError : public Error {
public:
    using Error::Error;
};

/// Malformed file contents (bad magic, inconsistent header, bad schema).
class FormatError : public IoError {
public:
    using IoError::IoError;
};

/// File written by a newer format version than this build understands.
class VersionError : public IoError {
public:
    using IoError::IoError;
};

/// File ends before its declared payload does.
class TruncatedError : public IoError {
public:
    using IoError::IoError;
};

/// Whole-file checksum does not match the stored trailer.
class ChecksumError : public IoError {
public:
    using IoError::IoError;
};

} // namespace vtc
