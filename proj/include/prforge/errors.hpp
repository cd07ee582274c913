#pragma once

#include <stdexcept>
#include <string>

namespace prforge {

/// Array shapes that do not fit together.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A file that does not follow its declared binary or text format.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class BadMagicError : public FormatError {
public:
    using FormatError::FormatError;
};

class VersionMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

class ShapeMismatchError : public FormatError {
public:
    using FormatError::FormatError;
};

class TruncatedBlobError : public FormatError {
public:
    using FormatError::FormatError;
};

/// Bad user-supplied configuration (unknown keys, out-of-range values).
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace prforge
