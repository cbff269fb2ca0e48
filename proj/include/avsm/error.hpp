#pragma once

#include <stdexcept>
#include <string>

namespace avsm {

/// Bad input data: malformed files, mismatched sizes, exhausted streams.
/// The CLI maps this to exit code 2.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid parameters or configuration. The CLI maps this to exit code 1.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace avsm
