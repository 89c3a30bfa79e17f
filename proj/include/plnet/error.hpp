#pragma once

#include <stdexcept>
#include <string>

namespace plnet {

/// Malformed input: bad files, dimension mismatches, invalid arguments.
class InputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A computation left the numerically valid domain (overflow, loss of
/// positive-definiteness, singular systems).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace plnet
