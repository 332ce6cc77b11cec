#pragma once

#include <stdexcept>

namespace vin {

/// Malformed input: bad files, unknown columns, invalid arguments.
class DataError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Numerical failure: singular systems, non-finite states, undefined statistics.
class NumericError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

} // namespace vin
