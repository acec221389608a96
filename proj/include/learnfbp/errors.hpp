#pragma once

#include <stdexcept>
#include <string>

namespace learnfbp {

/// Bad input: inconsistent shapes, out-of-range parameters, malformed config.
class ValidationError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

/// File missing, unreadable, or refusing to overwrite.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Singular systems, non-finite losses, failed rank checks.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw ValidationError(message);
}

} // namespace learnfbp
