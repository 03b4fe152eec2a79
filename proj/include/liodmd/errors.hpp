#ifndef LIODMD_ERRORS_HPP
#define LIODMD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace liodmd {

/// Bad arguments: dimension mismatches, out-of-range parameters.
class InputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed or inconsistent data files and datasets.
class FormatError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// An operation was called on an object that is missing required state
/// (e.g. an interaction matrix requested before initial velocities exist).
class StateError : public std::logic_error {
public:
  using std::logic_error::logic_error;
};

/// The training data cannot support a well-posed fit (singular Gram).
class DegenerateDataError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A numerical routine failed to converge or produced non-finite output.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class DivergenceError : public NumericalError {
public:
  DivergenceError(const std::string& what, double blowup_time)
      : NumericalError(what), blowup_time_(blowup_time) {}
  double blowup_time() const noexcept { return blowup_time_; }

private:
  double blowup_time_;
};

}  // namespace liodmd

#endif  // LIODMD_ERRORS_HPP
