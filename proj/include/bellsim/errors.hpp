#pragma once

#include <stdexcept>
#include <string>

namespace bellsim {

// Invalid input to a library call: bad dimension, null state, out-of-domain
// outcome, malformed trace, and so on.
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A protocol asked for more shared entanglement than it was granted.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal consistency check failed while a protocol was running.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace bellsim
