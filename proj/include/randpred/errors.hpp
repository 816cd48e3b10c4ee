#pragma once

#include <stdexcept>

namespace randpred {

/// Insert of a key that is already stored.
class DuplicateKey : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Delete of a key that is not stored.
class AbsentKey : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// An update would push the stored count outside [c_min * n, c_max * n).
class BandViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Representatives could not be given distinct part indices.
class SmoothnessViolation : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A key source stopped producing usable (fresh, distinct) keys.
class SourceExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Partition sizing was asked for parameters it cannot serve.
class SizingError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace randpred
