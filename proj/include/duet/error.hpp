#pragma once

#include <stdexcept>
#include <string>

namespace duet {

/// Malformed input file or document. The message carries the line number
/// or field path of the offending token.
class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training was asked to separate data that contains only one class.
class DegenerateTrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fewer than two confirmed tracks were available when a two-person
/// identity assignment was requested.
class NotEnoughPersonsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace duet
