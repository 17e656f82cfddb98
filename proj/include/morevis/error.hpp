#pragma once

#include <stdexcept>
#include <string>

namespace morevis {

/// Base for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file or document.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input parsed but violates a dataset invariant. `record` names the
/// offending object id (empty when not attributable).
class ValidationError : public Error {
 public:
  ValidationError(const std::string& what, std::string record = {})
      : Error(what), record_(std::move(record)) {}
  const std::string& record() const noexcept { return record_; }

 private:
  std::string record_;
};

/// The optimizer failed on a timestep.
class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace morevis
