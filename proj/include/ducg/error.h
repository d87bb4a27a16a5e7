#ifndef DUCG_ERROR_H_
#define DUCG_ERROR_H_

#include <stdexcept>
#include <string>
#include <utility>

namespace ducg {

/// Base class of every error thrown by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A document does not conform to its schema. `path()` names the field,
/// e.g. "links[3].a[0].p".
class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& msg)
      : Error(path.empty() ? msg : path + ": " + msg), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A reference to an undeclared entity.
class ReferenceError : public Error {
 public:
  using Error::Error;
};

/// Two sources disagree about the same entity (fusion, re-registration).
class ConflictError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its precondition.
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration refused because the problem is too large.
class SizeError : public Error {
 public:
  using Error::Error;
};

/// A requested model or session does not exist.
class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// Input that is well formed but rejected by the current state, such as an
/// observation batch that contradicts itself.
class RejectedError : public Error {
 public:
  using Error::Error;
};

}  // namespace ducg

#endif  // DUCG_ERROR_H_
