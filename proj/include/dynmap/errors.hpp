#pragma once

#include <stdexcept>
#include <string>

namespace dynmap {

// Every domain failure derives from Error so callers can catch one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BoundsError : public Error {
 public:
  using Error::Error;
};

class ParameterError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, int line)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what), line_(0) {}

  int line() const { return line_; }

 private:
  int line_;
};

class NotFoundError : public Error {
 public:
  using Error::Error;
};

class OrderingError : public Error {
 public:
  using Error::Error;
};

// Raised when no admissible navigation goal exists near a piece of furniture.
class NoGoalError : public Error {
 public:
  using Error::Error;
};

class NoSpaceError : public Error {
 public:
  using Error::Error;
};

class UnreachableError : public Error {
 public:
  using Error::Error;
};

class FitError : public Error {
 public:
  using Error::Error;
};

class InsufficientSupportError : public Error {
 public:
  using Error::Error;
};

class BackendUnavailableError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public Error {
 public:
  using Error::Error;
};

class LoadError : public Error {
 public:
  LoadError(const std::string& what, int event_index)
      : Error("event " + std::to_string(event_index) + ": " + what),
        event_index_(event_index) {}
  explicit LoadError(const std::string& what) : Error(what), event_index_(-1) {}

  int event_index() const { return event_index_; }

 private:
  int event_index_;
};

}  // namespace dynmap
