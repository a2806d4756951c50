#pragma once

#include <stdexcept>
#include <string>

namespace radsentry {

// Base class for all toolkit errors. Subcommands map these to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input file is missing a required header column or has an unusable layout.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// A value could not be parsed (timestamp, numeric field, ...).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Configuration file or flag combination is invalid.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Binary blob failed validation while loading.
class DecodeError : public Error {
 public:
  using Error::Error;
};

// A precondition on an operation was violated.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace radsentry
