#pragma once

#include <stdexcept>
#include <string>

namespace chatnav {

// Base for every error raised by the library. Conditions that are part of a
// normal run (collisions, unknown commands, failed navigation) are reported
// through return values and status messages instead.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A configuration or data file failed to parse or violates an invariant.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : Error(path.empty() ? what : path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

// Payload type does not match the schema registered for a topic.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Vectors of different length were combined.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A required input was empty or otherwise outside an operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace chatnav
