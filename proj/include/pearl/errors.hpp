#pragma once

#include <stdexcept>
#include <string>

namespace pearl {

/// Base class for every error this library throws.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct IoError : Error {
  using Error::Error;
};

/// Raised when a persisted artifact (registry, dataset, demos file) does not
/// match its schema. The message names the offending entry.
struct SchemaError : Error {
  using Error::Error;
};

struct UnknownPreset : Error {
  using Error::Error;
};

struct InvariantViolation : Error {
  using Error::Error;
};

struct UnpairedRecords : Error {
  using Error::Error;
};

struct MissingArtifact : Error {
  explicit MissingArtifact(const std::string& path)
      : Error("missing artifact: " + path), path(path) {}
  std::string path;
};

}  // namespace pearl
