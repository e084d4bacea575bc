#pragma once

#include <stdexcept>
#include <string>

namespace masklift {

// Malformed or inconsistent input data: files, scenes, tracks.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid option values or option combinations.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A single seed superpoint could not be turned into a proposal
// (never visible, prompts missed every instance, ...). The pipeline
// consumes the seed and moves on.
class LiftError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An internal consistency check failed.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace masklift
