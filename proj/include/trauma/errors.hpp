#pragma once

#include <stdexcept>
#include <string>

namespace trauma {

// Violated precondition or shape/length mismatch between arguments.
class contract_error : public std::runtime_error {
 public:
  explicit contract_error(const std::string& what) : std::runtime_error(what) {}
};

// Invalid configuration value (bad dimensions, lo >= hi, unknown keys, ...).
class config_error : public std::runtime_error {
 public:
  explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem or serialization failure.
class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite value escaped a numeric routine.
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& what) : std::runtime_error(what) {}
};

// An all-zero mask where a nonempty one is required. Carries a flag telling
// callers the documented fallback is to keep the full, uncropped volume.
class degenerate_mask_error : public contract_error {
 public:
  explicit degenerate_mask_error(const std::string& what)
      : contract_error(what) {}
  bool full_volume_fallback = true;
};

// An all-zero probability group fed to the metric normalizer.
class degenerate_input_error : public contract_error {
 public:
  explicit degenerate_input_error(const std::string& what)
      : contract_error(what) {}
};

}  // namespace trauma
