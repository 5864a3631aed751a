// Copyright 2026 The sad-enhance Authors
// License: Apache 2.0 (http://www.apache.org/licenses/LICENSE-2.0)

#pragma once

#include <stdexcept>
#include <string>

namespace sad {

/// Base of every error the library throws. The CLI maps any of these to a
/// nonzero exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Arguments violate an operation's precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A configuration value is out of range or inconsistent.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// File could not be opened, read, written or parsed.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Caller asked for something the API contract forbids, e.g. gradients
/// through a hard band split.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A training loss became NaN or infinite.
class NonFiniteLoss : public Error {
 public:
  NonFiniteLoss(const std::string& what, std::string utterance_id)
      : Error(what), utterance_id_(std::move(utterance_id)) {}
  const std::string& utterance_id() const { return utterance_id_; }

 private:
  std::string utterance_id_;
};

}  // namespace sad
