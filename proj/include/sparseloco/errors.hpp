// Copyright 2026 The SparseLoCo Simulator Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace sparseloco {

/// Vector lengths or chunk metadata that do not line up.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Cosine similarity requested for two zero vectors.
class UndefinedSimilarity : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid or inconsistent run configuration. `field()` names the offending
/// config key (dotted path) when one applies.
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A NaN or Inf showed up in model state.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed serialized data (wire messages, dataset files, bit streams).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace sparseloco
