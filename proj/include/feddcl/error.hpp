/*
 * Copyright 2026 The FedDCL Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace feddcl {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad argument: out-of-range rank, shape mismatch, empty input.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// Input data violates a contract (non-finite entries, unknown label).
class DataError : public Error {
 public:
  using Error::Error;
};

/// An iterative kernel failed to converge or produced a non-finite value.
class NumericError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t col)
      : Error(what + " (row " + std::to_string(row) + ", column " +
              std::to_string(col) + ")"),
        row_(row),
        col_(col) {}

  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }

 private:
  std::size_t row_;
  std::size_t col_;
};

/// Malformed binary container (IDX magic, checkpoint header).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Invalid run/protocol configuration. `field` is a dotted path.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error(field + ": " + what), field_(field) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// Models that cannot be averaged together.
class AggregationError : public Error {
 public:
  AggregationError(std::size_t participant, const std::string& what)
      : Error("participant " + std::to_string(participant) + ": " + what),
        participant_(participant) {}

  std::size_t participant() const noexcept { return participant_; }

 private:
  std::size_t participant_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Wraps a failure of one protocol stage with the stage label.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& what)
      : Error("stage '" + stage + "' failed: " + what), stage_(stage) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace feddcl
