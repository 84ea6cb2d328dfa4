// Copyright 2026 The ProtestLens Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace protestlens {

// Base of every error raised by the library. The CLI maps subclasses onto
// exit statuses.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input data (dataset lines, vector files, feature files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration: bad patterns, unknown presets, bad flag values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A required input file could not be opened.
class MissingInputError : public Error {
 public:
  using Error::Error;
};

// Operand shapes disagree with what an operation requires.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Precondition on a value (empty dataset, missing label, too few rows...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient during training.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Embedding service answered with a non-success HTTP status.
class TransportError : public Error {
 public:
  TransportError(int status, const std::string& what)
      : Error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

// Embedding service answered, but the payload violates the wire contract.
class ProtocolError : public Error {
 public:
  using Error::Error;
};

// Timeout or connection failure; the request may be retried.
class RetriableError : public Error {
 public:
  using Error::Error;
};

}  // namespace protestlens
