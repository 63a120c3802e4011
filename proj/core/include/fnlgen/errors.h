// Copyright 2026 The fnlgen Authors.
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

#ifndef FNLGEN_ERRORS_H_
#define FNLGEN_ERRORS_H_

#include <stdexcept>
#include <string>

namespace fnlgen {

// Root of every error raised by the library. Each subclass maps to one
// failure category so callers (the CLI in particular) can pick exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Iterative kernel failed to converge, or a value became non-finite.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Input lies outside the mathematical domain of an operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Matrix is not invertible (after any requested ridge).
class SingularMatrixError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration or invalid arguments to a constructor.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Structured file could not be parsed or is missing required fields.
class FormatError : public Error {
 public:
  using Error::Error;
};

class VersionError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Parsed file is well-formed but array shapes disagree with its config.
class ShapeError : public FormatError {
 public:
  using FormatError::FormatError;
};

}  // namespace fnlgen

#endif  // FNLGEN_ERRORS_H_
