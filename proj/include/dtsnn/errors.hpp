// Copyright 2026 The dtsnn Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DTSNN_ERRORS_HPP_
#define DTSNN_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace dtsnn {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Tensor or layer shapes that do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A value outside its documented domain (targets, ratios, config keys).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// A file whose header or layout is not what the reader expects.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A file shorter than its header declares.
class TruncatedError : public FormatError {
 public:
  using FormatError::FormatError;
};

// Non-finite values or integer accumulator overflow.
class NumericError : public Error {
 public:
  using Error::Error;
};

// An operation invoked without the state it depends on.
class StateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised by the cycle simulator (misconfiguration, deadlock, handshake
// violations).
class SimulatorError : public Error {
 public:
  using Error::Error;
};

}  // namespace dtsnn

#endif  // DTSNN_ERRORS_HPP_
