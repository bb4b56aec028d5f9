// Copyright 2026 The TeNCA Authors. All Rights Reserved.
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

#ifndef TENCA_ERROR_HPP_
#define TENCA_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace tenca {

// Root of every error raised by the library. Callers that only need to
// report and exit can catch this one type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid shapes, counts, or settings supplied by the caller.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Input data violates a documented precondition (non-finite pixels,
// colliding frame times, constant reference image, ...).
class DataError : public Error {
 public:
  using Error::Error;
};

// A non-finite value appeared during a rollout or backward pass.
class NumericError : public Error {
 public:
  NumericError(const std::string& what, long step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  long step() const noexcept { return step_; }

 private:
  long step_;
};

// Internal contract broken by the caller (e.g. a tape replayed against
// parameters of a different shape).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

class VersionError : public IoError {
 public:
  using IoError::IoError;
};

class TruncatedError : public IoError {
 public:
  using IoError::IoError;
};

class ChecksumError : public IoError {
 public:
  using IoError::IoError;
};

}  // namespace tenca

#endif  // TENCA_ERROR_HPP_
