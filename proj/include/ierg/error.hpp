// Copyright 2026 The ierg Authors.
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

#ifndef IERG_ERROR_HPP_
#define IERG_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <vector>

namespace ierg {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A precondition on an argument does not hold (bad index, bad shape, x
// outside [0,1], ...).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A mathematical object is outside the domain of an operation, e.g. a
// non-positive-definite block matrix or a resolvent requested with
// mu <= ||W||.
class DomainError : public Error {
 public:
  using Error::Error;
};

// epsilon * sup f > 1, so some edge probability would exceed one.
class ProbabilityOverflow : public DomainError {
 public:
  using DomainError::DomainError;
};

// The GraphSample was produced from a different kernel than the one passed.
class KernelMismatch : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

// Iterative solver gave up. Carries the best residuals reached so callers can
// decide whether to accept them.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, std::vector<double> best_residuals)
      : Error(what), best_residuals_(std::move(best_residuals)) {}

  const std::vector<double>& best_residuals() const { return best_residuals_; }

 private:
  std::vector<double> best_residuals_;
};

// Not enough Monte Carlo replicates for a statistical check.
class InsufficientData : public Error {
 public:
  using Error::Error;
};

// File could not be read or written, or has the wrong format.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace ierg

#endif  // IERG_ERROR_HPP_
