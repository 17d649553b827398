// Copyright 2026 The lexcon Authors.
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

namespace lexcon {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A constraint phrase was empty (or became empty after prefix stripping).
class InvalidConstraint : public Error {
 public:
  using Error::Error;
};

// A scorer received histories it cannot score, or produced a matrix that is
// not a valid batch of log-distributions.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// A token id outside the vocabulary reached detokenization.
class CorruptHypothesis : public Error {
 public:
  using Error::Error;
};

// Exhaustive search refused an instance over its enumeration budget.
class SearchTooLarge : public Error {
 public:
  using Error::Error;
};

// Correlation requested on data with zero variance on an axis.
class UndefinedCorrelation : public Error {
 public:
  using Error::Error;
};

// Malformed model, vocabulary, or request file.
class FormatError : public Error {
 public:
  using Error::Error;
};

// Broken engine invariant. Never expected to fire.
class InternalError : public Error {
 public:
  using Error::Error;
};

}  // namespace lexcon
