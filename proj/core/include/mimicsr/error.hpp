// Copyright 2026 The mimicsr Authors
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

namespace mimicsr {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad arguments, shape mismatches, violated preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Missing files, unreadable images, inconsistent manifests.
class DataError : public Error {
 public:
  using Error::Error;
};

// Non-finite losses, failed fits, exhausted retry budgets.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Every pixel of a patch was masked out by the flow validity test.
class DegenerateMaskError : public NumericError {
 public:
  using NumericError::NumericError;
};

#define MIMICSR_CHECK(cond, msg)                  \
  do {                                            \
    if (!(cond)) throw ::mimicsr::InvalidArgument(msg); \
  } while (0)

}  // namespace mimicsr
