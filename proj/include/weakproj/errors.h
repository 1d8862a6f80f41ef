// Copyright 2026 The weakproj Authors.
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

#ifndef WEAKPROJ_ERRORS_H_
#define WEAKPROJ_ERRORS_H_

#include <stdexcept>
#include <string>

namespace weakproj {

// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input or a violated invariant. Maps to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Missing or unreadable files, failed writes. Maps to exit code 2.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace weakproj

#endif  // WEAKPROJ_ERRORS_H_
