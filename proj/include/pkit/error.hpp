/* Copyright 2026 The previous-kit Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#ifndef PKIT_ERROR_HPP_
#define PKIT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace pkit {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed documents: bad JSON/CSV syntax, unknown fields or kinds.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Files that cannot be opened, read or written.
class IoError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a domain rule (invalid network, missing
// model for a layer kind, singular fit, overflow, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace pkit

#endif  // PKIT_ERROR_HPP_
