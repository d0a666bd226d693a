// Copyright 2026-present the latentsearch project
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

namespace latentsearch {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument or violated precondition supplied by the caller.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Vector or matrix dimensions do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A vector whose norm is too small to normalize.
class DegenerateVectorError : public Error {
 public:
  using Error::Error;
};

/// Binary file is not in the expected layout.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Well-formed input whose contents violate a data invariant
/// (non-finite values, duplicate ids, misaligned rows).
class DataError : public Error {
 public:
  using Error::Error;
};

/// Text input could not be parsed.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Operation is not valid in the object's current state.
class StateError : public Error {
 public:
  using Error::Error;
};

/// Reading or writing a file or stream failed.
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace latentsearch
