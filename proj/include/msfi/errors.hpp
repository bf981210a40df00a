/*
 * Copyright 2026 The msfi-eval Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace msfi {

// Error hierarchy. The CLI maps each family to its exit code:
// UsageError -> 1, DataError -> 2, OracleError -> 3.

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

/// Malformed, missing or inconsistent input data (files, manifests, shapes).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A quantity is mathematically undefined for the given input
/// (zero weights, zero variance, all ratings in one category, ...).
class UndefinedError : public DataError {
 public:
  using DataError::DataError;
};

/// Transport, protocol or model failure while talking to an oracle.
class OracleError : public Error {
 public:
  using Error::Error;
};

class TimeoutError : public OracleError {
 public:
  using OracleError::OracleError;
};

class ProtocolError : public OracleError {
 public:
  using OracleError::OracleError;
};

}  // namespace msfi
