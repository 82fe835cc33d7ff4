// Copyright 2026 The xrtg Authors.
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

#ifndef XRTG_ERROR_HPP
#define XRTG_ERROR_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace xrtg {

// Process exit codes used by the command line front end.
enum class ExitCode : int {
  kOk = 0,
  kUsage = 1,
  kParse = 2,
  kEmptyData = 3,
  kLookup = 4,
  kConfigMismatch = 5,
  kInternal = 10,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const noexcept { return ExitCode::kInternal; }
};

// Invalid distribution parameters or arguments outside a function's domain.
class DomainError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kUsage; }
};

class UsageError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kUsage; }
};

// Malformed capture file. Carries the byte offset where parsing stopped.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::uint64_t offset() const noexcept { return offset_; }
  ExitCode exit_code() const noexcept override { return ExitCode::kParse; }

 private:
  std::uint64_t offset_;
};

// Malformed or version-mismatched metrics/model file.
class FormatError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kParse; }
};

class EmptyDataError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kEmptyData; }
};

class FitError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kEmptyData; }
};

class LookupError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kLookup; }
};

class ConfigMismatchError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override {
    return ExitCode::kConfigMismatch;
  }
};

// A generator whose floor constraint cannot be met.
class DegenerateModelError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const noexcept override { return ExitCode::kEmptyData; }
};

}  // namespace xrtg

#endif  // XRTG_ERROR_HPP
