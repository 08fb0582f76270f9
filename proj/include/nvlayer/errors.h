// Copyright 2026 The nvlayer Authors
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

#pragma once

#include <stdexcept>
#include <string>

namespace nvlayer {

/// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
  kGeometry,
  kConfiguration,
  kCapacity,
  kStepSize,
  kQuery,
  kFit,
  kDomain,
  kReadout,
  kCache,
  kInfeasible,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class GeometryError : public Error {
 public:
  explicit GeometryError(const std::string& w) : Error(ErrorKind::kGeometry, w) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& w) : Error(ErrorKind::kConfiguration, w) {}
};

class CapacityError : public Error {
 public:
  CapacityError(const std::string& w, std::size_t requested)
      : Error(ErrorKind::kCapacity, w), requested_(requested) {}
  std::size_t requested() const noexcept { return requested_; }

 private:
  std::size_t requested_;
};

class StepSizeError : public Error {
 public:
  explicit StepSizeError(const std::string& w) : Error(ErrorKind::kStepSize, w) {}
};

class QueryError : public Error {
 public:
  explicit QueryError(const std::string& w) : Error(ErrorKind::kQuery, w) {}
};

class FitError : public Error {
 public:
  FitError(const std::string& w, double best_residual)
      : Error(ErrorKind::kFit, w), best_residual_(best_residual) {}
  double best_residual() const noexcept { return best_residual_; }

 private:
  double best_residual_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& w) : Error(ErrorKind::kDomain, w) {}
};

class ReadoutError : public Error {
 public:
  explicit ReadoutError(const std::string& w) : Error(ErrorKind::kReadout, w) {}
};

class CacheError : public Error {
 public:
  explicit CacheError(const std::string& w) : Error(ErrorKind::kCache, w) {}
};

class InfeasibleError : public Error {
 public:
  explicit InfeasibleError(const std::string& w) : Error(ErrorKind::kInfeasible, w) {}
};

}  // namespace nvlayer
