// Copyright eddylab contributors. All Rights Reserved.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace eddylab {

/// Input geometry is unusable (empty mask, bad extents, non-positive spacing).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input is structurally inconsistent (bad boundary split, malformed scenario).
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Vector or operator sizes do not conform.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// The material law violates rho*M + N >= c > 0.
class ModelInvalidError : public std::runtime_error {
 public:
  ModelInvalidError(const std::string& what, std::size_t dof, std::string region)
      : std::runtime_error(what), dof_(dof), region_(std::move(region)) {}

  std::size_t dof() const noexcept { return dof_; }
  const std::string& region() const noexcept { return region_; }

 private:
  std::size_t dof_;
  std::string region_;
};

/// An inner linear solve missed its residual tolerance.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, std::size_t step, double residual)
      : std::runtime_error(what), step_(step), residual_(residual) {}

  std::size_t step() const noexcept { return step_; }
  double residual() const noexcept { return residual_; }

 private:
  std::size_t step_;
  double residual_;
};

}  // namespace eddylab
