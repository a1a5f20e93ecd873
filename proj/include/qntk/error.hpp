// Copyright 2026 The QNTK Diagnostics Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
/**
 * @file
 * Exception hierarchy shared by every module. The CLI maps these onto exit
 * codes, so each class corresponds to one failure category.
 */
#pragma once

#include <stdexcept>
#include <string>

namespace qntk {

/// Base class for all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Out-of-range or inconsistent configuration values.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// Shape, arity or index mismatches between otherwise valid objects.
class StructuralError : public Error {
  public:
    using Error::Error;
};

/// A result failed an internal numerical sanity check (non-finite entries,
/// complex residue on a real quantity, ...).
class NumericalError : public Error {
  public:
    using Error::Error;
};

/// Every kernel eigenvalue fell below the spectral cutoff, or the kernel is
/// rank deficient where a full-rank spectrum is required.
class SingularKernelError : public Error {
  public:
    using Error::Error;
};

/// A parameterized gate has no Pauli generator.
class UnsupportedGateError : public Error {
  public:
    using Error::Error;
};

/// A metric whose denominator vanishes (zero label variance, zero norm).
class UndefinedMetricError : public Error {
  public:
    using Error::Error;
};

/// Unreadable input or unwritable output.
class IoError : public Error {
  public:
    using Error::Error;
};

} // namespace qntk
