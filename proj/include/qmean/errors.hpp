// Copyright 2026 The qmean Authors
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

namespace qmean {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent configuration (bad JSON, missing keys, wrong sizes).
class ConfigError : public Error {
   public:
    using Error::Error;
};

/// Input outside the mathematical domain of an operation: non-Hermitian
/// matrices, negative spectra fed to functions on R>=0, degenerate spectra.
class DomainError : public Error {
   public:
    using Error::Error;
};

/// The Markov chain sampler could not produce a trajectory.
class SamplerError : public Error {
   public:
    using Error::Error;
};

}  // namespace qmean
