// Copyright 2026 The Occlufuse Authors
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

namespace occlufuse {

/// Bad user input: malformed files, out-of-schema values, missing paths.
/// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: non-convergence, rank deficiency, unstable steps.
/// The CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// The silhouette matcher lost the object: the observed mask is empty, or
/// no pose with a non-negative overlap score was found. Callers running a
/// tracking loop catch this and mark the frame's vision estimate invalid.
class LostTrackError : public NumericalError {
 public:
  explicit LostTrackError(const std::string& what) : NumericalError(what) {}
};

}  // namespace occlufuse
