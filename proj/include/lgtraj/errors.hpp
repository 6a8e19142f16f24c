/*
 Copyright 2026 lgtraj contributors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef LGTRAJ_ERRORS_HPP
#define LGTRAJ_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace lgtraj
{
  /// Raised when an iterative numerical routine fails to reach its target.
  class SolverError : public std::runtime_error
  {
  public:
    SolverError(const std::string &what, double last_residual, int index = -1)
        : std::runtime_error(what), last_residual_(last_residual), index_(index) {}

    double last_residual() const { return last_residual_; }
    /// Step, pivot or iteration index the failure refers to; -1 when unknown.
    int index() const { return index_; }

  private:
    double last_residual_;
    int index_;
  };

  /// Raised when solver state violates a structural precondition
  /// (e.g. a nonpositive slack handed to the KKT assembler).
  class InvalidState : public std::runtime_error
  {
  public:
    using std::runtime_error::runtime_error;
  };

} // namespace lgtraj

#endif // LGTRAJ_ERRORS_HPP
