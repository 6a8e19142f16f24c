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

#ifndef LGTRAJ_CHECK_HPP
#define LGTRAJ_CHECK_HPP

#include "lgtraj/constraints.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lgtraj
{
  struct CheckOptions
  {
    int states = 100;          ///< random instances per family
    int directions = 1;        ///< random directions per instance, after the coordinate sweep
    std::uint64_t seed = 0;
    bool inject_fault = false; ///< perturbs one Jacobian entry of every block by 1e-3
    std::optional<std::vector<std::string>> families; ///< unset selects all
    double gradient_threshold = 1e-6;
    double hessian_threshold = 1e-4;
  };

  struct FamilyReport
  {
    std::string family;
    int states = 0;
    double gradient_error = 0.0; ///< worst case over all states and directions
    double hessian_error = 0.0;
    bool pass = true;
  };

  /// Every constraint family plus both cost families.
  const std::vector<std::string> &check_families();

  /// Random block instance of a family at a random state.
  struct BlockSample
  {
    VariableLayout layout;
    BlockPtr block;
    Point x;
  };

  BlockSample sample_block(const std::string &family, std::mt19937_64 &rng);

  /// Runs fd_check over random instances of each selected family. Unknown
  /// family names throw std::invalid_argument.
  std::vector<FamilyReport> run_derivative_check(const CheckOptions &options);

} // namespace lgtraj

#endif // LGTRAJ_CHECK_HPP
