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

#ifndef LGTRAJ_RECORDS_HPP
#define LGTRAJ_RECORDS_HPP

#include "lgtraj/ripm.hpp"
#include "lgtraj/scenarios.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace lgtraj
{
  /// Shortest text that round-trips: 17 significant digits.
  std::string format_double(double v);

  /// Summary of one solver run.
  struct ResultRecord
  {
    std::string scenario;
    std::uint64_t seed = 0;
    SolverStatus status = SolverStatus::MaxIterations;
    int iterations = 0;
    double final_E0 = 0.0;
    double cost = 0.0;
    double time_total = 0.0;
    double t_per_iter_solver = 0.0; ///< excludes function evaluation
    double t_per_iter_total = 0.0;

    static ResultRecord from(const std::string &scenario, std::uint64_t seed, const SolveResult &result);

    /// Single line of space-separated key=value pairs.
    std::string to_line() const;
    static ResultRecord parse_line(const std::string &line);

    bool operator==(const ResultRecord &) const = default;
  };

  SolverStatus parse_solver_status(const std::string &name);
  AcceptReason parse_accept_reason(const std::string &name);

  /// One header line followed by one whitespace-separated record per iteration.
  void write_trace(std::ostream &out, const IterationTrace &trace);
  IterationTrace read_trace(std::istream &in);

  void write_sweep_csv(std::ostream &out, const std::vector<SeedResult> &runs);
  void write_bench_csv(std::ostream &out, const std::vector<ChainTiming> &rows);

} // namespace lgtraj

#endif // LGTRAJ_RECORDS_HPP
