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

#ifndef LGTRAJ_CONFIG_HPP
#define LGTRAJ_CONFIG_HPP

#include "lgtraj/ripm.hpp"
#include "lgtraj/scenarios.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace lgtraj
{
  /// Malformed or inconsistent configuration.
  class ConfigError : public std::runtime_error
  {
  public:
    using std::runtime_error::runtime_error;
  };

  /// Flat "dotted.key = value" text configuration.
  ///
  /// Lines starting with '#' are comments. Lookups consult the environment
  /// first: key "solver.eps_tol" is overridden by LGTRAJ_SOLVER_EPS_TOL.
  class Config
  {
  public:
    static Config parse(std::istream &in, const std::string &source = "<config>");
    static Config load(const std::string &path);

    static std::string env_name(const std::string &key);

    void set(const std::string &key, const std::string &value);
    bool has(const std::string &key) const;
    std::optional<std::string> raw(const std::string &key) const;
    std::vector<std::string> keys() const;

    std::string get_string(const std::string &key, const std::string &fallback) const;
    double get_double(const std::string &key, double fallback) const;
    int get_int(const std::string &key, int fallback) const;
    bool get_bool(const std::string &key, bool fallback) const;
    /// Comma- or space-separated list of numbers.
    std::vector<double> get_list(const std::string &key, const std::vector<double> &fallback) const;
    Vec3 get_vec3(const std::string &key, const Vec3 &fallback) const;

  private:
    std::map<std::string, std::string> values_;
  };

  /// Everything a CLI invocation needs.
  struct RunConfig
  {
    std::string command;
    std::string scenario = "drone"; ///< drone | chain | manipulator
    std::string out_dir = ".";
    std::string preset = "table";
    std::vector<std::uint64_t> seeds{0};
    int workers = 1;

    SolverOptions solver;
    DroneConfig drone;

    ChainConfig chain;
    int chain_links = 3;
    std::string robot_path;

    std::vector<int> bench_depths{2, 4, 8, 16, 32};
    int bench_evaluations = 100;
    int bench_N = 2;

    int sim_steps = 1000;
    double sim_dt = 0.01;
    Vec3 sim_omega = Vec3(0.3, -0.7, 1.1);
    double sim_tol = 1e-12;

    int check_trials = 100;
    std::uint64_t check_seed = 0;
    bool check_fault = false;
    std::optional<std::vector<std::string>> check_families; ///< unset selects all

    /// Throws ConfigError on inconsistent values or missing referenced files.
    void validate() const;
  };

  /// Keys understood by run_config_from.
  const std::vector<std::string> &known_config_keys();

  /// Applies config keys (and their environment overrides) on top of base.
  /// Unknown keys raise ConfigError.
  RunConfig run_config_from(const Config &config, RunConfig base = {});

} // namespace lgtraj

#endif // LGTRAJ_CONFIG_HPP
