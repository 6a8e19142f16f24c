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

#include "lgtraj/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace lgtraj
{
  namespace
  {
    std::string trim(const std::string &s)
    {
      const auto b = s.find_first_not_of(" \t\r\n");
      if (b == std::string::npos)
      {
        return "";
      }
      const auto e = s.find_last_not_of(" \t\r\n");
      return s.substr(b, e - b + 1);
    }

    std::vector<std::string> split_list(const std::string &s)
    {
      std::string t = s;
      std::replace(t.begin(), t.end(), ',', ' ');
      std::istringstream ss(t);
      std::vector<std::string> out;
      std::string item;
      while (ss >> item)
      {
        out.push_back(item);
      }
      return out;
    }

    double to_double(const std::string &key, const std::string &v)
    {
      try
      {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size())
        {
          throw std::invalid_argument(v);
        }
        return d;
      }
      catch (const std::exception &)
      {
        throw ConfigError("config key '" + key + "': expected a number, got '" + v + "'");
      }
    }

    long long to_integer(const std::string &key, const std::string &v)
    {
      try
      {
        std::size_t used = 0;
        const long long i = std::stoll(v, &used);
        if (used != v.size())
        {
          throw std::invalid_argument(v);
        }
        return i;
      }
      catch (const std::exception &)
      {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + v + "'");
      }
    }

    Mat3 diag(const Vec3 &d) { return d.asDiagonal(); }
  } // namespace

  Config Config::parse(std::istream &in, const std::string &source)
  {
    Config c;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
      ++line_no;
      const std::string t = trim(line);
      if (t.empty() || t[0] == '#')
      {
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos)
      {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": expected 'key = value'");
      }
      const std::string key = trim(t.substr(0, eq));
      if (key.empty())
      {
        throw ConfigError(source + ":" + std::to_string(line_no) + ": empty key");
      }
      c.values_[key] = trim(t.substr(eq + 1));
    }
    return c;
  }

  Config Config::load(const std::string &path)
  {
    std::ifstream in(path);
    if (!in)
    {
      throw ConfigError("cannot open config file '" + path + "'");
    }
    return parse(in, path);
  }

  std::string Config::env_name(const std::string &key)
  {
    std::string out = "LGTRAJ_";
    for (char ch : key)
    {
      out += ch == '.' ? '_' : static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
    }
    return out;
  }

  void Config::set(const std::string &key, const std::string &value) { values_[key] = value; }

  bool Config::has(const std::string &key) const { return raw(key).has_value(); }

  std::optional<std::string> Config::raw(const std::string &key) const
  {
    if (const char *env = std::getenv(env_name(key).c_str()))
    {
      return trim(env);
    }
    const auto it = values_.find(key);
    if (it == values_.end())
    {
      return std::nullopt;
    }
    return it->second;
  }

  std::vector<std::string> Config::keys() const
  {
    std::vector<std::string> out;
    for (const auto &[k, v] : values_)
    {
      out.push_back(k);
    }
    return out;
  }

  std::string Config::get_string(const std::string &key, const std::string &fallback) const
  {
    return raw(key).value_or(fallback);
  }

  double Config::get_double(const std::string &key, double fallback) const
  {
    const auto v = raw(key);
    return v ? to_double(key, *v) : fallback;
  }

  int Config::get_int(const std::string &key, int fallback) const
  {
    const auto v = raw(key);
    return v ? static_cast<int>(to_integer(key, *v)) : fallback;
  }

  bool Config::get_bool(const std::string &key, bool fallback) const
  {
    const auto v = raw(key);
    if (!v)
    {
      return fallback;
    }
    if (*v == "true" || *v == "1" || *v == "yes" || *v == "on")
    {
      return true;
    }
    if (*v == "false" || *v == "0" || *v == "no" || *v == "off")
    {
      return false;
    }
    throw ConfigError("config key '" + key + "': expected a boolean, got '" + *v + "'");
  }

  std::vector<double> Config::get_list(const std::string &key, const std::vector<double> &fallback) const
  {
    const auto v = raw(key);
    if (!v)
    {
      return fallback;
    }
    std::vector<double> out;
    for (const std::string &item : split_list(*v))
    {
      out.push_back(to_double(key, item));
    }
    return out;
  }

  Vec3 Config::get_vec3(const std::string &key, const Vec3 &fallback) const
  {
    if (!has(key))
    {
      return fallback;
    }
    const std::vector<double> v = get_list(key, {});
    if (v.size() != 3)
    {
      throw ConfigError("config key '" + key + "': expected 3 numbers");
    }
    return Vec3(v[0], v[1], v[2]);
  }

  // ---------------------------------------------------------------------------

  void RunConfig::validate() const
  {
    try
    {
      solver.validate();
      if (scenario == "drone")
      {
        drone.validate();
      }
      else if (scenario != "chain" && scenario != "manipulator")
      {
        throw ConfigError("unknown scenario '" + scenario + "' (expected drone, chain or manipulator)");
      }
    }
    catch (const std::invalid_argument &e)
    {
      throw ConfigError(e.what());
    }
    if (seeds.empty())
    {
      throw ConfigError("seed list is empty");
    }
    if (workers < 1)
    {
      throw ConfigError("workers must be >= 1");
    }
    if (!robot_path.empty() && !std::filesystem::exists(robot_path))
    {
      throw ConfigError("robot file '" + robot_path + "' does not exist");
    }
    if (chain_links < 1 || chain.N < 1 || !(chain.dt > 0.0))
    {
      throw ConfigError("chain settings need links >= 1, N >= 1 and dt > 0");
    }
    if (bench_depths.empty() || bench_evaluations < 1 || bench_N < 1)
    {
      throw ConfigError("bench settings need depths, evaluations >= 1 and N >= 1");
    }
    for (int d : bench_depths)
    {
      if (d < 1)
      {
        throw ConfigError("bench depths must be >= 1");
      }
    }
    if (sim_steps < 1 || !(sim_dt > 0.0) || !(sim_tol > 0.0))
    {
      throw ConfigError("simulate settings need steps >= 1, dt > 0 and tol > 0");
    }
    if (check_trials < 1)
    {
      throw ConfigError("check.trials must be >= 1");
    }
  }

  const std::vector<std::string> &known_config_keys()
  {
    static const std::vector<std::string> keys = {
        "run.scenario", "run.out_dir", "run.seeds", "run.workers",
        "solver.preset", "solver.N_max", "solver.J_max", "solver.eps_tol", "solver.kappa_mu", "solver.theta_mu",
        "solver.tau_min", "solver.gamma_theta_barrier", "solver.theta_min", "solver.eta_phi",
        "solver.gamma_theta_progress", "solver.beta", "solver.mu0", "solver.s_phi", "solver.s_theta", "solver.delta",
        "solver.s_max", "solver.regularize",
        "scenario.variant", "scenario.N", "scenario.dt", "scenario.mass", "scenario.inertia", "scenario.gravity",
        "scenario.tau_lim", "scenario.u_z_lim", "scenario.box_lo", "scenario.box_hi", "scenario.angle_min",
        "scenario.angle_max", "scenario.obstacles", "scenario.initial_p", "scenario.initial_rotvec",
        "cost.W_R", "cost.W_p", "cost.W_F", "cost.W_v", "cost.input_weight", "cost.terminal_only", "cost.p_d",
        "cost.R_d",
        "chain.links", "chain.robot", "chain.q_init", "chain.q_goal", "chain.torque_weight", "chain.warm_start",
        "bench.depths", "bench.evaluations", "bench.N",
        "simulate.steps", "simulate.dt", "simulate.omega", "simulate.tol",
        "check.trials", "check.seed", "check.fault", "check.families"};
    return keys;
  }

  RunConfig run_config_from(const Config &c, RunConfig r)
  {
    const auto &known = known_config_keys();
    for (const std::string &key : c.keys())
    {
      if (std::find(known.begin(), known.end(), key) == known.end())
      {
        throw ConfigError("unknown config key '" + key + "'");
      }
    }

    r.scenario = c.get_string("run.scenario", r.scenario);
    r.out_dir = c.get_string("run.out_dir", r.out_dir);
    if (c.has("run.seeds"))
    {
      r.seeds.clear();
      for (const std::string &item : split_list(*c.raw("run.seeds")))
      {
        const long long v = to_integer("run.seeds", item);
        if (v < 0)
        {
          throw ConfigError("run.seeds: seeds must be non-negative");
        }
        r.seeds.push_back(static_cast<std::uint64_t>(v));
      }
    }
    r.workers = c.get_int("run.workers", r.workers);

    SolverOptions &s = r.solver;
    if (c.has("solver.preset"))
    {
      r.preset = c.get_string("solver.preset", r.preset);
      try
      {
        s.eps_tol = tolerance_preset(r.preset);
      }
      catch (const std::invalid_argument &e)
      {
        throw ConfigError(e.what());
      }
    }
    s.N_max = c.get_int("solver.N_max", s.N_max);
    s.J_max = c.get_int("solver.J_max", s.J_max);
    s.eps_tol = c.get_double("solver.eps_tol", s.eps_tol);
    s.kappa_mu = c.get_double("solver.kappa_mu", s.kappa_mu);
    s.theta_mu = c.get_double("solver.theta_mu", s.theta_mu);
    s.tau_min = c.get_double("solver.tau_min", s.tau_min);
    s.gamma_theta_barrier = c.get_double("solver.gamma_theta_barrier", s.gamma_theta_barrier);
    s.theta_min = c.get_double("solver.theta_min", s.theta_min);
    s.eta_phi = c.get_double("solver.eta_phi", s.eta_phi);
    s.gamma_theta_progress = c.get_double("solver.gamma_theta_progress", s.gamma_theta_progress);
    s.beta = c.get_double("solver.beta", s.beta);
    s.mu0 = c.get_double("solver.mu0", s.mu0);
    s.s_phi = c.get_double("solver.s_phi", s.s_phi);
    s.s_theta = c.get_double("solver.s_theta", s.s_theta);
    s.delta = c.get_double("solver.delta", s.delta);
    s.s_max = c.get_double("solver.s_max", s.s_max);
    s.regularize = c.get_bool("solver.regularize", s.regularize);

    DroneConfig &d = r.drone;
    if (c.has("scenario.variant"))
    {
      try
      {
        d.variant = parse_drone_variant(c.get_string("scenario.variant", ""));
      }
      catch (const std::invalid_argument &e)
      {
        throw ConfigError(e.what());
      }
    }
    d.N = c.get_int("scenario.N", d.N);
    d.dt = c.get_double("scenario.dt", d.dt);
    d.mass = c.get_double("scenario.mass", d.mass);
    if (c.has("scenario.inertia"))
    {
      d.inertia = diag(c.get_vec3("scenario.inertia", Vec3::Zero()));
    }
    d.gravity = c.get_vec3("scenario.gravity", d.gravity);
    d.tau_lim = c.get_double("scenario.tau_lim", d.tau_lim);
    d.u_z_lim = c.get_double("scenario.u_z_lim", d.u_z_lim);
    d.box_lo = c.get_vec3("scenario.box_lo", d.box_lo);
    d.box_hi = c.get_vec3("scenario.box_hi", d.box_hi);
    d.angle_min = c.get_double("scenario.angle_min", d.angle_min);
    d.angle_max = c.get_double("scenario.angle_max", d.angle_max);
    if (c.has("scenario.obstacles"))
    {
      const std::vector<double> v = c.get_list("scenario.obstacles", {});
      if (v.size() % 3 != 0)
      {
        throw ConfigError("scenario.obstacles: expected triples 'x y radius'");
      }
      d.obstacles.clear();
      for (std::size_t i = 0; i < v.size(); i += 3)
      {
        d.obstacles.push_back(Cylinder{Eigen::Vector2d(v[i], v[i + 1]), v[i + 2]});
      }
      r.chain.obstacles = d.obstacles;
    }
    if (c.has("scenario.initial_p") || c.has("scenario.initial_rotvec"))
    {
      BodyState x0;
      x0.p = c.get_vec3("scenario.initial_p", Vec3::Zero());
      x0.R = Rotation::exp(c.get_vec3("scenario.initial_rotvec", Vec3::Zero()));
      d.initial = x0;
    }

    CostSpec &cost = d.cost;
    if (c.has("cost.W_R"))
    {
      cost.W_R = diag(c.get_vec3("cost.W_R", Vec3::Zero()));
    }
    if (c.has("cost.W_p"))
    {
      cost.W_p = diag(c.get_vec3("cost.W_p", Vec3::Zero()));
    }
    if (c.has("cost.W_F"))
    {
      cost.W_F = diag(c.get_vec3("cost.W_F", Vec3::Zero()));
    }
    if (c.has("cost.W_v"))
    {
      cost.W_v = diag(c.get_vec3("cost.W_v", Vec3::Zero()));
    }
    cost.input_weight = c.get_double("cost.input_weight", cost.input_weight);
    cost.terminal_only = c.get_bool("cost.terminal_only", cost.terminal_only);
    cost.p_d = c.get_vec3("cost.p_d", cost.p_d);
    if (c.has("cost.R_d"))
    {
      cost.R_d = Rotation::exp(c.get_vec3("cost.R_d", Vec3::Zero()));
    }

    ChainConfig &ch = r.chain;
    ch.N = d.N;
    ch.dt = d.dt;
    ch.cost = cost;
    ch.cost.R_d = Rotation();
    ch.cost.p_d = Vec3::Zero();
    r.chain_links = c.get_int("chain.links", r.chain_links);
    r.robot_path = c.get_string("chain.robot", r.robot_path);
    auto vec_of = [&](const std::string &key, const Eigen::VectorXd &fallback)
    {
      if (!c.has(key))
      {
        return fallback;
      }
      const std::vector<double> v = c.get_list(key, {});
      return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    };
    ch.q_init = vec_of("chain.q_init", ch.q_init);
    ch.q_goal = vec_of("chain.q_goal", ch.q_goal);
    ch.torque_weight = c.get_double("chain.torque_weight", ch.torque_weight);
    ch.warm_start = c.get_bool("chain.warm_start", ch.warm_start);

    if (c.has("bench.depths"))
    {
      r.bench_depths.clear();
      for (double v : c.get_list("bench.depths", {}))
      {
        r.bench_depths.push_back(static_cast<int>(v));
      }
    }
    r.bench_evaluations = c.get_int("bench.evaluations", r.bench_evaluations);
    r.bench_N = c.get_int("bench.N", r.bench_N);

    r.sim_steps = c.get_int("simulate.steps", r.sim_steps);
    r.sim_dt = c.get_double("simulate.dt", r.sim_dt);
    r.sim_omega = c.get_vec3("simulate.omega", r.sim_omega);
    r.sim_tol = c.get_double("simulate.tol", r.sim_tol);

    r.check_trials = c.get_int("check.trials", r.check_trials);
    r.check_seed = static_cast<std::uint64_t>(c.get_int("check.seed", static_cast<int>(r.check_seed)));
    r.check_fault = c.get_bool("check.fault", r.check_fault);
    if (c.has("check.families"))
    {
      r.check_families = split_list(*c.raw("check.families"));
    }
    return r;
  }

} // namespace lgtraj
