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

#include "lgtraj/check.hpp"
#include "lgtraj/config.hpp"
#include "lgtraj/errors.hpp"
#include "lgtraj/records.hpp"
#include "lgtraj/rigid_body.hpp"
#include "lgtraj/ripm.hpp"
#include "lgtraj/scenarios.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace
{
  using namespace lgtraj;

  constexpr int kExitOk = 0;
  constexpr int kExitFailure = 1;
  constexpr int kExitUsage = 2;

  struct Flags
  {
    std::string config_path;
    std::vector<std::uint64_t> seeds;
    int num_seeds = 0;
    std::string tol;
    std::string out_dir;
    int workers = 0;
    bool fault = false;
    std::string families;
    bool families_set = false;
    std::string variant;
    std::string scenario;
  };

  std::ofstream open_output(const std::filesystem::path &path)
  {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path);
    if (!out)
    {
      throw std::runtime_error("cannot write '" + path.string() + "'");
    }
    return out;
  }

  RunConfig resolve(const std::string &command, const Flags &f)
  {
    RunConfig rc;
    rc.command = command;
    Config cfg;
    if (!f.config_path.empty())
    {
      cfg = Config::load(f.config_path);
    }
    rc = run_config_from(cfg, rc);
    if (!f.scenario.empty())
    {
      rc.scenario = f.scenario;
    }
    if (!f.variant.empty())
    {
      try
      {
        rc.drone.variant = parse_drone_variant(f.variant);
      }
      catch (const std::invalid_argument &e)
      {
        throw ConfigError(e.what());
      }
    }
    if (!f.tol.empty())
    {
      rc.preset = f.tol;
      rc.solver.eps_tol = tolerance_preset(f.tol);
    }
    if (!f.seeds.empty())
    {
      rc.seeds = f.seeds;
    }
    if (f.num_seeds > 0)
    {
      rc.seeds.clear();
      for (int i = 0; i < f.num_seeds; ++i)
      {
        rc.seeds.push_back(static_cast<std::uint64_t>(i));
      }
    }
    if (!f.out_dir.empty())
    {
      rc.out_dir = f.out_dir;
    }
    if (f.workers > 0)
    {
      rc.workers = f.workers;
    }
    if (f.fault)
    {
      rc.check_fault = true;
    }
    if (f.families_set)
    {
      std::string t = f.families;
      std::replace(t.begin(), t.end(), ',', ' ');
      std::istringstream ss(t);
      std::vector<std::string> list;
      std::string item;
      while (ss >> item)
      {
        list.push_back(item);
      }
      rc.check_families = list;
    }
    rc.validate();
    return rc;
  }

  int cmd_check(const RunConfig &rc)
  {
    CheckOptions opt;
    opt.states = rc.check_trials;
    opt.seed = rc.check_seed;
    opt.inject_fault = rc.check_fault;
    opt.families = rc.check_families;
    const std::vector<FamilyReport> reports = run_derivative_check(opt);
    std::printf("%-18s %8s %24s %24s %s\n", "family", "states", "gradient_error", "hessian_error", "result");
    bool ok = true;
    for (const FamilyReport &r : reports)
    {
      std::printf("%-18s %8d %24s %24s %s\n", r.family.c_str(), r.states, format_double(r.gradient_error).c_str(),
                  format_double(r.hessian_error).c_str(), r.pass ? "pass" : "FAIL");
      ok = ok && r.pass;
    }
    std::printf("%s: %zu families, thresholds gradient %s hessian %s\n", ok ? "pass" : "FAIL", reports.size(),
                format_double(opt.gradient_threshold).c_str(), format_double(opt.hessian_threshold).c_str());
    return ok ? kExitOk : kExitFailure;
  }

  int cmd_simulate(const RunConfig &rc)
  {
    const DroneConfig &d = rc.drone;
    const BodyParams body = BodyParams::make(d.mass, d.inertia, Vec3::Zero());
    BodyState x0 = d.initial.value_or(BodyState{});
    x0.F = Rotation::exp(rc.sim_dt * rc.sim_omega);
    const std::vector<ControlInput> inputs(rc.sim_steps);
    const Trajectory traj = simulate(body, x0, inputs, rc.sim_dt, rc.sim_steps, rc.sim_tol);

    std::ofstream out = open_output(std::filesystem::path(rc.out_dir) / "simulate.txt");
    out << "k Lx Ly Lz orthonormality_defect\n";
    const Vec3 L0 = spatial_angular_momentum(traj.states.front().front(), body.nonstandard_inertia, rc.sim_dt);
    double drift = 0.0;
    double defect = 0.0;
    for (std::size_t k = 0; k + 1 < traj.states.size(); ++k)
    {
      const BodyState &s = traj.states[k].front();
      const Vec3 L = spatial_angular_momentum(s, body.nonstandard_inertia, rc.sim_dt);
      drift = std::max(drift, (L - L0).norm() / L0.norm());
      defect = std::max({defect, s.R.orthonormality_defect(), s.F.orthonormality_defect()});
      out << k << ' ' << format_double(L.x()) << ' ' << format_double(L.y()) << ' ' << format_double(L.z()) << ' '
          << format_double(s.R.orthonormality_defect()) << '\n';
    }
    std::printf("steps=%d dt=%s momentum_drift=%s max_defect=%s\n", rc.sim_steps, format_double(rc.sim_dt).c_str(),
                format_double(drift).c_str(), format_double(defect).c_str());
    return kExitOk;
  }

  Scenario build_scenario(const RunConfig &rc, std::uint64_t seed)
  {
    if (rc.scenario == "drone")
    {
      DroneConfig d = rc.drone;
      d.seed = seed;
      return drone_docking(d);
    }
    const ChainModel model =
        rc.robot_path.empty()
            ? ChainModel::uniform_rods(rc.scenario == "manipulator" ? 7 : rc.chain_links)
            : ChainModel::load(rc.robot_path);
    ChainConfig c = rc.scenario == "manipulator" ? default_manipulator_config(model.size()) : rc.chain;
    if (rc.scenario == "manipulator")
    {
      c.N = rc.chain.N;
      c.dt = rc.chain.dt;
      if (rc.chain.q_init.size() == model.size())
      {
        c.q_init = rc.chain.q_init;
      }
      if (rc.chain.q_goal.size() == model.size())
      {
        c.q_goal = rc.chain.q_goal;
      }
      if (!rc.chain.obstacles.empty())
      {
        c.obstacles = rc.chain.obstacles;
      }
      return manipulator(model, c);
    }
    if (c.q_init.size() == 0)
    {
      c.q_init = Eigen::VectorXd::Zero(model.size());
    }
    if (c.q_goal.size() == 0)
    {
      c.q_goal = Eigen::VectorXd::Constant(model.size(), 0.5);
    }
    return chain_problem(model, c);
  }

  int cmd_optimize(const RunConfig &rc)
  {
    bool all_converged = true;
    for (std::uint64_t seed : rc.seeds)
    {
      const Scenario sc = build_scenario(rc, seed);
      for (const std::string &w : sc.warnings)
      {
        std::fprintf(stderr, "warning: %s\n", w.c_str());
      }
      const SolveResult res = solve(sc.problem, sc.initial, rc.solver);
      const std::string stem = rc.scenario + "_seed" + std::to_string(seed);
      const std::filesystem::path dir(rc.out_dir);
      std::ofstream trace = open_output(dir / ("trace_" + stem + ".txt"));
      write_trace(trace, res.trace);
      const ResultRecord rec = ResultRecord::from(rc.scenario, seed, res);
      std::ofstream summary = open_output(dir / ("summary_" + stem + ".txt"));
      summary << rec.to_line() << '\n';
      std::printf("%s\n", rec.to_line().c_str());
      if (!res.message.empty() && res.status != SolverStatus::Converged)
      {
        std::fprintf(stderr, "seed %llu: %s\n", static_cast<unsigned long long>(seed), res.message.c_str());
      }
      all_converged = all_converged && res.status == SolverStatus::Converged;
    }
    return all_converged ? kExitOk : kExitFailure;
  }

  int cmd_sweep(const RunConfig &rc)
  {
    if (rc.scenario != "drone")
    {
      throw ConfigError("sweep supports the drone scenario only");
    }
    const SweepSummary s = convergence_sweep(rc.drone, rc.seeds, rc.solver, rc.workers);
    std::ofstream out = open_output(std::filesystem::path(rc.out_dir) / "sweep.csv");
    write_sweep_csv(out, s.runs);
    write_sweep_csv(std::cout, s.runs);
    std::fprintf(stderr, "converged %s, median iterations %s\n", format_double(s.converged_fraction).c_str(),
                 format_double(s.median_iterations).c_str());
    return kExitOk;
  }

  int cmd_bench(const RunConfig &rc)
  {
    const std::vector<ChainTiming> rows = chain_benchmark(rc.bench_depths, rc.bench_evaluations, rc.bench_N);
    std::ofstream out = open_output(std::filesystem::path(rc.out_dir) / "bench.csv");
    write_bench_csv(out, rows);
    write_bench_csv(std::cout, rows);
    return kExitOk;
  }
} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Trajectory optimization on matrix Lie groups"};
  app.require_subcommand(1);
  Flags flags;

  auto add_common = [&](CLI::App *sub)
  {
    sub->add_option("--config", flags.config_path, "Config file with dotted keys")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out_dir, "Output directory");
  };
  auto add_solver = [&](CLI::App *sub)
  {
    sub->add_option("--seed", flags.seeds, "Scenario seed (repeatable)");
    sub->add_option("--tol", flags.tol, "Tolerance preset")
        ->check(CLI::IsMember({"table", "figure", "ipopt-default"}));
    sub->add_option("--scenario", flags.scenario, "drone | chain | manipulator");
    sub->add_option("--variant", flags.variant, "Drone variant: unconstrained | constrained | cluttered");
  };

  CLI::App *check = app.add_subcommand("check", "Finite-difference check of every block family");
  add_common(check);
  check->add_flag("--fault", flags.fault, "Inject a Jacobian fault into every block");
  check->add_option("--families", flags.families, "Comma-separated family list (empty for none)")
      ->each([&](const std::string &) { flags.families_set = true; });

  CLI::App *sim = app.add_subcommand("simulate", "Torque-free rigid-body simulation");
  add_common(sim);

  CLI::App *opt = app.add_subcommand("optimize", "Solve one scenario per seed");
  add_common(opt);
  add_solver(opt);

  CLI::App *sweep = app.add_subcommand("sweep", "Docking convergence sweep over seeds");
  add_common(sweep);
  add_solver(sweep);
  sweep->add_option("--num-seeds", flags.num_seeds, "Use seeds 0..K-1")->check(CLI::PositiveNumber);
  sweep->add_option("--workers", flags.workers, "Parallel workers")->check(CLI::PositiveNumber);

  CLI::App *bench = app.add_subcommand("bench", "Chain derivative-evaluation benchmark");
  add_common(bench);

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  RunConfig rc;
  try
  {
    rc = resolve(command, flags);
  }
  catch (const std::exception &e)
  {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }

  try
  {
    if (command == "check")
    {
      return cmd_check(rc);
    }
    if (command == "simulate")
    {
      return cmd_simulate(rc);
    }
    if (command == "optimize")
    {
      return cmd_optimize(rc);
    }
    if (command == "sweep")
    {
      return cmd_sweep(rc);
    }
    return cmd_bench(rc);
  }
  catch (const ConfigError &e)
  {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  catch (const std::invalid_argument &e)
  {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  catch (const std::exception &e)
  {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
}
