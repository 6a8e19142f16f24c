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

#include "lgtraj/scenarios.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <set>
#include <sstream>

using namespace lgtraj;
using namespace lgtraj::testing;

namespace
{
  Eigen::VectorXd family_residuals(const Scenario &sc, const Point &x, const std::set<std::string> &families)
  {
    std::vector<double> values;
    for (const auto &pb : sc.problem.equalities())
    {
      if (families.count(pb.block->family()))
      {
        const Eigen::VectorXd v = pb.block->value(x);
        values.insert(values.end(), v.data(), v.data() + v.size());
      }
    }
    return Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  }

  BodyState rest_at_goal() { return BodyState{}; }
} // namespace

TEST(DroneDocking, TargetStartIsStationary)
{
  DroneConfig cfg;
  cfg.initial = rest_at_goal();
  const Scenario sc = drone_docking(cfg);
  const int l = sc.problem.num_equalities();
  const ErrorMetrics e =
      error_metrics(sc.problem, sc.initial, Eigen::VectorXd::Zero(l), Eigen::VectorXd(), Eigen::VectorXd(), 0.0);
  EXPECT_LE(e.E_0, 1e-9);
}

TEST(DroneDocking, VariantRowCounts)
{
  DroneConfig cfg;
  cfg.N = 10;
  const Scenario free = drone_docking(cfg);
  EXPECT_EQ(free.problem.num_inequalities(), 0);
  EXPECT_EQ(free.problem.num_variables(), 11 * 12 + 10 * 4);
  // Initial pose (6) plus kinematics and dynamics (12) per step.
  EXPECT_EQ(free.problem.num_equalities(), 6 + 10 * 12);

  cfg.variant = DroneVariant::Constrained;
  EXPECT_EQ(drone_docking(cfg).problem.num_inequalities(), 10 * 8);

  cfg.variant = DroneVariant::Cluttered;
  cfg.obstacles = {Cylinder{Eigen::Vector2d(1.0, 0.0), 0.2}, Cylinder{Eigen::Vector2d(0.0, 1.0), 0.2},
                   Cylinder{Eigen::Vector2d(-1.0, 0.0), 0.2}};
  EXPECT_EQ(drone_docking(cfg).problem.num_inequalities(), 10 * 8 + 10 * 3);
}

TEST(DroneDocking, SeededInstanceViolatesOnlyDynamics)
{
  DroneConfig cfg;
  cfg.seed = 7;
  const Scenario sc = drone_docking(cfg);
  const Evaluation ev = evaluate(sc.problem, sc.initial);
  EXPECT_TRUE(ev.h.allFinite());
  EXPECT_GT(ev.h.lpNorm<Eigen::Infinity>(), 1e-6);
  EXPECT_LE(family_residuals(sc, sc.initial, {"rot_kinematics", "trans_kinematics", "initial_rotation",
                                              "initial_vector"})
                .lpNorm<Eigen::Infinity>(),
            1e-12);
}

TEST(DroneDocking, DeterministicPerSeed)
{
  DroneConfig cfg;
  cfg.variant = DroneVariant::Constrained;
  cfg.seed = 11;
  const Scenario a = drone_docking(cfg), b = drone_docking(cfg);
  cfg.seed = 12;
  const Scenario c = drone_docking(cfg);
  const Evaluation ea = evaluate(a.problem, a.initial), eb = evaluate(b.problem, b.initial),
                   ec = evaluate(c.problem, c.initial);
  EXPECT_EQ(ea.f, eb.f);
  EXPECT_EQ(ea.h, eb.h);
  EXPECT_EQ(ea.g, eb.g);
  EXPECT_EQ(ea.grad_f, eb.grad_f);
  EXPECT_NE(ea.h, ec.h);
}

TEST(DroneDocking, InvalidConfigRejected)
{
  DroneConfig cfg;
  cfg.N = 1;
  EXPECT_THROW(drone_docking(cfg), std::invalid_argument);
  cfg = DroneConfig{};
  cfg.dt = 0.0;
  EXPECT_THROW(drone_docking(cfg), std::invalid_argument);
  cfg = DroneConfig{};
  cfg.box_lo[0] = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(drone_docking(cfg), std::invalid_argument);
}

TEST(DroneConfig, DefaultLimitsKeepHoverInterior)
{
  const DroneConfig cfg;
  EXPECT_NEAR(cfg.thrust_limit(), 4.0 * cfg.mass * 9.81, 1e-12);
  EXPECT_GT(cfg.thrust_limit(), cfg.mass * 9.81);
  EXPECT_EQ(cfg.tau_lim, 1.0);
  EXPECT_EQ(parse_drone_variant("cluttered"), DroneVariant::Cluttered);
  EXPECT_EQ(parse_drone_variant(to_string(DroneVariant::Constrained)), DroneVariant::Constrained);
  EXPECT_THROW(parse_drone_variant("flying"), std::invalid_argument);
}

TEST(SampleInitialPose, WithinBoxAndAngleInterval)
{
  DroneConfig cfg;
  cfg.angle_min = 0.5;
  cfg.angle_max = 2.0;
  for (std::uint64_t seed = 0; seed < 200; ++seed)
  {
    cfg.seed = seed;
    const BodyState s = sample_initial_pose(cfg);
    EXPECT_TRUE((s.p.array() >= -2.0).all() && (s.p.array() <= 2.0).all());
    const double angle = s.R.log().norm();
    EXPECT_GE(angle, 0.5 - 1e-12);
    EXPECT_LE(angle, 2.0 + 1e-12);
  }
}

TEST(GeodesicInit, ConstantWhenEndpointsAgree)
{
  std::mt19937_64 rng(61);
  BodyState x;
  x.R = random_rotation(rng);
  x.p = random_vec(rng);
  const auto traj = geodesic_init(x, x, 10, 0.05);
  ASSERT_EQ(traj.size(), 11u);
  for (const BodyState &s : traj)
  {
    EXPECT_LE((s.R.matrix() - x.R.matrix()).norm(), 1e-14);
    EXPECT_LE((s.p - x.p).norm(), 1e-15);
    EXPECT_LE(s.F.log().norm(), 1e-14);
    EXPECT_LE(s.v.norm(), 1e-13);
  }
}

TEST(GeodesicInit, MidpointAndExactKinematics)
{
  std::mt19937_64 rng(62);
  BodyState a, b;
  b.R = random_rotation(rng);
  b.p = random_vec(rng);
  const int N = 20;
  const double dt = 0.05;
  const auto traj = geodesic_init(a, b, N, dt);
  EXPECT_LE((traj[N / 2].R.matrix() - exp_so3(0.5 * b.R.log()).matrix()).norm(), 1e-13);
  EXPECT_LE((traj[N].R.matrix() - b.R.matrix()).norm(), 1e-14);
  EXPECT_LE((traj[N].p - b.p).norm(), 1e-14);
  for (int k = 0; k < N; ++k)
  {
    EXPECT_LE(((traj[k].R * traj[k].F).matrix() - traj[k + 1].R.matrix()).norm(), 1e-13);
    EXPECT_LE((traj[k].p + dt * traj[k].v - traj[k + 1].p).norm(), 1e-13);
  }
}

TEST(ChainModel, UniformRodsAndParse)
{
  const ChainModel rods = ChainModel::uniform_rods(7);
  EXPECT_EQ(rods.size(), 7);
  EXPECT_EQ(rods.joints.size(), 7u);
  EXPECT_EQ(rods.joints[0].parent, -1);
  EXPECT_EQ(rods.joints[3].parent, 2);

  std::istringstream in("# link mass I r_parent r_child axis\n"
                        "\n"
                        "0 2.0 0.1 0.1 0.02 0 0 0  0 0 0  0 0 -0.15  0 0 1\n"
                        "1 1.5 0.05 0.05 0.01 0 0 0  0 0 0.15  0 0 -0.1  0 1 0\n");
  const ChainModel m = ChainModel::parse(in);
  ASSERT_EQ(m.size(), 2);
  EXPECT_EQ(m.links[0].mass, 2.0);
  EXPECT_EQ(m.joints[1].parent, 0);
  EXPECT_EQ(m.joints[1].axis, Vec3::UnitY());
  EXPECT_EQ(m.joints[1].r_parent, Vec3(0, 0, 0.15));

  std::istringstream bad("0 2.0 0.1 0.1\n");
  try
  {
    ChainModel::parse(bad);
    FAIL() << "malformed line accepted";
  }
  catch (const std::runtime_error &e)
  {
    EXPECT_NE(std::string(e.what()).find("line 1"), std::string::npos) << e.what();
  }
  EXPECT_THROW(ChainModel::load("/nonexistent/robot.txt"), std::runtime_error);
}

TEST(ChainModel, ForwardKinematicsSatisfiesJoints)
{
  std::mt19937_64 rng(63);
  const ChainModel m = ChainModel::uniform_rods(5);
  const Eigen::VectorXd q = Eigen::VectorXd::Random(5) * 2.0;
  const auto poses = forward_kinematics(m, q);
  for (const JointSpec &js : m.joints)
  {
    const Rotation Ra = js.parent < 0 ? Rotation() : poses[js.parent].R;
    const Vec3 pa = js.parent < 0 ? Vec3::Zero() : poses[js.parent].p;
    EXPECT_LE(pivot_residual(Ra, pa, poses[js.child].R, poses[js.child].p, js.r_parent, js.r_child).norm(), 1e-14);
    EXPECT_LE(((Ra * js.axis) - (poses[js.child].R * js.axis)).norm(), 1e-14);
  }
  EXPECT_THROW(forward_kinematics(m, Eigen::VectorXd::Zero(4)), std::invalid_argument);
}

TEST(Manipulator, VariableCountMatchesLayout)
{
  const ChainModel m = ChainModel::uniform_rods(7);
  ChainConfig cfg = default_manipulator_config();
  cfg.warm_start = false;
  const Scenario sc = manipulator(m, cfg);
  EXPECT_EQ(sc.problem.num_variables(), (40 + 1) * 7 * 12 + 40 * (7 * 6));
  // One obstacle row per link per knot k = 1..N.
  EXPECT_EQ(sc.problem.num_inequalities(), 40 * 7);
  int pivot_rows = 0, axis_rows = 0;
  for (const auto &pb : sc.problem.equalities())
  {
    pivot_rows += pb.block->family() == "pivot" ? pb.block->dim() : 0;
    axis_rows += pb.block->family() == "axis" ? pb.block->dim() : 0;
  }
  EXPECT_EQ(pivot_rows, 40 * 7 * 3);
  EXPECT_EQ(axis_rows, 40 * 7 * 2);
}

TEST(Manipulator, JointBlocksTouchTwoBodies)
{
  const ChainModel m = ChainModel::uniform_rods(4);
  ChainConfig cfg = default_manipulator_config(4);
  cfg.N = 6;
  const Scenario sc = manipulator(m, cfg);
  const VariableLayout &layout = sc.slots.layout;
  for (const auto &pb : sc.problem.equalities())
  {
    const std::string &f = pb.block->family();
    if (f != "pivot" && f != "axis")
    {
      continue;
    }
    std::set<int> bodies;
    std::set<int> steps;
    for (int slot : pb.block->slots())
    {
      if (slot >= 0)
      {
        bodies.insert(layout.slot(slot).body);
        steps.insert(layout.slot(slot).timestep);
      }
    }
    EXPECT_GE(bodies.size(), 1u);
    EXPECT_LE(bodies.size(), 2u);
    EXPECT_EQ(steps.size(), 1u);
    if (bodies.size() == 2)
    {
      EXPECT_EQ(*bodies.rbegin() - *bodies.begin(), 1);
    }
  }
}

TEST(Manipulator, RestingChainWithoutGravityNeedsNoTorque)
{
  const ChainModel m = ChainModel::uniform_rods(7, 1.0, 0.3, 0.05, Vec3::Zero());
  ChainConfig cfg;
  cfg.N = 8;
  cfg.q_init = Eigen::VectorXd::Zero(7);
  cfg.q_goal = Eigen::VectorXd::Zero(7);
  cfg.warm_start = true;
  const Scenario sc = manipulator(m, cfg);
  for (const auto &step : sc.slots.inputs)
  {
    for (int slot : step)
    {
      EXPECT_LE(sc.initial.vec[slot].norm(), 1e-12);
    }
  }
  EXPECT_LE(evaluate(sc.problem, sc.initial).h.lpNorm<Eigen::Infinity>(), 1e-12);
}

TEST(Manipulator, WarmStartReducesDynamicsResidual)
{
  const ChainModel m = ChainModel::uniform_rods(7);
  ChainConfig cfg = default_manipulator_config();
  cfg.N = 10;
  cfg.warm_start = false;
  Scenario cold = manipulator(m, cfg);
  auto dyn_norm = [](const Scenario &sc)
  {
    const Eigen::VectorXd h = evaluate(sc.problem, sc.initial).h;
    double out = 0.0;
    for (const auto &rows : sc.dynamics_rows)
    {
      for (int r : rows)
      {
        out = std::max(out, std::abs(h[r]));
      }
    }
    return out;
  };
  const double before = dyn_norm(cold);
  inverse_dynamics_warm_start(cold, m);
  const double after = dyn_norm(cold);
  EXPECT_LT(after, 0.5 * before);
}

TEST(Envelope, ThreeBodyChainHasNoLeakageAndDetectsCoupling)
{
  ChainConfig cfg;
  cfg.N = 5;
  cfg.q_init = Eigen::Vector3d(0.1, 0.2, -0.1);
  cfg.q_goal = Eigen::Vector3d(0.4, -0.3, 0.2);
  cfg.obstacles = {Cylinder{Eigen::Vector2d(0.4, 0.4), 0.1}};
  const Scenario sc = chain_problem(ChainModel::uniform_rods(3), cfg);
  const int l = sc.problem.num_equalities(), m = sc.problem.num_inequalities();
  KKTSystem sys = assemble(sc.problem, sc.initial, Eigen::VectorXd::Ones(l), Eigen::VectorXd::Ones(m),
                           Eigen::VectorXd::Ones(m), 0.1);
  EXPECT_EQ(envelope_leakage(sc, sys), 0);

  // Couple body 0 at k = 0 with body 2 at k = N.
  const int a = sc.slots.layout.slot(sc.slots.bodies[0][0].p).tangent_offset;
  const int b = sc.slots.layout.slot(sc.slots.bodies[5][2].p).tangent_offset;
  sys.hessian.coeffRef(a, b) = 1.0;
  sys.hessian.coeffRef(b, a) = 1.0;
  EXPECT_EQ(envelope_leakage(sc, sys), 2);
}

TEST(ChainBenchmark, PositiveTimingsAndLinearNonzeros)
{
  const auto recs = chain_benchmark({1, 8, 16}, 3);
  ASSERT_EQ(recs.size(), 3u);
  EXPECT_GT(recs[0].t_residual, 0.0);
  EXPECT_GT(recs[0].t_gradient, 0.0);
  EXPECT_GT(recs[0].t_hessian, 0.0);
  const double ratio = static_cast<double>(recs[2].jacobian_nonzeros) / recs[1].jacobian_nonzeros;
  EXPECT_GT(ratio, 1.8);
  EXPECT_LT(ratio, 2.2);
  EXPECT_THROW(chain_benchmark({0}), std::invalid_argument);
}

TEST(KktFactorizationTime, Positive) { EXPECT_GT(kkt_factorization_time(10, 3), 0.0); }

TEST(SuperlinearTail, Examples)
{
  EXPECT_TRUE(superlinear_tail({1.0, 1e-2, 1e-4, 1e-9}));
  EXPECT_FALSE(superlinear_tail({1.0, 1e-2, 5e-3, 2.5e-3}));
  EXPECT_FALSE(superlinear_tail({1e-2, 1e-5}));
  // Only the last three values matter.
  EXPECT_TRUE(superlinear_tail({1.0, 2.0, 1e-2, 1e-3, 1e-5}));
}

TEST(Summarize, MediansRecomputableFromRecords)
{
  std::vector<SeedResult> runs(5);
  const int iters[5] = {9, 4, 30, 7, 12};
  const SolverStatus status[5] = {SolverStatus::Converged, SolverStatus::Converged, SolverStatus::MaxIterations,
                                  SolverStatus::Converged, SolverStatus::Converged};
  for (int i = 0; i < 5; ++i)
  {
    runs[i].seed = i;
    runs[i].iterations = iters[i];
    runs[i].status = status[i];
    runs[i].t_per_iter_total = 0.1 * (i + 1);
  }
  const SweepSummary s = summarize(runs);
  EXPECT_DOUBLE_EQ(s.converged_fraction, 0.8);
  EXPECT_DOUBLE_EQ(s.median_iterations, 8.0); // 4 7 9 12
  EXPECT_DOUBLE_EQ(s.mean_iterations, 8.0);
  EXPECT_DOUBLE_EQ(s.mean_time_per_iter, 0.3);
  EXPECT_EQ(summarize({}).converged_fraction, 0.0);
}

TEST(ConvergenceSweep, TrivialStartConvergesAtOnce)
{
  DroneConfig cfg;
  cfg.N = 10;
  cfg.initial = rest_at_goal();
  const SweepSummary s = convergence_sweep(cfg, {0}, SolverOptions{}, 1);
  ASSERT_EQ(s.runs.size(), 1u);
  EXPECT_EQ(s.runs[0].status, SolverStatus::Converged);
  EXPECT_LE(s.runs[0].iterations, 2);
  EXPECT_TRUE(s.runs[0].invariants_ok);
}

TEST(ConvergenceSweep, WorkerCountDoesNotChangeResults)
{
  DroneConfig cfg;
  cfg.N = 10;
  SolverOptions o;
  o.eps_tol = 1e-9;
  o.N_max = 100;
  const SweepSummary one = convergence_sweep(cfg, {1, 2, 3}, o, 1);
  const SweepSummary three = convergence_sweep(cfg, {1, 2, 3}, o, 3);
  for (int i = 0; i < 3; ++i)
  {
    EXPECT_EQ(one.runs[i].seed, three.runs[i].seed);
    EXPECT_EQ(one.runs[i].iterations, three.runs[i].iterations);
    EXPECT_EQ(one.runs[i].final_E0, three.runs[i].final_E0);
    EXPECT_EQ(one.runs[i].E0_history, three.runs[i].E0_history);
  }
}
