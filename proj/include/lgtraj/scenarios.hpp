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

#ifndef LGTRAJ_SCENARIOS_HPP
#define LGTRAJ_SCENARIOS_HPP

#include "lgtraj/constraints.hpp"
#include "lgtraj/costs.hpp"
#include "lgtraj/nlp.hpp"
#include "lgtraj/ripm.hpp"
#include "lgtraj/rigid_body.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace lgtraj
{
  struct BodySlots
  {
    int R = -1, p = -1, F = -1, v = -1;
  };

  /// Slot ids of a multi-body trajectory: knots k = 0..N for every body, then
  /// `input_groups` input slots per step k = 0..N-1.
  struct TrajectoryLayout
  {
    VariableLayout layout;
    std::vector<std::vector<BodySlots>> bodies; ///< [k][b]
    std::vector<std::vector<int>> inputs;       ///< [k][group]
    int N = 0;

    static TrajectoryLayout build(int N, int num_bodies, const std::vector<int> &input_dims);
  };

  /// States [k][b] and inputs [k][group] written into a Point.
  Point make_point(const TrajectoryLayout &tl, const std::vector<std::vector<BodyState>> &states,
                   const std::vector<std::vector<Eigen::VectorXd>> &inputs);

  std::vector<std::vector<BodyState>> extract_states(const TrajectoryLayout &tl, const Point &x);

  /// Owner of a constraint row, used by the sparsity-envelope predicate: the
  /// row may touch timesteps [timestep, timestep + 1] of entities within one
  /// link of `entity` (entity = body index; joint inputs belong to their child).
  struct RowOwner
  {
    int timestep = 0;
    int entity = 0;
  };

  struct Scenario
  {
    NLPProblem problem{VariableLayout{}};
    TrajectoryLayout slots;
    Point initial;
    std::vector<RowOwner> eq_owner;
    std::vector<RowOwner> ineq_owner;
    std::vector<std::vector<int>> dynamics_rows; ///< [k] equality rows of step k's dynamics
    std::vector<std::string> warnings;
  };

  /// Entity of every tangent coordinate (body index, or child body of an input group).
  std::vector<int> tangent_entities(const Scenario &sc);
  std::vector<int> tangent_timesteps(const Scenario &sc);

  /// Number of assembled KKT nonzeros (Hessian, A_E, A_I) outside the block
  /// envelope declared by the scenario's row owners.
  int envelope_leakage(const Scenario &sc, const KKTSystem &sys);

  // ---------------------------------------------------------------------------
  // Drone
  // ---------------------------------------------------------------------------

  struct Cylinder
  {
    Eigen::Vector2d center = Eigen::Vector2d::Zero();
    double radius = 0.5;
  };

  enum class DroneVariant
  {
    Unconstrained,
    Constrained, ///< input box limits
    Cluttered    ///< input box limits and cylinders
  };

  std::string to_string(DroneVariant v);
  DroneVariant parse_drone_variant(const std::string &name);

  struct DroneConfig
  {
    DroneVariant variant = DroneVariant::Unconstrained;
    std::uint64_t seed = 0;
    int N = 40;
    double dt = 0.05;
    double mass = 4.34;
    Mat3 inertia = Eigen::Vector3d(0.0820, 0.0845, 0.1377).asDiagonal();
    Vec3 gravity = Vec3(0.0, 0.0, -9.81);
    double tau_lim = 1.0;
    double u_z_lim = -1.0; ///< <= 0 selects 4 m |g|
    Vec3 box_lo = Vec3::Constant(-2.0);
    Vec3 box_hi = Vec3::Constant(2.0);
    double angle_min = 0.0;
    double angle_max = 3.14159265358979323846;
    std::vector<Cylinder> obstacles;
    CostSpec cost;
    /// Overrides the sampled initial pose when set.
    std::optional<BodyState> initial;

    /// Validates N >= 2, dt > 0 and finite geometry; throws std::invalid_argument.
    void validate() const;
    double thrust_limit() const;
    BodyParams body() const;
  };

  /// Initial pose drawn from the seed: position uniform in the box, rotation
  /// axis uniform on the sphere, angle uniform in [angle_min, angle_max].
  BodyState sample_initial_pose(const DroneConfig &config);

  /// R_k = R_init exp((k/N) log(R_init^T R_goal)), linear positions, F and v
  /// from consecutive knots (the last knot repeats the previous step).
  std::vector<BodyState> geodesic_init(const BodyState &x_init, const BodyState &x_goal, int N, double dt);

  /// Docking to the identity pose at the origin with zero twist.
  Scenario drone_docking(const DroneConfig &config);

  // ---------------------------------------------------------------------------
  // Kinematic chains and the manipulator
  // ---------------------------------------------------------------------------

  struct JointSpec
  {
    int parent = -1; ///< -1 for the ground
    int child = 0;
    Vec3 r_parent = Vec3::Zero(); ///< joint point in the parent frame (ground frame for -1)
    Vec3 r_child = Vec3::Zero();  ///< joint point in the child frame
    Vec3 axis = Vec3::UnitZ();    ///< joint axis, identical in both frames at q = 0
    bool axis_constraint = true;
  };

  struct ChainModel
  {
    std::vector<BodyParams> links;
    std::vector<JointSpec> joints; ///< joint j drives link j

    /// Serial chain of uniform rods along body z, axes alternating z and y.
    static ChainModel uniform_rods(int links, double mass = 1.0, double length = 0.3, double radius = 0.05,
                                   const Vec3 &gravity = Vec3(0.0, 0.0, -9.81));

    /// Reads one line per link:
    ///   link mass Ixx Iyy Izz Ixy Ixz Iyz rpx rpy rpz rcx rcy rcz ax ay az
    /// Blank lines and lines starting with '#' are ignored. Throws
    /// std::runtime_error naming the line on malformed input.
    static ChainModel parse(std::istream &in, const Vec3 &gravity = Vec3(0.0, 0.0, -9.81));
    static ChainModel load(const std::string &path, const Vec3 &gravity = Vec3(0.0, 0.0, -9.81));

    int size() const { return static_cast<int>(links.size()); }
  };

  /// Link poses for joint angles q (rotation about each joint axis).
  std::vector<BodyState> forward_kinematics(const ChainModel &model, const Eigen::VectorXd &q);

  struct ChainConfig
  {
    int N = 40;
    double dt = 0.05;
    Eigen::VectorXd q_init;
    Eigen::VectorXd q_goal;
    std::vector<Cylinder> obstacles;
    double torque_weight = 1e-4;
    CostSpec cost;
    bool warm_start = true;
  };

  /// Multi-body trajectory problem in maximal coordinates. Each step carries
  /// one input group per joint: [torque, pivot multipliers (3), axis
  /// multipliers (2)]. Joint rows are imposed at k = 1..N and obstacle rows
  /// for every link at k = 1..N.
  Scenario chain_problem(const ChainModel &model, const ChainConfig &config);

  /// 7-link manipulator moving between joint configurations around a cylinder.
  Scenario manipulator(const ChainModel &model, const ChainConfig &config);
  ChainConfig default_manipulator_config(int links = 7);

  /// Per step, least-squares torques and multipliers minimizing the dynamics
  /// residual of the current states in `sc.initial`. Falls back to torques
  /// only (zero multipliers) on a rank-deficient step and records a warning.
  void inverse_dynamics_warm_start(Scenario &sc, const ChainModel &model);

  struct ChainTiming
  {
    int depth = 0;
    double t_residual = 0.0;
    double t_gradient = 0.0;
    double t_hessian = 0.0;
    long jacobian_nonzeros = 0;
  };

  /// Mean wall time of evaluating every block of a depth-link chain at each
  /// derivative order, averaged over `evaluations` sweeps.
  std::vector<ChainTiming> chain_benchmark(const std::vector<int> &depths, int evaluations = 100, int N = 2);

  /// Median wall time (seconds) of assembling and solving one KKT system of
  /// the unconstrained docking problem with horizon N.
  double kkt_factorization_time(int N, int repeats = 7);

  // ---------------------------------------------------------------------------
  // Sweeps
  // ---------------------------------------------------------------------------

  struct SeedResult
  {
    std::uint64_t seed = 0;
    SolverStatus status = SolverStatus::MaxIterations;
    int iterations = 0;
    double final_E0 = 0.0;
    double final_cost = 0.0;
    double t_per_iter_solver = 0.0;
    double t_per_iter_total = 0.0;
    std::vector<double> E0_history;
    bool invariants_ok = true;
  };

  struct SweepSummary
  {
    std::vector<SeedResult> runs;
    double converged_fraction = 0.0;
    double median_iterations = 0.0; ///< over converged runs
    double mean_iterations = 0.0;   ///< over converged runs
    double mean_time_per_iter = 0.0;
  };

  /// True when the last three E_0 values satisfy E_{k+1} <= E_k^rate.
  bool superlinear_tail(const std::vector<double> &E0, double rate = 1.3);

  /// Whether the trace satisfies the interior-point invariants and the mu floor.
  bool interior_point_invariants(const SolveResult &result, double eps_tol);

  /// Solves drone docking for every seed with `workers` threads.
  SweepSummary convergence_sweep(const DroneConfig &base, const std::vector<std::uint64_t> &seeds,
                                 const SolverOptions &options, int workers = 1);

  SweepSummary summarize(std::vector<SeedResult> runs);

} // namespace lgtraj

#endif // LGTRAJ_SCENARIOS_HPP
