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

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <mutex>
#include <random>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace lgtraj
{
  namespace
  {
    using Clock = std::chrono::steady_clock;

    double seconds_since(Clock::time_point t0)
    {
      return std::chrono::duration<double>(Clock::now() - t0).count();
    }

    std::vector<int> range(int first, int count)
    {
      std::vector<int> out(count);
      for (int i = 0; i < count; ++i)
      {
        out[i] = first + i;
      }
      return out;
    }

    std::vector<int> concat(std::initializer_list<std::vector<int>> parts)
    {
      std::vector<int> out;
      for (const auto &p : parts)
      {
        out.insert(out.end(), p.begin(), p.end());
      }
      return out;
    }

    int add_owned(Scenario &sc, BlockPtr block, RowOwner owner)
    {
      const BlockKind kind = block->kind();
      const int dim = block->dim();
      const int first = sc.problem.add_constraint(std::move(block));
      auto &owners = kind == BlockKind::Equality ? sc.eq_owner : sc.ineq_owner;
      owners.insert(owners.end(), dim, owner);
      return first;
    }

    /// Fills F_k = R_k^T R_{k+1} and v_k = (p_{k+1} - p_k) / dt; the last knot
    /// repeats the previous step.
    void derive_velocities(std::vector<std::vector<BodyState>> &states, double dt)
    {
      const int N = static_cast<int>(states.size()) - 1;
      for (int k = 0; k < N; ++k)
      {
        for (std::size_t b = 0; b < states[k].size(); ++b)
        {
          states[k][b].F = states[k][b].R.inverse() * states[k + 1][b].R;
          states[k][b].v = (states[k + 1][b].p - states[k][b].p) / dt;
        }
      }
      if (N >= 1)
      {
        for (std::size_t b = 0; b < states[N].size(); ++b)
        {
          states[N][b].F = states[N - 1][b].F;
          states[N][b].v = states[N - 1][b].v;
        }
      }
    }

    void add_body_costs(Scenario &sc, int k, int b, const CostSpec &cost, const Rotation &R_d, const Vec3 &p_d,
                        double dt)
    {
      const BodySlots &s = sc.slots.bodies[k][b];
      const VariableLayout &layout = sc.slots.layout;
      sc.problem.add_objective(std::make_shared<ChordalCostBlock>(layout, s.R, R_d, cost.W_R, "cost_R"));
      sc.problem.add_objective(std::make_shared<QuadCostBlock>(layout, s.p, p_d, cost.W_p, "cost_p"));
      // F ~ exp(dt omega): dividing by dt^2 makes W_F a weight on angular rate.
      sc.problem.add_objective(
          std::make_shared<ChordalCostBlock>(layout, s.F, cost.F_d, cost.W_F / (dt * dt), "cost_F"));
      sc.problem.add_objective(std::make_shared<QuadCostBlock>(layout, s.v, cost.v_d, cost.W_v, "cost_v"));
    }

    bool finite(const Vec3 &v) { return v.allFinite(); }
  } // namespace

  // ---------------------------------------------------------------------------

  TrajectoryLayout TrajectoryLayout::build(int N, int num_bodies, const std::vector<int> &input_dims)
  {
    if (N < 1 || num_bodies < 1)
    {
      throw std::invalid_argument("TrajectoryLayout: need N >= 1 and at least one body");
    }
    TrajectoryLayout tl;
    tl.N = N;
    tl.bodies.resize(N + 1);
    tl.inputs.resize(N);
    for (int k = 0; k <= N; ++k)
    {
      for (int b = 0; b < num_bodies; ++b)
      {
        BodySlots s;
        s.R = tl.layout.add_rotation(k, b);
        s.p = tl.layout.add_euclidean(3, k, b);
        s.F = tl.layout.add_rotation(k, b);
        s.v = tl.layout.add_euclidean(3, k, b);
        tl.bodies[k].push_back(s);
      }
      if (k < N)
      {
        for (int dim : input_dims)
        {
          tl.inputs[k].push_back(tl.layout.add_euclidean(dim, k, -1));
        }
      }
    }
    return tl;
  }

  Point make_point(const TrajectoryLayout &tl, const std::vector<std::vector<BodyState>> &states,
                   const std::vector<std::vector<Eigen::VectorXd>> &inputs)
  {
    Point x = Point::zeros(tl.layout);
    for (int k = 0; k <= tl.N; ++k)
    {
      for (std::size_t b = 0; b < tl.bodies[k].size(); ++b)
      {
        const BodySlots &s = tl.bodies[k][b];
        const BodyState &st = states.at(k).at(b);
        x.rot[s.R] = st.R;
        x.vec[s.p] = st.p;
        x.rot[s.F] = st.F;
        x.vec[s.v] = st.v;
      }
      if (k < tl.N)
      {
        for (std::size_t g = 0; g < tl.inputs[k].size(); ++g)
        {
          x.vec[tl.inputs[k][g]] = inputs.at(k).at(g);
        }
      }
    }
    return x;
  }

  std::vector<std::vector<BodyState>> extract_states(const TrajectoryLayout &tl, const Point &x)
  {
    std::vector<std::vector<BodyState>> out(tl.N + 1);
    for (int k = 0; k <= tl.N; ++k)
    {
      for (const BodySlots &s : tl.bodies[k])
      {
        BodyState st;
        st.R = x.rot[s.R];
        st.p = x.vec[s.p];
        st.F = x.rot[s.F];
        st.v = x.vec[s.v];
        out[k].push_back(st);
      }
    }
    return out;
  }

  std::vector<int> tangent_entities(const Scenario &sc)
  {
    const VariableLayout &layout = sc.slots.layout;
    std::vector<int> out(layout.tangent_dim(), 0);
    std::vector<int> group_of(layout.num_slots(), -1);
    for (const auto &step : sc.slots.inputs)
    {
      for (std::size_t g = 0; g < step.size(); ++g)
      {
        group_of[step[g]] = static_cast<int>(g);
      }
    }
    for (int i = 0; i < layout.num_slots(); ++i)
    {
      const Slot &s = layout.slot(i);
      const int entity = s.body >= 0 ? s.body : group_of[i];
      std::fill(out.begin() + s.tangent_offset, out.begin() + s.tangent_offset + s.dim, entity);
    }
    return out;
  }

  std::vector<int> tangent_timesteps(const Scenario &sc)
  {
    const VariableLayout &layout = sc.slots.layout;
    std::vector<int> out(layout.tangent_dim(), 0);
    for (int i = 0; i < layout.num_slots(); ++i)
    {
      const Slot &s = layout.slot(i);
      std::fill(out.begin() + s.tangent_offset, out.begin() + s.tangent_offset + s.dim, s.timestep);
    }
    return out;
  }

  int envelope_leakage(const Scenario &sc, const KKTSystem &sys)
  {
    const std::vector<int> ent = tangent_entities(sc);
    const std::vector<int> ts = tangent_timesteps(sc);
    int leaks = 0;
    const SparseMatrix &H = sys.hessian;
    for (int c = 0; c < H.outerSize(); ++c)
    {
      for (SparseMatrix::InnerIterator it(H, c); it; ++it)
      {
        const int r = static_cast<int>(it.row());
        if (std::abs(ts[r] - ts[c]) > 1 || std::abs(ent[r] - ent[c]) > 1)
        {
          ++leaks;
        }
      }
    }
    auto rows = [&](const SparseMatrix &A, const std::vector<RowOwner> &owners)
    {
      for (int c = 0; c < A.outerSize(); ++c)
      {
        for (SparseMatrix::InnerIterator it(A, c); it; ++it)
        {
          const RowOwner &o = owners.at(it.row());
          const int dt = ts[c] - o.timestep;
          if (dt < 0 || dt > 1 || std::abs(ent[c] - o.entity) > 1)
          {
            ++leaks;
          }
        }
      }
    };
    rows(sys.eval.A_E, sc.eq_owner);
    rows(sys.eval.A_I, sc.ineq_owner);
    return leaks;
  }

  // ---------------------------------------------------------------------------

  std::string to_string(DroneVariant v)
  {
    switch (v)
    {
    case DroneVariant::Unconstrained:
      return "unconstrained";
    case DroneVariant::Constrained:
      return "constrained";
    case DroneVariant::Cluttered:
      return "cluttered";
    }
    return "unknown";
  }

  DroneVariant parse_drone_variant(const std::string &name)
  {
    if (name == "unconstrained")
    {
      return DroneVariant::Unconstrained;
    }
    if (name == "constrained")
    {
      return DroneVariant::Constrained;
    }
    if (name == "cluttered")
    {
      return DroneVariant::Cluttered;
    }
    throw std::invalid_argument("unknown drone variant '" + name + "'");
  }

  void DroneConfig::validate() const
  {
    if (N < 2)
    {
      throw std::invalid_argument("DroneConfig: N must be at least 2");
    }
    if (!(dt > 0.0) || !std::isfinite(dt))
    {
      throw std::invalid_argument("DroneConfig: dt must be positive");
    }
    if (!finite(box_lo) || !finite(box_hi) || (box_hi - box_lo).minCoeff() < 0.0)
    {
      throw std::invalid_argument("DroneConfig: sampling box must be finite with lo <= hi");
    }
    if (!(angle_min >= 0.0 && angle_min <= angle_max && std::isfinite(angle_max)))
    {
      throw std::invalid_argument("DroneConfig: invalid rotation-angle interval");
    }
    if (!(tau_lim > 0.0) || !std::isfinite(tau_lim))
    {
      throw std::invalid_argument("DroneConfig: tau_lim must be positive");
    }
    for (const Cylinder &c : obstacles)
    {
      if (!(c.radius > 0.0) || !c.center.allFinite())
      {
        throw std::invalid_argument("DroneConfig: obstacles need a finite center and positive radius");
      }
    }
    if (initial && (!finite(initial->p) || !finite(initial->v)))
    {
      throw std::invalid_argument("DroneConfig: initial state must be finite");
    }
  }

  double DroneConfig::thrust_limit() const
  {
    return u_z_lim > 0.0 ? u_z_lim : 4.0 * mass * gravity.norm();
  }

  BodyParams DroneConfig::body() const { return BodyParams::make(mass, inertia, gravity); }

  BodyState sample_initial_pose(const DroneConfig &c)
  {
    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);
    BodyState s;
    for (int i = 0; i < 3; ++i)
    {
      s.p[i] = c.box_lo[i] + (c.box_hi[i] - c.box_lo[i]) * unit(rng);
    }
    Vec3 axis;
    do
    {
      axis = Vec3(normal(rng), normal(rng), normal(rng));
    } while (axis.norm() < 1e-12);
    const double angle = c.angle_min + (c.angle_max - c.angle_min) * unit(rng);
    s.R = Rotation::exp(angle * axis.normalized());
    return s;
  }

  std::vector<BodyState> geodesic_init(const BodyState &x_init, const BodyState &x_goal, int N, double dt)
  {
    if (N < 1 || !(dt > 0.0))
    {
      throw std::invalid_argument("geodesic_init: need N >= 1 and dt > 0");
    }
    const Vec3 phi = (x_init.R.inverse() * x_goal.R).log();
    std::vector<std::vector<BodyState>> states(N + 1, std::vector<BodyState>(1));
    for (int k = 0; k <= N; ++k)
    {
      const double t = static_cast<double>(k) / N;
      states[k][0].R = k == N ? x_goal.R : x_init.R * Rotation::exp(t * phi);
      states[k][0].p = x_init.p + t * (x_goal.p - x_init.p);
    }
    derive_velocities(states, dt);
    std::vector<BodyState> out;
    for (auto &s : states)
    {
      out.push_back(s[0]);
    }
    return out;
  }

  Scenario drone_docking(const DroneConfig &c)
  {
    c.validate();
    const BodyParams body = c.body();
    const BodyState x0 = c.initial ? *c.initial : sample_initial_pose(c);
    BodyState goal;
    goal.R = c.cost.R_d;
    goal.p = c.cost.p_d;
    goal.F = c.cost.F_d;
    goal.v = c.cost.v_d;

    Scenario sc;
    sc.slots = TrajectoryLayout::build(c.N, 1, {4});
    sc.problem = NLPProblem(sc.slots.layout);
    const VariableLayout &layout = sc.slots.layout;
    const auto &B = sc.slots.bodies;
    const double hover = body.mass * body.gravity.norm();

    add_owned(sc, std::make_shared<InitialRotationBlock>(layout, B[0][0].R, x0.R), {0, 0});
    add_owned(sc, std::make_shared<InitialVectorBlock>(layout, B[0][0].p, x0.p), {0, 0});

    Eigen::MatrixXd torque_map = Eigen::MatrixXd::Zero(3, 4);
    torque_map.leftCols<3>().setIdentity();
    sc.dynamics_rows.resize(c.N);
    for (int k = 0; k < c.N; ++k)
    {
      const BodySlots &s = B[k][0];
      const BodySlots &n = B[k + 1][0];
      const int u = sc.slots.inputs[k][0];
      const RowOwner owner{k, 0};
      add_owned(sc, std::make_shared<RotKinematicsBlock>(layout, s.R, s.F, n.R), owner);
      add_owned(sc, std::make_shared<TransKinematicsBlock>(layout, s.p, s.v, n.p, c.dt), owner);
      const int rd = add_owned(
          sc, std::make_shared<RotDynamicsBlock>(layout, s.F, n.F, u, torque_map, body.nonstandard_inertia, c.dt),
          owner);
      const int td =
          add_owned(sc, std::make_shared<TransDynamicsBlock>(layout, s.v, n.v, body.mass, body.gravity, c.dt), owner);
      sc.problem.add_constraint(std::make_shared<ThrustBlock>(layout, n.R, u, 3, c.dt), range(td, 3));
      sc.dynamics_rows[k] = concat({range(rd, 3), range(td, 3)});

      if (c.variant != DroneVariant::Unconstrained)
      {
        Eigen::VectorXd lo(4), hi(4);
        lo << -c.tau_lim, -c.tau_lim, -c.tau_lim, 0.0;
        hi << c.tau_lim, c.tau_lim, c.tau_lim, c.thrust_limit();
        add_owned(sc, std::make_shared<BoxBlock>(layout, u, lo, hi), owner);
      }
    }
    if (c.variant == DroneVariant::Cluttered)
    {
      std::vector<Cylinder> obstacles = c.obstacles;
      if (obstacles.empty())
      {
        obstacles = {Cylinder{Eigen::Vector2d(0.8, 0.8), 0.3}, Cylinder{Eigen::Vector2d(-0.8, -0.8), 0.3}};
      }
      for (int k = 1; k <= c.N; ++k)
      {
        for (const Cylinder &cyl : obstacles)
        {
          add_owned(sc, std::make_shared<ObstacleBlock>(layout, B[k][0].p, cyl.center, cyl.radius), {k, 0});
        }
      }
    }

    for (int k = 0; k <= c.N; ++k)
    {
      if (!c.cost.terminal_only || k == c.N)
      {
        add_body_costs(sc, k, 0, c.cost, c.cost.R_d, c.cost.p_d, c.dt);
      }
      if (k < c.N)
      {
        Eigen::Vector4d target(0.0, 0.0, 0.0, hover);
        sc.problem.add_objective(std::make_shared<QuadCostBlock>(
            layout, sc.slots.inputs[k][0], target, c.cost.input_weight * Eigen::MatrixXd::Identity(4, 4), "cost_u"));
      }
    }

    const std::vector<BodyState> traj = geodesic_init(x0, goal, c.N, c.dt);
    std::vector<std::vector<BodyState>> states;
    for (const BodyState &s : traj)
    {
      states.push_back({s});
    }
    std::vector<std::vector<Eigen::VectorXd>> inputs(c.N, {Eigen::Vector4d(0.0, 0.0, 0.0, hover)});
    sc.initial = make_point(sc.slots, states, inputs);
    return sc;
  }

  // ---------------------------------------------------------------------------

  ChainModel ChainModel::uniform_rods(int links, double mass, double length, double radius, const Vec3 &gravity)
  {
    if (links < 1)
    {
      throw std::invalid_argument("ChainModel: need at least one link");
    }
    const double I_perp = mass * (3.0 * radius * radius + length * length) / 12.0;
    const double I_axis = 0.5 * mass * radius * radius;
    const Mat3 inertia = Eigen::Vector3d(I_perp, I_perp, I_axis).asDiagonal();
    ChainModel m;
    for (int i = 0; i < links; ++i)
    {
      m.links.push_back(BodyParams::make(mass, inertia, gravity));
      JointSpec j;
      j.parent = i - 1;
      j.child = i;
      j.r_parent = i == 0 ? Vec3::Zero() : Vec3(0.0, 0.0, 0.5 * length);
      j.r_child = Vec3(0.0, 0.0, -0.5 * length);
      j.axis = i % 2 == 0 ? Vec3::UnitZ() : Vec3::UnitY();
      m.joints.push_back(j);
    }
    return m;
  }

  ChainModel ChainModel::parse(std::istream &in, const Vec3 &gravity)
  {
    ChainModel m;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line))
    {
      ++line_no;
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#')
      {
        continue;
      }
      std::istringstream ss(line);
      std::vector<double> v;
      double a;
      while (ss >> a)
      {
        v.push_back(a);
      }
      if (!ss.eof() || v.size() != 17)
      {
        throw std::runtime_error("robot file line " + std::to_string(line_no) +
                                 ": expected 17 numbers (link mass Ixx Iyy Izz Ixy Ixz Iyz r_parent r_child axis)");
      }
      const int link = static_cast<int>(v[0]);
      if (link != m.size() || v[0] != link)
      {
        throw std::runtime_error("robot file line " + std::to_string(line_no) + ": links must be numbered 0, 1, 2, ...");
      }
      Mat3 I;
      I << v[2], v[5], v[6], v[5], v[3], v[7], v[6], v[7], v[4];
      try
      {
        m.links.push_back(BodyParams::make(v[1], I, gravity));
      }
      catch (const std::invalid_argument &e)
      {
        throw std::runtime_error("robot file line " + std::to_string(line_no) + ": " + e.what());
      }
      JointSpec j;
      j.parent = link - 1;
      j.child = link;
      j.r_parent = Vec3(v[8], v[9], v[10]);
      j.r_child = Vec3(v[11], v[12], v[13]);
      const Vec3 axis(v[14], v[15], v[16]);
      if (!(axis.norm() > 0.0))
      {
        throw std::runtime_error("robot file line " + std::to_string(line_no) + ": joint axis must be nonzero");
      }
      j.axis = axis.normalized();
      m.joints.push_back(j);
    }
    if (m.links.empty())
    {
      throw std::runtime_error("robot file lists no links");
    }
    return m;
  }

  ChainModel ChainModel::load(const std::string &path, const Vec3 &gravity)
  {
    std::ifstream in(path);
    if (!in)
    {
      throw std::runtime_error("cannot open robot file '" + path + "'");
    }
    return parse(in, gravity);
  }

  std::vector<BodyState> forward_kinematics(const ChainModel &model, const Eigen::VectorXd &q)
  {
    if (q.size() != static_cast<int>(model.joints.size()))
    {
      throw std::invalid_argument("forward_kinematics: one angle per joint required");
    }
    std::vector<BodyState> out(model.links.size());
    for (std::size_t j = 0; j < model.joints.size(); ++j)
    {
      const JointSpec &js = model.joints[j];
      const Rotation Rp = js.parent < 0 ? Rotation() : out[js.parent].R;
      const Vec3 pp = js.parent < 0 ? Vec3::Zero() : out[js.parent].p;
      BodyState &c = out[js.child];
      c.R = Rp * Rotation::exp(q[j] * js.axis);
      c.p = pp + Rp * js.r_parent - c.R * js.r_child;
    }
    return out;
  }

  Scenario chain_problem(const ChainModel &model, const ChainConfig &c)
  {
    const int nb = model.size();
    const int nj = static_cast<int>(model.joints.size());
    if (c.N < 1 || !(c.dt > 0.0))
    {
      throw std::invalid_argument("chain_problem: need N >= 1 and dt > 0");
    }
    if (c.q_init.size() != nj || c.q_goal.size() != nj)
    {
      throw std::invalid_argument("chain_problem: q_init and q_goal need one entry per joint");
    }
    for (int j = 0; j < nj; ++j)
    {
      const JointSpec &js = model.joints[j];
      if (js.child != j || js.parent >= js.child || js.parent < -1)
      {
        throw std::invalid_argument("chain_problem: joint j must drive link j from an earlier link");
      }
    }

    std::vector<int> group_dims(nj);
    for (int j = 0; j < nj; ++j)
    {
      group_dims[j] = model.joints[j].axis_constraint ? 6 : 4;
    }

    Scenario sc;
    sc.slots = TrajectoryLayout::build(c.N, nb, group_dims);
    sc.problem = NLPProblem(sc.slots.layout);
    const VariableLayout &layout = sc.slots.layout;
    const auto &B = sc.slots.bodies;
    const double dt = c.dt;
    const GroundPose ground;

    const std::vector<BodyState> pose0 = forward_kinematics(model, c.q_init);
    const std::vector<BodyState> pose_goal = forward_kinematics(model, c.q_goal);

    for (int b = 0; b < nb; ++b)
    {
      add_owned(sc, std::make_shared<InitialRotationBlock>(layout, B[0][b].R, pose0[b].R), {0, b});
      add_owned(sc, std::make_shared<InitialVectorBlock>(layout, B[0][b].p, pose0[b].p), {0, b});
    }

    sc.dynamics_rows.resize(c.N);
    for (int k = 0; k < c.N; ++k)
    {
      std::vector<int> rd(nb), td(nb);
      for (int b = 0; b < nb; ++b)
      {
        const BodySlots &s = B[k][b];
        const BodySlots &n = B[k + 1][b];
        const BodyParams &bp = model.links[b];
        const RowOwner owner{k, b};
        add_owned(sc, std::make_shared<RotKinematicsBlock>(layout, s.R, s.F, n.R), owner);
        add_owned(sc, std::make_shared<TransKinematicsBlock>(layout, s.p, s.v, n.p, dt), owner);
        rd[b] = add_owned(sc,
                          std::make_shared<RotDynamicsBlock>(layout, s.F, n.F, -1, Eigen::MatrixXd(),
                                                             bp.nonstandard_inertia, dt),
                          owner);
        td[b] = add_owned(sc, std::make_shared<TransDynamicsBlock>(layout, s.v, n.v, bp.mass, bp.gravity, dt), owner);
        sc.dynamics_rows[k].insert(sc.dynamics_rows[k].end(), {rd[b], rd[b] + 1, rd[b] + 2});
        sc.dynamics_rows[k].insert(sc.dynamics_rows[k].end(), {td[b], td[b] + 1, td[b] + 2});
      }
      for (int j = 0; j < nj; ++j)
      {
        const JointSpec &js = model.joints[j];
        const int a = js.parent;
        const int b = js.child;
        const int u = sc.slots.inputs[k][j];
        const int Ra = a < 0 ? -1 : B[k + 1][a].R;
        const int Rb = B[k + 1][b].R;

        const std::vector<int> torque_rows = a < 0 ? range(rd[b], 3) : concat({range(rd[a], 3), range(rd[b], 3)});
        sc.problem.add_constraint(std::make_shared<JointTorqueBlock>(layout, u, 0, a >= 0, js.axis, js.axis, dt),
                                  torque_rows);

        const std::vector<int> wrench_rows =
            a < 0 ? concat({range(rd[b], 3), range(td[b], 3)})
                  : concat({range(rd[a], 3), range(td[a], 3), range(rd[b], 3), range(td[b], 3)});
        sc.problem.add_constraint(
            std::make_shared<PivotWrenchBlock>(layout, Ra, Rb, u, 1, js.r_parent, js.r_child, dt), wrench_rows);

        if (js.axis_constraint)
        {
          sc.problem.add_constraint(std::make_shared<AxisWrenchBlock>(layout, Ra, Rb, u, 4,
                                                                      AxisFrame::about(js.axis), dt, ground),
                                    torque_rows);
        }
      }
    }

    for (int k = 1; k <= c.N; ++k)
    {
      for (int j = 0; j < nj; ++j)
      {
        const JointSpec &js = model.joints[j];
        const int a = js.parent;
        const int b = js.child;
        const int Ra = a < 0 ? -1 : B[k][a].R;
        const int pa = a < 0 ? -1 : B[k][a].p;
        add_owned(sc,
                  std::make_shared<PivotBlock>(layout, Ra, pa, B[k][b].R, B[k][b].p, js.r_parent, js.r_child, ground),
                  {k, b});
        if (js.axis_constraint)
        {
          add_owned(sc, std::make_shared<AxisBlock>(layout, Ra, B[k][b].R, AxisFrame::about(js.axis), ground),
                    {k, b});
        }
      }
      for (int b = 0; b < nb; ++b)
      {
        for (const Cylinder &cyl : c.obstacles)
        {
          add_owned(sc, std::make_shared<ObstacleBlock>(layout, B[k][b].p, cyl.center, cyl.radius), {k, b});
        }
      }
    }

    for (int k = 0; k <= c.N; ++k)
    {
      if (!c.cost.terminal_only || k == c.N)
      {
        for (int b = 0; b < nb; ++b)
        {
          add_body_costs(sc, k, b, c.cost, pose_goal[b].R, pose_goal[b].p, dt);
        }
      }
      if (k < c.N && c.torque_weight > 0.0)
      {
        for (int j = 0; j < nj; ++j)
        {
          const int dim = group_dims[j];
          Eigen::MatrixXd W = Eigen::MatrixXd::Zero(dim, dim);
          W(0, 0) = c.torque_weight;
          sc.problem.add_objective(std::make_shared<QuadCostBlock>(layout, sc.slots.inputs[k][j],
                                                                   Eigen::VectorXd::Zero(dim), W, "cost_u"));
        }
      }
    }

    std::vector<std::vector<BodyState>> states(c.N + 1);
    for (int k = 0; k <= c.N; ++k)
    {
      const double t = static_cast<double>(k) / c.N;
      states[k] = forward_kinematics(model, c.q_init + t * (c.q_goal - c.q_init));
    }
    derive_velocities(states, dt);
    std::vector<std::vector<Eigen::VectorXd>> inputs(c.N);
    for (int k = 0; k < c.N; ++k)
    {
      for (int j = 0; j < nj; ++j)
      {
        inputs[k].push_back(Eigen::VectorXd::Zero(group_dims[j]));
      }
    }
    sc.initial = make_point(sc.slots, states, inputs);
    if (c.warm_start)
    {
      inverse_dynamics_warm_start(sc, model);
    }
    return sc;
  }

  ChainConfig default_manipulator_config(int links)
  {
    ChainConfig c;
    c.q_init = Eigen::VectorXd::Zero(links);
    c.q_goal = Eigen::VectorXd::Zero(links);
    const double goal[7] = {1.2, 0.6, 0.0, -0.8, 0.0, 0.5, 0.0};
    for (int i = 0; i < links; ++i)
    {
      c.q_goal[i] = goal[i % 7];
    }
    c.obstacles = {Cylinder{Eigen::Vector2d(0.45, 0.45), 0.1}};
    return c;
  }

  Scenario manipulator(const ChainModel &model, const ChainConfig &config) { return chain_problem(model, config); }

  void inverse_dynamics_warm_start(Scenario &sc, const ChainModel &model)
  {
    (void)model;
    const Evaluation ev = evaluate(sc.problem, sc.initial, true);
    const Eigen::MatrixXd AE = Eigen::MatrixXd(ev.A_E);
    const VariableLayout &layout = sc.slots.layout;
    for (int k = 0; k < sc.slots.N; ++k)
    {
      const std::vector<int> &rows = sc.dynamics_rows[k];
      std::vector<int> cols, torque_cols;
      for (int slot : sc.slots.inputs[k])
      {
        const Slot &s = layout.slot(slot);
        for (int i = 0; i < s.dim; ++i)
        {
          cols.push_back(s.tangent_offset + i);
        }
        torque_cols.push_back(s.tangent_offset);
      }
      Eigen::VectorXd r(rows.size());
      Eigen::MatrixXd A(rows.size(), cols.size());
      for (std::size_t i = 0; i < rows.size(); ++i)
      {
        r[i] = ev.h[rows[i]];
        for (std::size_t j = 0; j < cols.size(); ++j)
        {
          A(i, j) = AE(rows[i], cols[j]);
        }
      }
      Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
      Eigen::VectorXd du = Eigen::VectorXd::Zero(cols.size());
      if (qr.rank() == static_cast<int>(cols.size()))
      {
        du = qr.solve(-r);
      }
      else
      {
        sc.warnings.push_back("warm start: singular system at step " + std::to_string(k) +
                              "; multipliers set to zero");
        Eigen::MatrixXd At(rows.size(), torque_cols.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
        {
          for (std::size_t j = 0; j < torque_cols.size(); ++j)
          {
            At(i, j) = AE(rows[i], torque_cols[j]);
          }
        }
        const Eigen::VectorXd dt = At.completeOrthogonalDecomposition().solve(-r);
        for (std::size_t j = 0, g = 0; j < cols.size(); ++j)
        {
          if (g < torque_cols.size() && cols[j] == torque_cols[g])
          {
            du[j] = dt[g++];
          }
        }
      }
      int j = 0;
      for (int slot : sc.slots.inputs[k])
      {
        const int dim = layout.slot(slot).dim;
        sc.initial.vec[slot] += du.segment(j, dim);
        j += dim;
      }
    }
  }

  // ---------------------------------------------------------------------------

  std::vector<ChainTiming> chain_benchmark(const std::vector<int> &depths, int evaluations, int N)
  {
    std::vector<ChainTiming> out;
    for (int depth : depths)
    {
      if (depth < 1)
      {
        throw std::invalid_argument("chain_benchmark: depths must be >= 1");
      }
      const ChainModel model = ChainModel::uniform_rods(depth);
      ChainConfig cfg;
      cfg.N = N;
      cfg.warm_start = false;
      cfg.q_init = Eigen::VectorXd::Constant(depth, 0.1);
      cfg.q_goal = Eigen::VectorXd::Constant(depth, 0.3);
      const Scenario sc = chain_problem(model, cfg);

      std::vector<const Block *> blocks;
      for (const auto &b : sc.problem.objectives())
      {
        blocks.push_back(b.get());
      }
      for (const auto &pb : sc.problem.equalities())
      {
        blocks.push_back(pb.block.get());
      }
      for (const auto &pb : sc.problem.inequalities())
      {
        blocks.push_back(pb.block.get());
      }

      auto time_level = [&](EvalLevel level)
      {
        Expansion e;
        double sink = 0.0;
        const auto t0 = Clock::now();
        for (int it = 0; it < evaluations; ++it)
        {
          for (const Block *b : blocks)
          {
            b->evaluate(sc.initial, level, e);
            sink += e.value[0];
          }
        }
        const double t = seconds_since(t0) / evaluations;
        volatile double keep = sink;
        (void)keep;
        return t;
      };

      ChainTiming rec;
      rec.depth = depth;
      rec.t_residual = time_level(EvalLevel::Value);
      rec.t_gradient = time_level(EvalLevel::Gradient);
      rec.t_hessian = time_level(EvalLevel::Hessian);
      rec.jacobian_nonzeros = evaluate(sc.problem, sc.initial, true).A_E.nonZeros();
      out.push_back(rec);
    }
    return out;
  }

  double kkt_factorization_time(int N, int repeats)
  {
    DroneConfig c;
    c.N = N;
    const Scenario sc = drone_docking(c);
    const SolverOptions opts;
    const SolverState st = initial_state(sc.problem, sc.initial, opts);
    const KKTSystem sys = assemble(sc.problem, st.x, st.y, st.z, st.s, st.mu);
    std::vector<double> times;
    for (int r = 0; r < std::max(1, repeats); ++r)
    {
      const auto t0 = Clock::now();
      const NewtonStep step = solve_newton(sys);
      times.push_back(seconds_since(t0));
      volatile double keep = step.dx[0];
      (void)keep;
    }
    std::sort(times.begin(), times.end());
    return times[times.size() / 2];
  }

  // ---------------------------------------------------------------------------

  bool superlinear_tail(const std::vector<double> &E0, double rate)
  {
    const std::size_t n = E0.size();
    if (n < 3)
    {
      return false;
    }
    for (std::size_t i = n - 2; i < n; ++i)
    {
      if (!(E0[i] <= std::pow(E0[i - 1], rate)))
      {
        return false;
      }
    }
    return true;
  }

  bool interior_point_invariants(const SolveResult &result, double eps_tol)
  {
    for (const IterationRecord &r : result.trace)
    {
      if (!(r.min_s > 0.0) || !(r.min_z >= 0.0) || !r.boundary_ok || !(r.mu >= eps_tol / 10.0))
      {
        return false;
      }
    }
    const SolverState &st = result.state;
    const bool s_ok = st.s.size() == 0 || st.s.minCoeff() > 0.0;
    const bool z_ok = st.z.size() == 0 || st.z.minCoeff() >= 0.0;
    return s_ok && z_ok && st.mu >= eps_tol / 10.0;
  }

  SweepSummary summarize(std::vector<SeedResult> runs)
  {
    SweepSummary s;
    s.runs = std::move(runs);
    std::vector<int> iters;
    double time_sum = 0.0;
    for (const SeedResult &r : s.runs)
    {
      if (r.status == SolverStatus::Converged)
      {
        iters.push_back(r.iterations);
      }
      time_sum += r.t_per_iter_total;
    }
    if (!s.runs.empty())
    {
      s.converged_fraction = static_cast<double>(iters.size()) / s.runs.size();
      s.mean_time_per_iter = time_sum / s.runs.size();
    }
    if (!iters.empty())
    {
      std::sort(iters.begin(), iters.end());
      const std::size_t n = iters.size();
      s.median_iterations = n % 2 ? iters[n / 2] : 0.5 * (iters[n / 2 - 1] + iters[n / 2]);
      double sum = 0.0;
      for (int i : iters)
      {
        sum += i;
      }
      s.mean_iterations = sum / n;
    }
    return s;
  }

  SweepSummary convergence_sweep(const DroneConfig &base, const std::vector<std::uint64_t> &seeds,
                                 const SolverOptions &options, int workers)
  {
    std::vector<SeedResult> runs(seeds.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;

    auto work = [&]()
    {
      while (true)
      {
        const std::size_t i = next++;
        if (i >= seeds.size())
        {
          return;
        }
        try
        {
          DroneConfig cfg = base;
          cfg.seed = seeds[i];
          const Scenario sc = drone_docking(cfg);
          const SolveResult res = solve(sc.problem, sc.initial, options);
          SeedResult r;
          r.seed = seeds[i];
          r.status = res.status;
          r.iterations = res.iterations();
          r.final_E0 = res.final_E0;
          r.final_cost = res.trace.empty() ? 0.0 : res.trace.back().cost;
          const double iters = std::max(1, r.iterations);
          r.t_per_iter_solver = (res.time_total - res.time_evaluation) / iters;
          r.t_per_iter_total = res.time_total / iters;
          for (const IterationRecord &rec : res.trace)
          {
            r.E0_history.push_back(rec.E_0);
          }
          r.invariants_ok = interior_point_invariants(res, options.eps_tol);
          runs[i] = std::move(r);
        }
        catch (...)
        {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error)
          {
            error = std::current_exception();
          }
        }
      }
    };

    const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(seeds.size())));
    std::vector<std::thread> pool;
    for (int w = 1; w < n_workers; ++w)
    {
      pool.emplace_back(work);
    }
    work();
    for (auto &t : pool)
    {
      t.join();
    }
    if (error)
    {
      std::rethrow_exception(error);
    }
    return summarize(std::move(runs));
  }

} // namespace lgtraj
