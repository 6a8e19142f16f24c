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

// Acceptance report: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "lgtraj/check.hpp"
#include "lgtraj/constraints.hpp"
#include "lgtraj/costs.hpp"
#include "lgtraj/lie.hpp"
#include "lgtraj/rigid_body.hpp"
#include "lgtraj/ripm.hpp"
#include "lgtraj/scenarios.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <memory>
#include <random>
#include <string>
#include <thread>
#include <vector>

using namespace lgtraj;

namespace
{
  // Pinned tolerances.
  constexpr int kDerivStates = 100;
  constexpr double kDerivGradTol = 1e-6;
  constexpr double kDerivHessTol = 1e-4;
  constexpr double kDerivSeconds = 60.0;

  constexpr int kBchChains = 50;
  constexpr double kBchRatioLo = 8.0 * 0.8;
  constexpr double kBchRatioHi = 8.0 * 1.2;

  constexpr double kSimDt = 0.01;
  constexpr int kSimSteps = 1000;
  constexpr double kSimTol = 1e-12;
  constexpr double kMomentumDrift = 1e-8;
  constexpr double kOrthoDefect = 1e-9;

  constexpr double kToyTol = 1e-9;
  constexpr int kToyIters = 20;

  constexpr int kSweepSeeds = 50;
  constexpr int kSweepN = 40;
  constexpr double kSweepTol = 1e-9;
  constexpr int kSweepBudget = 100;
  constexpr double kFreeFraction = 0.8;
  constexpr double kFreeMedian = 25.0;
  constexpr double kBoxFraction = 0.6;
  constexpr double kBoxMedian = 40.0;
  constexpr double kSweepSeconds = 600.0;

  constexpr double kTailRate = 1.3;
  constexpr double kTailFraction = 0.7;

  constexpr double kSlopeLo = 0.8;
  constexpr double kSlopeHi = 1.25;
  constexpr double kHorizonRatioLo = 1.6;
  constexpr double kHorizonRatioHi = 2.6;

  using Clock = std::chrono::steady_clock;

  double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

  int failures = 0;

  void report(int id, bool pass, const std::string &detail)
  {
    std::printf("criterion %d: %s  %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    failures += pass ? 0 : 1;
  }

  std::string fmt(const char *format, auto... args)
  {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
  }

  Vec3 random_vec(std::mt19937_64 &rng)
  {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    return Vec3(u(rng), u(rng), u(rng));
  }

  void derivatives()
  {
    CheckOptions o;
    o.states = kDerivStates;
    o.gradient_threshold = kDerivGradTol;
    o.hessian_threshold = kDerivHessTol;
    const auto t0 = Clock::now();
    const auto reports = run_derivative_check(o);
    const double secs = seconds_since(t0);
    double g = 0.0, h = 0.0;
    bool pass = reports.size() == check_families().size();
    std::string failed;
    for (const auto &r : reports)
    {
      g = std::max(g, r.gradient_error);
      h = std::max(h, r.hessian_error);
      if (!r.pass)
      {
        pass = false;
        failed += " " + r.family;
      }
    }
    pass = pass && secs <= kDerivSeconds;
    report(1, pass,
           fmt("%zu families x %d states, worst grad %.2e (<= %.0e), hess %.2e (<= %.0e), %.1f s (<= %.0f s)%s",
               reports.size(), kDerivStates, g, kDerivGradTol, h, kDerivHessTol, secs, kDerivSeconds,
               failed.empty() ? "" : (" failing:" + failed).c_str()));
  }

  void bch_chain()
  {
    std::mt19937_64 rng(2);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (int c = 0; c < kBchChains; ++c)
    {
      std::vector<Rotation> X;
      std::vector<Vec3> xi;
      for (int i = 0; i < 3; ++i)
      {
        X.push_back(exp_so3(2.0 * random_vec(rng)));
        xi.push_back(random_vec(rng));
      }
      const ChainExpansion e = chain_second_order(X);
      const Rotation Ybar = X[0] * X[1] * X[2];
      auto remainder = [&](double t)
      {
        Rotation Y;
        std::vector<Vec3> d;
        for (int i = 0; i < 3; ++i)
        {
          Y = Y * X[i] * exp_so3(t * xi[i]);
          d.push_back(t * xi[i]);
        }
        return ((Ybar.inverse() * Y).log() - e.first_order(d) - e.second_order(d)).norm();
      };
      const double ratio = remainder(0.02) / remainder(0.01);
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
    }
    report(2, lo >= kBchRatioLo && hi <= kBchRatioHi,
           fmt("%d random 3-element chains, halving ratio in [%.3f, %.3f] (need [%.1f, %.1f])", kBchChains, lo, hi,
               kBchRatioLo, kBchRatioHi));
  }

  void conservation()
  {
    struct Case
    {
      Mat3 inertia;
      Vec3 omega;
    };
    const std::vector<Case> cases = {
        {Vec3(0.0820, 0.0845, 0.1377).asDiagonal(), Vec3(0.3, -0.7, 1.1)},
        {Vec3(1.0, 2.0, 3.0).asDiagonal(), Vec3(0.1, 4.0, 0.1)}, // near the unstable axis
    };
    double drift = 0.0, defect = 0.0;
    bool ok = true;
    for (const Case &c : cases)
    {
      const BodyParams body = BodyParams::make(1.0, c.inertia, Vec3::Zero());
      BodyState x0;
      x0.R = exp_so3(Vec3(0.4, -0.2, 0.9));
      x0.F = exp_so3(kSimDt * c.omega);
      try
      {
        const Trajectory traj =
            simulate(body, x0, std::vector<ControlInput>(kSimSteps), kSimDt, kSimSteps, kSimTol);
        const Vec3 L0 = spatial_angular_momentum(traj.states.front().front(), body.nonstandard_inertia, kSimDt);
        for (const auto &step : traj.states)
        {
          const BodyState &s = step.front();
          drift = std::max(drift,
                           (spatial_angular_momentum(s, body.nonstandard_inertia, kSimDt) - L0).norm() / L0.norm());
          defect = std::max({defect, s.R.orthonormality_defect(), s.F.orthonormality_defect()});
        }
      }
      catch (const std::exception &e)
      {
        std::printf("  simulation failed: %s\n", e.what());
        ok = false;
      }
    }
    report(3, ok && drift <= kMomentumDrift && defect <= kOrthoDefect,
           fmt("%d steps at dt %.2f: relative momentum drift %.2e (<= %.0e), orthonormality defect %.2e (<= %.0e)",
               kSimSteps, kSimDt, drift, kMomentumDrift, defect, kOrthoDefect));
  }

  struct ToyOutcome
  {
    bool ok = false;
    std::string detail;
    bool invariants = true;
  };

  ToyOutcome toy(bool inequality)
  {
    VariableLayout layout;
    const int v = layout.add_euclidean(1, 0, 0);
    NLPProblem problem(layout);
    problem.add_objective(std::make_shared<QuadCostBlock>(layout, v, Eigen::VectorXd::Zero(1),
                                                          Eigen::MatrixXd::Constant(1, 1, 2.0)));
    if (inequality)
    {
      problem.add_constraint(std::make_shared<BoxBlock>(layout, v, Eigen::VectorXd::Constant(1, 1.0),
                                                        Eigen::VectorXd::Constant(1, std::numeric_limits<double>::infinity())));
    }
    else
    {
      problem.add_constraint(std::make_shared<InitialVectorBlock>(layout, v, Eigen::VectorXd::Constant(1, 1.0)));
    }
    Point x0 = Point::zeros(layout);
    x0.vec[v][0] = 5.0;
    const SolverOptions o;
    const SolveResult res = solve(problem, x0, o);
    const double x = res.state.x.vec[v][0];
    const double mult = inequality ? res.state.z[0] : res.state.y[0];
    const double expected = inequality ? 2.0 : -2.0;
    ToyOutcome out;
    out.ok = res.status == SolverStatus::Converged && std::abs(x - 1.0) <= kToyTol &&
             std::abs(mult - expected) <= kToyTol && res.iterations() <= kToyIters;
    out.detail = fmt("%s: x %.12f, %s %.12f, %d iters", inequality ? "x>=1" : "x=1", x, inequality ? "z" : "y", mult,
                     res.iterations());
    out.invariants = interior_point_invariants(res, o.eps_tol);
    return out;
  }

  double slope(const std::vector<double> &x, const std::vector<double> &y)
  {
    const int n = static_cast<int>(x.size());
    double mx = 0.0, my = 0.0;
    for (int i = 0; i < n; ++i)
    {
      mx += std::log(x[i]) / n;
      my += std::log(y[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (int i = 0; i < n; ++i)
    {
      sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
      sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
    }
    return sxy / sxx;
  }
} // namespace

int main()
{
  derivatives();
  bch_chain();
  conservation();

  const ToyOutcome ineq = toy(true);
  const ToyOutcome eq = toy(false);
  report(4, ineq.ok && eq.ok, ineq.detail + "; " + eq.detail);

  std::vector<std::uint64_t> seeds(kSweepSeeds);
  for (int i = 0; i < kSweepSeeds; ++i)
  {
    seeds[i] = static_cast<std::uint64_t>(i);
  }
  SolverOptions so;
  so.eps_tol = kSweepTol;
  so.N_max = kSweepBudget;
  const int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  DroneConfig dc;
  dc.N = kSweepN;
  const auto t0 = Clock::now();
  dc.variant = DroneVariant::Unconstrained;
  const SweepSummary free = convergence_sweep(dc, seeds, so, workers);
  dc.variant = DroneVariant::Constrained;
  const SweepSummary box = convergence_sweep(dc, seeds, so, workers);
  const double sweep_secs = seconds_since(t0);
  report(5,
         free.converged_fraction >= kFreeFraction && free.median_iterations <= kFreeMedian &&
             box.converged_fraction >= kBoxFraction && box.median_iterations <= kBoxMedian &&
             sweep_secs <= kSweepSeconds,
         fmt("unconstrained %.0f%% (>= %.0f%%) median %.1f (<= %.0f); constrained %.0f%% (>= %.0f%%) median %.1f "
             "(<= %.0f); %.0f s (<= %.0f s)",
             100.0 * free.converged_fraction, 100.0 * kFreeFraction, free.median_iterations, kFreeMedian,
             100.0 * box.converged_fraction, 100.0 * kBoxFraction, box.median_iterations, kBoxMedian, sweep_secs,
             kSweepSeconds));

  int converged = 0, tails = 0;
  for (const SeedResult &r : free.runs)
  {
    if (r.status == SolverStatus::Converged)
    {
      ++converged;
      tails += superlinear_tail(r.E0_history, kTailRate) ? 1 : 0;
    }
  }
  const double tail_fraction = converged ? static_cast<double>(tails) / converged : 0.0;
  report(6, tail_fraction >= kTailFraction,
         fmt("%d of %d converged unconstrained runs have E_{k+1} <= E_k^%.1f over the last three iterations "
             "(%.0f%%, need >= %.0f%%)",
             tails, converged, kTailRate, 100.0 * tail_fraction, 100.0 * kTailFraction));

  const std::vector<int> depths{2, 4, 8, 16, 32};
  const auto bench = chain_benchmark(depths, 100);
  std::vector<double> dx, th;
  for (const ChainTiming &t : bench)
  {
    dx.push_back(t.depth);
    th.push_back(t.t_hessian);
  }
  const double s = slope(dx, th);
  const double t40 = kkt_factorization_time(40, 15);
  const double t80 = kkt_factorization_time(80, 15);
  const double ratio = t80 / t40;
  report(7, s >= kSlopeLo && s <= kSlopeHi && ratio >= kHorizonRatioLo && ratio <= kHorizonRatioHi,
         fmt("second-order evaluation slope %.3f (in [%.2f, %.2f]); KKT time N=80/N=40 %.3f (in [%.1f, %.1f])", s,
             kSlopeLo, kSlopeHi, ratio, kHorizonRatioLo, kHorizonRatioHi));

  int checked = 2, bad = (ineq.invariants ? 0 : 1) + (eq.invariants ? 0 : 1);
  for (const SweepSummary *sw : {&free, &box})
  {
    for (const SeedResult &r : sw->runs)
    {
      ++checked;
      bad += r.invariants_ok ? 0 : 1;
    }
  }
  report(8, bad == 0,
         fmt("%d solved instances, %d with min(s) <= 0, min(z) < 0, an inexact boundary step or mu < eps_tol/10",
             checked, bad));

  ChainConfig cc;
  cc.N = 5;
  cc.q_init = Eigen::Vector3d(0.1, 0.2, -0.1);
  cc.q_goal = Eigen::Vector3d(0.4, -0.3, 0.2);
  cc.obstacles = {Cylinder{Eigen::Vector2d(0.4, 0.4), 0.1}};
  const Scenario sc = chain_problem(ChainModel::uniform_rods(3), cc);
  const int l = sc.problem.num_equalities(), m = sc.problem.num_inequalities();
  const KKTSystem sys = assemble(sc.problem, sc.initial, Eigen::VectorXd::Ones(l), Eigen::VectorXd::Ones(m),
                                 Eigen::VectorXd::Ones(m), 0.1);
  const int leaks = envelope_leakage(sc, sys);
  report(9, leaks == 0,
         fmt("3-body chain, N = 5: %ld KKT nonzeros, %d outside the block envelope",
             static_cast<long>(sys.hessian.nonZeros() + sys.eval.A_E.nonZeros() + sys.eval.A_I.nonZeros()), leaks));

  std::printf("%s: %d of 9 criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
