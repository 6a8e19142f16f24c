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

#include "lgtraj/ripm.hpp"

#include "lgtraj/errors.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lgtraj
{
  namespace
  {
    using Clock = std::chrono::steady_clock;

    double seconds_since(Clock::time_point t0)
    {
      return std::chrono::duration<double>(Clock::now() - t0).count();
    }

    double inf_norm(const Eigen::VectorXd &v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

    double min_or_inf(const Eigen::VectorXd &v)
    {
      return v.size() == 0 ? std::numeric_limits<double>::infinity() : v.minCoeff();
    }

    bool boundary_holds(const Eigen::VectorXd &w, const Eigen::VectorXd &w_next, double tau)
    {
      for (int i = 0; i < w.size(); ++i)
      {
        if (!(w_next[i] >= (1.0 - tau) * w[i]))
        {
          return false;
        }
      }
      return true;
    }

    LineSearchResult search(const NLPProblem &problem, const Point &x, const Evaluation &ev0, const Eigen::VectorXd &dx,
                            const SolverOptions &o)
    {
      const double phi0 = ev0.f;
      const double theta0 = infeasibility(ev0.h, ev0.g);
      LineSearchResult out;
      double alpha = 1.0;
      for (int j = 1; j <= o.J_max; ++j, alpha *= o.beta)
      {
        const Eigen::VectorXd d = alpha * dx;
        const auto t0 = Clock::now();
        Point trial = problem.retract(x, d);
        const Evaluation ev = evaluate(problem, trial, false);
        out.time_evaluation += seconds_since(t0);
        const double phi = ev.f;
        const double theta = infeasibility(ev.h, ev.g);
        const double c = ev0.grad_f.dot(d);
        out.trials = j;

        AcceptReason reason = AcceptReason::None;
        if (theta0 <= o.theta_min && c < 0.0 && alpha * std::pow(-c, o.s_phi) > o.delta * std::pow(theta0, o.s_theta))
        {
          if (phi <= phi0 + o.eta_phi * c)
          {
            reason = AcceptReason::Armijo;
          }
        }
        else if (phi <= phi0 - o.gamma_theta_barrier * theta0)
        {
          reason = AcceptReason::CostProgress;
        }
        else if (theta <= (1.0 - o.gamma_theta_progress) * theta0)
        {
          reason = AcceptReason::FeasibilityProgress;
        }

        out.alpha = alpha;
        out.cost = phi;
        out.theta = theta;
        if (reason != AcceptReason::None)
        {
          out.accepted = true;
          out.reason = reason;
          out.x = std::move(trial);
          return out;
        }
      }
      return out;
    }
  } // namespace

  void SolverOptions::validate() const
  {
    const bool positive = N_max > 0 && J_max > 0 && eps_tol > 0.0 && kappa_mu > 0.0 && theta_mu > 0.0 &&
                          gamma_theta_barrier > 0.0 && theta_min > 0.0 && eta_phi > 0.0 &&
                          gamma_theta_progress > 0.0 && mu0 > 0.0 && s_phi > 0.0 && s_theta > 0.0 && delta > 0.0 &&
                          s_max > 0.0;
    if (!positive)
    {
      throw std::invalid_argument("SolverOptions: all parameters must be positive");
    }
    if (!(beta > 0.0 && beta < 1.0))
    {
      throw std::invalid_argument("SolverOptions: beta must lie in (0, 1)");
    }
    if (!(tau_min > 0.0 && tau_min < 1.0))
    {
      throw std::invalid_argument("SolverOptions: tau_min must lie in (0, 1)");
    }
  }

  double tolerance_preset(const std::string &name)
  {
    if (name == "table")
    {
      return 1e-11;
    }
    if (name == "figure")
    {
      return 1e-14;
    }
    if (name == "ipopt-default")
    {
      return 1e-6;
    }
    throw std::invalid_argument("unknown tolerance preset '" + name + "'");
  }

  std::string to_string(SolverStatus status)
  {
    switch (status)
    {
    case SolverStatus::Converged:
      return "converged";
    case SolverStatus::MaxIterations:
      return "max-iters";
    case SolverStatus::LineSearchFailure:
      return "line-search-failure";
    case SolverStatus::FactorizationFailure:
      return "factorization-failure";
    }
    return "unknown";
  }

  std::string to_string(AcceptReason reason)
  {
    switch (reason)
    {
    case AcceptReason::None:
      return "none";
    case AcceptReason::Armijo:
      return "armijo";
    case AcceptReason::CostProgress:
      return "cost-progress";
    case AcceptReason::FeasibilityProgress:
      return "feasibility-progress";
    }
    return "unknown";
  }

  double replay_E0(const IterationRecord &r)
  {
    return std::max({r.dual_inf / r.s_d, r.eq_inf, r.slack_inf, r.comp_inf / r.s_c});
  }

  double fraction_to_boundary(const Eigen::VectorXd &w, const Eigen::VectorXd &d, double tau)
  {
    if (w.size() != d.size())
    {
      throw std::invalid_argument("fraction_to_boundary: size mismatch");
    }
    double alpha = 1.0;
    for (int i = 0; i < w.size(); ++i)
    {
      if (d[i] < 0.0)
      {
        alpha = std::min(alpha, -tau * w[i] / d[i]);
      }
    }
    // The quotient may round up by an ulp; step down until the bound is exact.
    auto holds = [&](double a)
    {
      for (int i = 0; i < w.size(); ++i)
      {
        if (!(w[i] + a * d[i] >= (1.0 - tau) * w[i]))
        {
          return false;
        }
      }
      return true;
    };
    while (alpha > 0.0 && !holds(alpha))
    {
      alpha = std::nextafter(alpha, 0.0);
    }
    return alpha;
  }

  double update_mu(double mu, double E_mu, const SolverOptions &o)
  {
    if (!(E_mu <= 10.0 * mu))
    {
      return mu;
    }
    return std::max(o.eps_tol / 10.0, std::min(o.kappa_mu * mu, std::pow(mu, o.theta_mu)));
  }

  double infeasibility(const Eigen::VectorXd &h, const Eigen::VectorXd &g)
  {
    double theta = h.lpNorm<1>();
    for (int i = 0; i < g.size(); ++i)
    {
      if (g[i] >= 0.0)
      {
        theta += g[i];
      }
    }
    return theta;
  }

  LineSearchResult line_search(const NLPProblem &problem, const SolverState &state, const Eigen::VectorXd &dx,
                               const SolverOptions &options)
  {
    const Evaluation ev0 = evaluate(problem, state.x, true);
    return search(problem, state.x, ev0, dx, options);
  }

  SolverState initial_state(const NLPProblem &problem, const Point &x0, const SolverOptions &o)
  {
    SolverState st;
    st.x = x0;
    const Evaluation ev = evaluate(problem, x0, false);
    st.y = Eigen::VectorXd::Zero(problem.num_equalities());
    st.s = (-ev.g).cwiseMax(1e-2);
    st.z = Eigen::VectorXd::Constant(st.s.size(), o.mu0).cwiseQuotient(st.s);
    st.mu = std::max(o.mu0, o.eps_tol / 10.0);
    return st;
  }

  SolveResult solve(const NLPProblem &problem, const Point &x0, const SolverOptions &o)
  {
    o.validate();
    const auto t_start = Clock::now();
    SolveResult res;
    res.state = initial_state(problem, x0, o);
    SolverState &st = res.state;
    NewtonOptions newton;
    newton.regularize = o.regularize;

    bool finished = false;
    for (int k = 0; k < o.N_max; ++k)
    {
      st.iter = k;
      IterationRecord rec;
      rec.iter = k;
      rec.mu = st.mu;

      auto t0 = Clock::now();
      const KKTSystem sys = assemble(problem, st.x, st.y, st.z, st.s, st.mu);
      const ErrorMetrics em = error_metrics(sys.eval, st.y, st.z, st.s, st.mu, o.s_max);
      rec.time_evaluation = seconds_since(t0);

      rec.E_0 = em.E_0;
      rec.E_mu = em.E_mu;
      rec.cost = sys.eval.f;
      rec.theta = infeasibility(sys.eval.h, sys.eval.g);
      rec.dual_inf = inf_norm(sys.r_dual);
      rec.eq_inf = inf_norm(sys.r_eq);
      rec.slack_inf = inf_norm(sys.r_ineq);
      rec.comp_inf = inf_norm(Eigen::VectorXd(st.s.cwiseProduct(st.z)));
      rec.comp_mu_inf = inf_norm(sys.r_comp);
      rec.s_d = em.s_d;
      rec.s_c = em.s_c;
      rec.min_s = min_or_inf(st.s);
      rec.min_z = min_or_inf(st.z);

      auto finish = [&](SolverStatus status, std::string message)
      {
        res.time_evaluation += rec.time_evaluation;
        res.time_linear_algebra += rec.time_linear_algebra;
        res.trace.push_back(rec);
        res.status = status;
        res.message = std::move(message);
        res.final_E0 = rec.E_0;
        finished = true;
      };

      if (em.E_0 <= o.eps_tol)
      {
        finish(SolverStatus::Converged, "E_0 below tolerance");
        break;
      }

      t0 = Clock::now();
      NewtonStep step;
      try
      {
        step = solve_newton(sys, newton);
      }
      catch (const SolverError &e)
      {
        rec.time_linear_algebra = seconds_since(t0);
        finish(SolverStatus::FactorizationFailure,
               std::string(e.what()) + " (iteration " + std::to_string(k) + ")");
        break;
      }
      rec.time_linear_algebra = seconds_since(t0);

      const double mu_next = update_mu(st.mu, em.E_mu, o);
      const double tau = std::max(o.tau_min, 1.0 - mu_next);
      rec.alpha_z = st.z.size() ? fraction_to_boundary(st.z, step.dz, tau) : 1.0;
      rec.alpha_s = st.s.size() ? fraction_to_boundary(st.s, step.ds, tau) : 1.0;
      const Eigen::VectorXd dz = rec.alpha_z * step.dz;
      const Eigen::VectorXd ds = rec.alpha_s * step.ds;

      LineSearchResult ls = search(problem, st.x, sys.eval, step.dx, o);
      rec.time_evaluation += ls.time_evaluation;
      rec.alpha = ls.alpha;
      rec.j = ls.trials;
      rec.reason = ls.reason;
      if (!ls.accepted)
      {
        finish(SolverStatus::LineSearchFailure,
               "line search exhausted " + std::to_string(o.J_max) + " trials at iteration " + std::to_string(k) +
                   " (last cost " + std::to_string(ls.cost) + ", infeasibility " + std::to_string(ls.theta) + ")");
        break;
      }

      const Eigen::VectorXd z_next = st.z + dz;
      const Eigen::VectorXd s_next = st.s + ds;
      rec.boundary_ok = boundary_holds(st.z, z_next, tau) && boundary_holds(st.s, s_next, tau);
      st.x = std::move(ls.x);
      st.y += step.dy;
      st.z = z_next;
      st.s = s_next;
      st.mu = mu_next;
      rec.min_s = min_or_inf(st.s);
      rec.min_z = min_or_inf(st.z);

      res.time_evaluation += rec.time_evaluation;
      res.time_linear_algebra += rec.time_linear_algebra;
      res.trace.push_back(rec);
    }

    if (!finished)
    {
      res.status = SolverStatus::MaxIterations;
      res.message = "iteration budget exhausted";
      res.final_E0 = error_metrics(problem, st.x, st.y, st.z, st.s, st.mu, o.s_max).E_0;
    }
    res.time_total = seconds_since(t_start);
    return res;
  }

} // namespace lgtraj
