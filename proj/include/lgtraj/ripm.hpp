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

#ifndef LGTRAJ_RIPM_HPP
#define LGTRAJ_RIPM_HPP

#include "lgtraj/nlp.hpp"

#include <string>
#include <vector>

namespace lgtraj
{
  struct SolverOptions
  {
    int N_max = 200;
    int J_max = 30;
    double eps_tol = 1e-11;
    double kappa_mu = 0.99;
    double theta_mu = 1.99;
    double tau_min = 0.995;
    double gamma_theta_barrier = 1e-6;  ///< cost-progress test
    double theta_min = 1e-4;
    double eta_phi = 1e-4;
    double gamma_theta_progress = 1e-4; ///< feasibility-progress test
    double beta = 0.5;
    double mu0 = 0.1;
    double s_phi = 2.3;
    double s_theta = 1.1;
    double delta = 1.0;
    double s_max = 100.0;
    bool regularize = false;

    /// Throws std::invalid_argument when a value is out of range.
    void validate() const;
  };

  /// Named termination tolerances: "table" 1e-11, "figure" 1e-14, "ipopt-default" 1e-6.
  double tolerance_preset(const std::string &name);

  enum class SolverStatus
  {
    Converged,
    MaxIterations,
    LineSearchFailure,
    FactorizationFailure
  };

  std::string to_string(SolverStatus status);

  enum class AcceptReason
  {
    None,
    Armijo,
    CostProgress,
    FeasibilityProgress
  };

  std::string to_string(AcceptReason reason);

  struct SolverState
  {
    Point x;
    Eigen::VectorXd y, z, s;
    double mu = 0.1;
    int iter = 0;
  };

  /// One outer iteration. Metrics refer to the iterate at the start of the
  /// iteration; step data describe the move away from it (zero on the
  /// terminating record).
  struct IterationRecord
  {
    int iter = 0;
    double E_0 = 0.0;
    double E_mu = 0.0;
    double mu = 0.0; ///< barrier parameter the direction was computed with
    double cost = 0.0;
    double theta = 0.0;
    double alpha = 0.0;   ///< primal step scale beta^(j-1)
    double alpha_z = 0.0;
    double alpha_s = 0.0;
    int j = 0;
    AcceptReason reason = AcceptReason::None;

    // Raw residuals sufficient to recompute E_0 and E_mu.
    double dual_inf = 0.0;  ///< ||grad f + A_E^T y + A_I^T z||_inf
    double eq_inf = 0.0;    ///< ||h||_inf
    double slack_inf = 0.0; ///< ||g + s||_inf
    double comp_inf = 0.0;  ///< ||S z||_inf
    double comp_mu_inf = 0.0; ///< ||S z - mu e||_inf
    double s_d = 1.0;
    double s_c = 1.0;

    double min_s = 0.0; ///< over the accepted next iterate (+inf when m = 0)
    double min_z = 0.0;
    bool boundary_ok = true; ///< fraction-to-boundary bound held exactly

    double time_linear_algebra = 0.0;
    double time_evaluation = 0.0;
  };

  using IterationTrace = std::vector<IterationRecord>;

  /// E_0 recomputed from the raw residuals stored in a record.
  double replay_E0(const IterationRecord &record);

  struct SolveResult
  {
    SolverState state;
    IterationTrace trace;
    SolverStatus status = SolverStatus::MaxIterations;
    std::string message;
    double final_E0 = 0.0;
    double time_total = 0.0;
    double time_linear_algebra = 0.0;
    double time_evaluation = 0.0;

    int iterations() const { return static_cast<int>(trace.size()); }
  };

  /// Largest alpha in (0, 1] with w + alpha d >= (1 - tau) w componentwise,
  /// nudged down until the inequality holds exactly in floating point.
  double fraction_to_boundary(const Eigen::VectorXd &w, const Eigen::VectorXd &d, double tau);

  /// max(eps_tol / 10, min(kappa_mu mu, mu^theta_mu)) if E_mu <= 10 mu, else mu.
  double update_mu(double mu, double E_mu, const SolverOptions &options);

  /// ||h||_1 + sum of the nonnegative entries of g.
  double infeasibility(const Eigen::VectorXd &h, const Eigen::VectorXd &g);

  struct LineSearchResult
  {
    bool accepted = false;
    Point x;
    double alpha = 0.0;
    int trials = 0;
    AcceptReason reason = AcceptReason::None;
    double cost = 0.0;
    double theta = 0.0;
    double time_evaluation = 0.0;
  };

  /// Backtracking on the primal direction only. The barrier term uses the
  /// current slack, which is held fixed during the search.
  LineSearchResult line_search(const NLPProblem &problem, const SolverState &state, const Eigen::VectorXd &dx,
                               const SolverOptions &options);

  /// s0 = max(1e-2, -g(x0)), z0 = mu0 / s0, y0 = 0.
  SolverState initial_state(const NLPProblem &problem, const Point &x0, const SolverOptions &options);

  SolveResult solve(const NLPProblem &problem, const Point &x0, const SolverOptions &options = {});

} // namespace lgtraj

#endif // LGTRAJ_RIPM_HPP
