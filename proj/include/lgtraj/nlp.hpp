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

#ifndef LGTRAJ_NLP_HPP
#define LGTRAJ_NLP_HPP

#include "lgtraj/problem.hpp"

#include <Eigen/Sparse>

#include <vector>

namespace lgtraj
{
  using SparseMatrix = Eigen::SparseMatrix<double>;

  /// A block together with the global constraint rows it writes to. Several
  /// blocks may share rows; their contributions are summed.
  struct PlacedBlock
  {
    BlockPtr block;
    std::vector<int> rows;
  };

  /// min f(x) s.t. h(x) = 0, g(x) <= 0 over a product of SO(3) and
  /// Euclidean factors.
  class NLPProblem
  {
  public:
    explicit NLPProblem(VariableLayout layout);

    const VariableLayout &layout() const { return layout_; }
    int num_variables() const { return layout_.tangent_dim(); }
    int num_equalities() const { return num_eq_; }
    int num_inequalities() const { return num_ineq_; }

    void add_objective(BlockPtr block);

    /// Places the block on freshly allocated rows; returns the first row.
    int add_constraint(BlockPtr block);

    /// Places the block on existing rows of its kind.
    void add_constraint(BlockPtr block, std::vector<int> rows);

    /// Reserves `count` rows of the given constraint kind; returns the first.
    int allocate_rows(BlockKind kind, int count);

    const std::vector<BlockPtr> &objectives() const { return objectives_; }
    const std::vector<PlacedBlock> &equalities() const { return equalities_; }
    const std::vector<PlacedBlock> &inequalities() const { return inequalities_; }

    /// Global tangent index of every local column of `block`.
    std::vector<int> global_columns(const Block &block) const;

    Point retract(const Point &x, const ProductTangent &d) const;

  private:
    VariableLayout layout_;
    std::vector<BlockPtr> objectives_;
    std::vector<PlacedBlock> equalities_;
    std::vector<PlacedBlock> inequalities_;
    int num_eq_ = 0;
    int num_ineq_ = 0;
  };

  /// Function values and first derivatives at one point.
  struct Evaluation
  {
    double f = 0.0;
    Eigen::VectorXd grad_f;
    Eigen::VectorXd h;
    Eigen::VectorXd g;
    SparseMatrix A_E; ///< l x n Jacobian of h
    SparseMatrix A_I; ///< m x n Jacobian of g
  };

  /// Evaluates f, h, g, and (if `derivatives`) grad f, A_E, A_I.
  Evaluation evaluate(const NLPProblem &problem, const Point &x, bool derivatives = true);

  /// Hess f + sum y_i Hess h_i + sum z_i Hess g_i with full symmetric storage.
  /// The sparsity pattern depends only on block structure, never on values.
  SparseMatrix lagrangian_hessian(const NLPProblem &problem, const Point &x, const Eigen::VectorXd &y,
                                  const Eigen::VectorXd &z);

  /// Newton system of the log-barrier KKT conditions,
  ///
  ///   [ H    A_E^T  A_I^T  0 ] [dx]     [ grad f + A_E^T y + A_I^T z ]
  ///   [ A_E  0      0      0 ] [dy] = - [ h                          ]
  ///   [ A_I  0      0      I ] [dz]     [ g + s                      ]
  ///   [ 0    0      S      Z ] [ds]     [ S z - mu e                 ]
  struct KKTSystem
  {
    Evaluation eval;
    SparseMatrix hessian;
    Eigen::VectorXd y, z, s;
    double mu = 0.0;

    Eigen::VectorXd r_dual; ///< grad f + A_E^T y + A_I^T z
    Eigen::VectorXd r_eq;   ///< h
    Eigen::VectorXd r_ineq; ///< g + s
    Eigen::VectorXd r_comp; ///< S z - mu e

    int n() const { return static_cast<int>(r_dual.size()); }
    int l() const { return static_cast<int>(r_eq.size()); }
    int m() const { return static_cast<int>(r_ineq.size()); }
  };

  /// Throws InvalidState if any slack is nonpositive or sizes disagree.
  KKTSystem assemble(const NLPProblem &problem, const Point &x, const Eigen::VectorXd &y, const Eigen::VectorXd &z,
                     const Eigen::VectorXd &s, double mu);

  struct NewtonOptions
  {
    /// Adds delta_w I to the Hessian block when factorization fails. Off by default.
    bool regularize = false;
    double delta_initial = 1e-8;
    double delta_growth = 10.0;
    int max_regularization_attempts = 20;
    int refinement_steps = 3;
  };

  struct NewtonStep
  {
    Eigen::VectorXd dx, dy, dz, ds;
    double residual = 0.0;      ///< relative residual of the full 4x4 system
    double regularization = 0.0; ///< delta_w actually used
  };

  /// Solves the KKT system after eliminating ds and dz into the symmetric
  /// (n + l) saddle-point system. Throws SolverError carrying the failing
  /// pivot column when the factorization breaks down.
  NewtonStep solve_newton(const KKTSystem &system, const NewtonOptions &options = {});

  /// Reference solve of the unreduced (n + l + 2m) system.
  NewtonStep solve_full(const KKTSystem &system);

  /// The unreduced KKT matrix, in (dx, dy, dz, ds) order.
  SparseMatrix full_kkt_matrix(const KKTSystem &system);

  /// ||K d + r||_inf / (||K||_inf ||d||_inf + ||r||_inf) for the unreduced system.
  double kkt_residual(const KKTSystem &system, const NewtonStep &step);

  struct ErrorMetrics
  {
    double E_mu = 0.0;
    double E_0 = 0.0;
    double eps_kkt = 0.0;
    double eps_E = 0.0;
    double eps_I = 0.0;  ///< at the requested mu
    double eps_I0 = 0.0; ///< at mu = 0
    double s_d = 1.0;
    double s_c = 1.0;
  };

  /// Scaled optimality errors. eps_E covers both h and the slack equation
  /// g + s; s_d, s_c use the usual max(s_max, mean |multiplier|) / s_max scaling.
  ErrorMetrics error_metrics(const Evaluation &eval, const Eigen::VectorXd &y, const Eigen::VectorXd &z,
                             const Eigen::VectorXd &s, double mu, double s_max = 100.0);

  ErrorMetrics error_metrics(const NLPProblem &problem, const Point &x, const Eigen::VectorXd &y,
                             const Eigen::VectorXd &z, const Eigen::VectorXd &s, double mu, double s_max = 100.0);

  Point retract(const NLPProblem &problem, const Point &x, const ProductTangent &d);

} // namespace lgtraj

#endif // LGTRAJ_NLP_HPP
