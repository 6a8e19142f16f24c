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

#include "lgtraj/nlp.hpp"

#include "lgtraj/errors.hpp"

#include <Eigen/SparseLU>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <utility>

namespace lgtraj
{
  namespace
  {
    using Triplet = Eigen::Triplet<double>;

    double inf_norm(const SparseMatrix &A)
    {
      Eigen::VectorXd rows = Eigen::VectorXd::Zero(A.rows());
      for (int k = 0; k < A.outerSize(); ++k)
      {
        for (SparseMatrix::InnerIterator it(A, k); it; ++it)
        {
          rows[it.row()] += std::abs(it.value());
        }
      }
      return rows.size() == 0 ? 0.0 : rows.maxCoeff();
    }

    double inf_norm(const Eigen::VectorXd &v) { return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>(); }

    int trailing_index(const std::string &message)
    {
      std::size_t end = message.size();
      while (end > 0 && std::isspace(static_cast<unsigned char>(message[end - 1])))
      {
        --end;
      }
      std::size_t begin = end;
      while (begin > 0 && std::isdigit(static_cast<unsigned char>(message[begin - 1])))
      {
        --begin;
      }
      return begin == end ? -1 : std::stoi(message.substr(begin, end - begin));
    }

    void add_placed_jacobian(const NLPProblem &problem, const PlacedBlock &pb, const Point &x,
                             Eigen::VectorXd &values, std::vector<Triplet> *triplets)
    {
      Expansion e;
      pb.block->evaluate(x, triplets ? EvalLevel::Gradient : EvalLevel::Value, e);
      for (int r = 0; r < pb.block->dim(); ++r)
      {
        values[pb.rows[r]] += e.value[r];
      }
      if (!triplets)
      {
        return;
      }
      const std::vector<int> cols = problem.global_columns(*pb.block);
      for (int r = 0; r < pb.block->dim(); ++r)
      {
        for (int c = 0; c < static_cast<int>(cols.size()); ++c)
        {
          triplets->emplace_back(pb.rows[r], cols[c], e.jacobian(r, c));
        }
      }
    }
  } // namespace

  NLPProblem::NLPProblem(VariableLayout layout) : layout_(std::move(layout)) {}

  void NLPProblem::add_objective(BlockPtr block)
  {
    if (block->kind() != BlockKind::Objective)
    {
      throw std::invalid_argument("NLPProblem: objective block has constraint kind");
    }
    objectives_.push_back(std::move(block));
  }

  int NLPProblem::allocate_rows(BlockKind kind, int count)
  {
    if (kind == BlockKind::Objective || count < 0)
    {
      throw std::invalid_argument("NLPProblem: invalid row allocation");
    }
    int &counter = kind == BlockKind::Equality ? num_eq_ : num_ineq_;
    const int first = counter;
    counter += count;
    return first;
  }

  int NLPProblem::add_constraint(BlockPtr block)
  {
    const int first = allocate_rows(block->kind(), block->dim());
    std::vector<int> rows(block->dim());
    for (int i = 0; i < block->dim(); ++i)
    {
      rows[i] = first + i;
    }
    add_constraint(std::move(block), std::move(rows));
    return first;
  }

  void NLPProblem::add_constraint(BlockPtr block, std::vector<int> rows)
  {
    if (block->kind() == BlockKind::Objective)
    {
      throw std::invalid_argument("NLPProblem: constraint block has objective kind");
    }
    if (static_cast<int>(rows.size()) != block->dim())
    {
      throw std::invalid_argument("NLPProblem: row list does not match block dimension");
    }
    const int limit = block->kind() == BlockKind::Equality ? num_eq_ : num_ineq_;
    for (int r : rows)
    {
      if (r < 0 || r >= limit)
      {
        throw std::invalid_argument("NLPProblem: row outside allocated range");
      }
    }
    auto &list = block->kind() == BlockKind::Equality ? equalities_ : inequalities_;
    list.push_back(PlacedBlock{std::move(block), std::move(rows)});
  }

  std::vector<int> NLPProblem::global_columns(const Block &block) const
  {
    std::vector<int> cols;
    cols.reserve(block.local_dim());
    const auto slots = block.slots();
    for (std::size_t i = 0; i < slots.size(); ++i)
    {
      if (slots[i] < 0)
      {
        continue;
      }
      const Slot &s = layout_.slot(slots[i]);
      for (int j = 0; j < s.dim; ++j)
      {
        cols.push_back(s.tangent_offset + j);
      }
    }
    return cols;
  }

  Point NLPProblem::retract(const Point &x, const ProductTangent &d) const { return lgtraj::retract(layout_, x, d); }

  Point retract(const NLPProblem &problem, const Point &x, const ProductTangent &d) { return problem.retract(x, d); }

  Evaluation evaluate(const NLPProblem &problem, const Point &x, bool derivatives)
  {
    const int n = problem.num_variables();
    Evaluation ev;
    ev.grad_f = Eigen::VectorXd::Zero(n);
    ev.h = Eigen::VectorXd::Zero(problem.num_equalities());
    ev.g = Eigen::VectorXd::Zero(problem.num_inequalities());

    for (const auto &b : problem.objectives())
    {
      Expansion e;
      b->evaluate(x, derivatives ? EvalLevel::Gradient : EvalLevel::Value, e);
      ev.f += e.value.sum();
      if (derivatives)
      {
        const std::vector<int> cols = problem.global_columns(*b);
        const Eigen::VectorXd g = e.jacobian.colwise().sum().transpose();
        for (std::size_t c = 0; c < cols.size(); ++c)
        {
          ev.grad_f[cols[c]] += g[c];
        }
      }
    }

    std::vector<Triplet> eq_triplets, ineq_triplets;
    for (const auto &pb : problem.equalities())
    {
      add_placed_jacobian(problem, pb, x, ev.h, derivatives ? &eq_triplets : nullptr);
    }
    for (const auto &pb : problem.inequalities())
    {
      add_placed_jacobian(problem, pb, x, ev.g, derivatives ? &ineq_triplets : nullptr);
    }
    if (derivatives)
    {
      ev.A_E.resize(problem.num_equalities(), n);
      ev.A_E.setFromTriplets(eq_triplets.begin(), eq_triplets.end());
      ev.A_I.resize(problem.num_inequalities(), n);
      ev.A_I.setFromTriplets(ineq_triplets.begin(), ineq_triplets.end());
    }
    return ev;
  }

  SparseMatrix lagrangian_hessian(const NLPProblem &problem, const Point &x, const Eigen::VectorXd &y,
                                  const Eigen::VectorXd &z)
  {
    const int n = problem.num_variables();
    std::vector<Triplet> triplets;

    auto scatter = [&](const Block &block, const Eigen::MatrixXd &H)
    {
      const std::vector<int> cols = problem.global_columns(block);
      for (std::size_t i = 0; i < cols.size(); ++i)
      {
        for (std::size_t j = 0; j < cols.size(); ++j)
        {
          triplets.emplace_back(cols[i], cols[j], H(i, j));
        }
      }
    };
    auto weighted = [&](const PlacedBlock &pb, const Eigen::VectorXd &w)
    {
      Expansion e;
      pb.block->evaluate(x, EvalLevel::Hessian, e);
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(pb.block->local_dim(), pb.block->local_dim());
      for (int r = 0; r < pb.block->dim(); ++r)
      {
        H += w[pb.rows[r]] * e.hessians[r];
      }
      scatter(*pb.block, H);
    };

    for (const auto &b : problem.objectives())
    {
      Expansion e;
      b->evaluate(x, EvalLevel::Hessian, e);
      Eigen::MatrixXd H = Eigen::MatrixXd::Zero(b->local_dim(), b->local_dim());
      for (const auto &Hr : e.hessians)
      {
        H += Hr;
      }
      scatter(*b, H);
    }
    for (const auto &pb : problem.equalities())
    {
      weighted(pb, y);
    }
    for (const auto &pb : problem.inequalities())
    {
      weighted(pb, z);
    }
    SparseMatrix out(n, n);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
  }

  KKTSystem assemble(const NLPProblem &problem, const Point &x, const Eigen::VectorXd &y, const Eigen::VectorXd &z,
                     const Eigen::VectorXd &s, double mu)
  {
    if (y.size() != problem.num_equalities() || z.size() != problem.num_inequalities() || s.size() != z.size())
    {
      throw InvalidState("assemble: multiplier or slack size does not match the problem");
    }
    if (s.size() > 0 && !(s.minCoeff() > 0.0))
    {
      throw InvalidState("assemble: slack variables must be strictly positive");
    }
    KKTSystem sys;
    sys.eval = evaluate(problem, x, true);
    sys.hessian = lagrangian_hessian(problem, x, y, z);
    sys.y = y;
    sys.z = z;
    sys.s = s;
    sys.mu = mu;
    sys.r_dual = sys.eval.grad_f + sys.eval.A_E.transpose() * y + sys.eval.A_I.transpose() * z;
    sys.r_eq = sys.eval.h;
    sys.r_ineq = sys.eval.g + s;
    sys.r_comp = s.cwiseProduct(z) - Eigen::VectorXd::Constant(s.size(), mu);
    return sys;
  }

  SparseMatrix full_kkt_matrix(const KKTSystem &sys)
  {
    const int n = sys.n(), l = sys.l(), m = sys.m();
    const int N = n + l + 2 * m;
    std::vector<Triplet> t;
    auto add = [&](const SparseMatrix &A, int r0, int c0, bool transpose)
    {
      for (int k = 0; k < A.outerSize(); ++k)
      {
        for (SparseMatrix::InnerIterator it(A, k); it; ++it)
        {
          if (transpose)
          {
            t.emplace_back(r0 + static_cast<int>(it.col()), c0 + static_cast<int>(it.row()), it.value());
          }
          else
          {
            t.emplace_back(r0 + static_cast<int>(it.row()), c0 + static_cast<int>(it.col()), it.value());
          }
        }
      }
    };
    add(sys.hessian, 0, 0, false);
    add(sys.eval.A_E, 0, n, true);
    add(sys.eval.A_I, 0, n + l, true);
    add(sys.eval.A_E, n, 0, false);
    add(sys.eval.A_I, n + l, 0, false);
    for (int i = 0; i < m; ++i)
    {
      t.emplace_back(n + l + i, n + l + m + i, 1.0);
      t.emplace_back(n + l + m + i, n + l + i, sys.s[i]);
      t.emplace_back(n + l + m + i, n + l + m + i, sys.z[i]);
    }
    SparseMatrix K(N, N);
    K.setFromTriplets(t.begin(), t.end());
    return K;
  }

  namespace
  {
    Eigen::VectorXd full_rhs(const KKTSystem &sys)
    {
      Eigen::VectorXd r(sys.n() + sys.l() + 2 * sys.m());
      r << sys.r_dual, sys.r_eq, sys.r_ineq, sys.r_comp;
      return -r;
    }

    Eigen::VectorXd stack(const NewtonStep &st)
    {
      Eigen::VectorXd d(st.dx.size() + st.dy.size() + st.dz.size() + st.ds.size());
      d << st.dx, st.dy, st.dz, st.ds;
      return d;
    }
  } // namespace

  double kkt_residual(const KKTSystem &sys, const NewtonStep &step)
  {
    const SparseMatrix K = full_kkt_matrix(sys);
    const Eigen::VectorXd b = full_rhs(sys);
    const Eigen::VectorXd d = stack(step);
    const double denom = inf_norm(K) * inf_norm(d) + inf_norm(b);
    const double res = inf_norm(Eigen::VectorXd(K * d - b));
    return denom > 0.0 ? res / denom : res;
  }

  NewtonStep solve_full(const KKTSystem &sys)
  {
    const int n = sys.n(), l = sys.l(), m = sys.m();
    const SparseMatrix K = full_kkt_matrix(sys);
    Eigen::SparseLU<SparseMatrix> lu;
    lu.compute(K);
    if (lu.info() != Eigen::Success)
    {
      throw SolverError("solve_full: factorization failed: " + lu.lastErrorMessage(), 0.0,
                        trailing_index(lu.lastErrorMessage()));
    }
    const Eigen::VectorXd b = full_rhs(sys);
    Eigen::VectorXd d = lu.solve(b);
    for (int i = 0; i < 2; ++i)
    {
      d += lu.solve(Eigen::VectorXd(b - K * d));
    }
    NewtonStep st;
    st.dx = d.segment(0, n);
    st.dy = d.segment(n, l);
    st.dz = d.segment(n + l, m);
    st.ds = d.segment(n + l + m, m);
    st.residual = kkt_residual(sys, st);
    return st;
  }

  NewtonStep solve_newton(const KKTSystem &sys, const NewtonOptions &options)
  {
    const int n = sys.n(), l = sys.l(), m = sys.m();
    const SparseMatrix &AE = sys.eval.A_E;
    const SparseMatrix &AI = sys.eval.A_I;

    const Eigen::VectorXd sigma = sys.z.cwiseQuotient(sys.s);
    // dz = -z + mu/s + Sigma (g + s) + Sigma A_I dx
    const Eigen::VectorXd dz0 =
        -sys.z + Eigen::VectorXd::Constant(m, sys.mu).cwiseQuotient(sys.s) + sigma.cwiseProduct(sys.r_ineq);

    SparseMatrix W = sys.hessian;
    if (m > 0)
    {
      W += SparseMatrix(AI.transpose() * sigma.asDiagonal() * AI);
    }

    Eigen::VectorXd rhs(n + l);
    rhs.head(n) = -sys.r_dual - AI.transpose() * dz0;
    rhs.tail(l) = -sys.r_eq;

    auto build = [&](double delta)
    {
      std::vector<Triplet> t;
      t.reserve(W.nonZeros() + 2 * AE.nonZeros() + (delta > 0.0 ? n : 0));
      for (int k = 0; k < W.outerSize(); ++k)
      {
        for (SparseMatrix::InnerIterator it(W, k); it; ++it)
        {
          t.emplace_back(it.row(), it.col(), it.value());
        }
      }
      for (int k = 0; k < AE.outerSize(); ++k)
      {
        for (SparseMatrix::InnerIterator it(AE, k); it; ++it)
        {
          t.emplace_back(n + it.row(), it.col(), it.value());
          t.emplace_back(it.col(), n + it.row(), it.value());
        }
      }
      if (delta > 0.0)
      {
        for (int i = 0; i < n; ++i)
        {
          t.emplace_back(i, i, delta);
        }
      }
      SparseMatrix K(n + l, n + l);
      K.setFromTriplets(t.begin(), t.end());
      return K;
    };

    double delta = 0.0;
    int attempts = 0;
    while (true)
    {
      const SparseMatrix K = build(delta);
      Eigen::SparseLU<SparseMatrix> lu;
      lu.compute(K);
      bool ok = lu.info() == Eigen::Success;
      Eigen::VectorXd sol;
      if (ok)
      {
        sol = lu.solve(rhs);
        for (int i = 0; i < options.refinement_steps && sol.allFinite(); ++i)
        {
          sol += lu.solve(Eigen::VectorXd(rhs - K * sol));
        }
        ok = sol.allFinite();
      }
      if (ok)
      {
        NewtonStep st;
        st.dx = sol.head(n);
        st.dy = sol.tail(l);
        st.ds = -sys.r_ineq - AI * st.dx;
        st.dz = dz0 + sigma.cwiseProduct(AI * st.dx);
        st.regularization = delta;
        st.residual = kkt_residual(sys, st);
        return st;
      }
      if (!options.regularize || attempts >= options.max_regularization_attempts)
      {
        const std::string msg = lu.info() == Eigen::Success ? std::string("non-finite solution")
                                                            : lu.lastErrorMessage();
        throw SolverError("solve_newton: KKT factorization failed: " + msg, inf_norm(rhs), trailing_index(msg));
      }
      delta = delta == 0.0 ? options.delta_initial : delta * options.delta_growth;
      ++attempts;
    }
  }

  ErrorMetrics error_metrics(const Evaluation &eval, const Eigen::VectorXd &y, const Eigen::VectorXd &z,
                             const Eigen::VectorXd &s, double mu, double s_max)
  {
    const double l = static_cast<double>(y.size());
    const double m = static_cast<double>(z.size());
    ErrorMetrics e;
    const double ysum = y.lpNorm<1>();
    const double zsum = z.lpNorm<1>();
    e.s_d = l + m > 0 ? std::max(s_max, (ysum + zsum) / (l + m)) / s_max : 1.0;
    e.s_c = m > 0 ? std::max(s_max, zsum / m) / s_max : 1.0;

    Eigen::VectorXd dual = eval.grad_f;
    if (y.size() > 0)
    {
      dual += eval.A_E.transpose() * y;
    }
    if (z.size() > 0)
    {
      dual += eval.A_I.transpose() * z;
    }
    e.eps_kkt = inf_norm(dual) / e.s_d;
    e.eps_E = std::max(inf_norm(eval.h), inf_norm(Eigen::VectorXd(eval.g + s)));
    const Eigen::VectorXd sz = s.cwiseProduct(z);
    e.eps_I = inf_norm(Eigen::VectorXd(sz - Eigen::VectorXd::Constant(sz.size(), mu))) / e.s_c;
    e.eps_I0 = inf_norm(sz) / e.s_c;
    e.E_mu = std::max({e.eps_kkt, e.eps_E, e.eps_I});
    e.E_0 = std::max({e.eps_kkt, e.eps_E, e.eps_I0});
    return e;
  }

  ErrorMetrics error_metrics(const NLPProblem &problem, const Point &x, const Eigen::VectorXd &y,
                             const Eigen::VectorXd &z, const Eigen::VectorXd &s, double mu, double s_max)
  {
    return error_metrics(evaluate(problem, x, true), y, z, s, mu, s_max);
  }

} // namespace lgtraj
