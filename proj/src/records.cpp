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

#include "lgtraj/records.hpp"

#include <cstdio>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace lgtraj
{
  namespace
  {
    double parse_double(const std::string &s)
    {
      char *end = nullptr;
      const double v = std::strtod(s.c_str(), &end);
      if (end == s.c_str() || *end != '\0')
      {
        throw std::runtime_error("malformed number '" + s + "'");
      }
      return v;
    }

    long long parse_integer(const std::string &s)
    {
      std::size_t used = 0;
      const long long v = std::stoll(s, &used);
      if (used != s.size())
      {
        throw std::runtime_error("malformed integer '" + s + "'");
      }
      return v;
    }

    const char *kTraceHeader = "iter E_0 E_mu mu cost theta alpha j reason alpha_z alpha_s dual_inf eq_inf "
                               "slack_inf comp_inf comp_mu_inf s_d s_c min_s min_z boundary_ok "
                               "time_linear_algebra time_evaluation";
  } // namespace

  std::string format_double(double v)
  {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
  }

  SolverStatus parse_solver_status(const std::string &name)
  {
    for (SolverStatus s : {SolverStatus::Converged, SolverStatus::MaxIterations, SolverStatus::LineSearchFailure,
                           SolverStatus::FactorizationFailure})
    {
      if (to_string(s) == name)
      {
        return s;
      }
    }
    throw std::runtime_error("unknown solver status '" + name + "'");
  }

  AcceptReason parse_accept_reason(const std::string &name)
  {
    for (AcceptReason r :
         {AcceptReason::None, AcceptReason::Armijo, AcceptReason::CostProgress, AcceptReason::FeasibilityProgress})
    {
      if (to_string(r) == name)
      {
        return r;
      }
    }
    throw std::runtime_error("unknown accept reason '" + name + "'");
  }

  ResultRecord ResultRecord::from(const std::string &scenario, std::uint64_t seed, const SolveResult &result)
  {
    ResultRecord r;
    r.scenario = scenario;
    r.seed = seed;
    r.status = result.status;
    r.iterations = result.iterations();
    r.final_E0 = result.final_E0;
    r.cost = result.trace.empty() ? 0.0 : result.trace.back().cost;
    r.time_total = result.time_total;
    const double iters = r.iterations > 0 ? r.iterations : 1;
    r.t_per_iter_solver = (result.time_total - result.time_evaluation) / iters;
    r.t_per_iter_total = result.time_total / iters;
    return r;
  }

  std::string ResultRecord::to_line() const
  {
    std::ostringstream out;
    out << "scenario=" << scenario << " seed=" << seed << " status=" << to_string(status)
        << " iterations=" << iterations << " final_E0=" << format_double(final_E0)
        << " cost=" << format_double(cost) << " time_total=" << format_double(time_total)
        << " t_per_iter_solver=" << format_double(t_per_iter_solver)
        << " t_per_iter_total=" << format_double(t_per_iter_total);
    return out.str();
  }

  ResultRecord ResultRecord::parse_line(const std::string &line)
  {
    std::map<std::string, std::string> kv;
    std::istringstream in(line);
    std::string tok;
    while (in >> tok)
    {
      const auto eq = tok.find('=');
      if (eq == std::string::npos)
      {
        throw std::runtime_error("result record: token '" + tok + "' is not key=value");
      }
      kv[tok.substr(0, eq)] = tok.substr(eq + 1);
    }
    auto at = [&](const std::string &key) -> const std::string &
    {
      const auto it = kv.find(key);
      if (it == kv.end())
      {
        throw std::runtime_error("result record: missing '" + key + "'");
      }
      return it->second;
    };
    ResultRecord r;
    r.scenario = at("scenario");
    r.seed = static_cast<std::uint64_t>(std::stoull(at("seed")));
    r.status = parse_solver_status(at("status"));
    r.iterations = static_cast<int>(parse_integer(at("iterations")));
    r.final_E0 = parse_double(at("final_E0"));
    r.cost = parse_double(at("cost"));
    r.time_total = parse_double(at("time_total"));
    r.t_per_iter_solver = parse_double(at("t_per_iter_solver"));
    r.t_per_iter_total = parse_double(at("t_per_iter_total"));
    return r;
  }

  void write_trace(std::ostream &out, const IterationTrace &trace)
  {
    out << kTraceHeader << '\n';
    for (const IterationRecord &r : trace)
    {
      const auto f = format_double;
      out << r.iter << ' ' << f(r.E_0) << ' ' << f(r.E_mu) << ' ' << f(r.mu) << ' ' << f(r.cost) << ' '
          << f(r.theta) << ' ' << f(r.alpha) << ' ' << r.j << ' ' << to_string(r.reason) << ' ' << f(r.alpha_z)
          << ' ' << f(r.alpha_s) << ' ' << f(r.dual_inf) << ' ' << f(r.eq_inf) << ' ' << f(r.slack_inf) << ' '
          << f(r.comp_inf) << ' ' << f(r.comp_mu_inf) << ' ' << f(r.s_d) << ' ' << f(r.s_c) << ' '
          << f(r.min_s) << ' ' << f(r.min_z) << ' ' << (r.boundary_ok ? 1 : 0) << ' '
          << f(r.time_linear_algebra) << ' ' << f(r.time_evaluation) << '\n';
    }
  }

  IterationTrace read_trace(std::istream &in)
  {
    IterationTrace trace;
    std::string line;
    if (!std::getline(in, line) || line != kTraceHeader)
    {
      throw std::runtime_error("trace: missing or unexpected header");
    }
    int line_no = 1;
    while (std::getline(in, line))
    {
      ++line_no;
      if (line.empty())
      {
        continue;
      }
      std::istringstream ss(line);
      std::vector<std::string> t;
      std::string tok;
      while (ss >> tok)
      {
        t.push_back(tok);
      }
      if (t.size() != 23)
      {
        throw std::runtime_error("trace line " + std::to_string(line_no) + ": expected 23 fields");
      }
      IterationRecord r;
      r.iter = static_cast<int>(parse_integer(t[0]));
      r.E_0 = parse_double(t[1]);
      r.E_mu = parse_double(t[2]);
      r.mu = parse_double(t[3]);
      r.cost = parse_double(t[4]);
      r.theta = parse_double(t[5]);
      r.alpha = parse_double(t[6]);
      r.j = static_cast<int>(parse_integer(t[7]));
      r.reason = parse_accept_reason(t[8]);
      r.alpha_z = parse_double(t[9]);
      r.alpha_s = parse_double(t[10]);
      r.dual_inf = parse_double(t[11]);
      r.eq_inf = parse_double(t[12]);
      r.slack_inf = parse_double(t[13]);
      r.comp_inf = parse_double(t[14]);
      r.comp_mu_inf = parse_double(t[15]);
      r.s_d = parse_double(t[16]);
      r.s_c = parse_double(t[17]);
      r.min_s = parse_double(t[18]);
      r.min_z = parse_double(t[19]);
      r.boundary_ok = parse_integer(t[20]) != 0;
      r.time_linear_algebra = parse_double(t[21]);
      r.time_evaluation = parse_double(t[22]);
      trace.push_back(r);
    }
    return trace;
  }

  void write_sweep_csv(std::ostream &out, const std::vector<SeedResult> &runs)
  {
    out << "seed,status,iters,E_0_final,t_per_iter_solver,t_per_iter_total\n";
    for (const SeedResult &r : runs)
    {
      out << r.seed << ',' << to_string(r.status) << ',' << r.iterations << ',' << format_double(r.final_E0) << ','
          << format_double(r.t_per_iter_solver) << ',' << format_double(r.t_per_iter_total) << '\n';
    }
  }

  void write_bench_csv(std::ostream &out, const std::vector<ChainTiming> &rows)
  {
    out << "depth,t_residual,t_gradient,t_hessian\n";
    for (const ChainTiming &r : rows)
    {
      out << r.depth << ',' << format_double(r.t_residual) << ',' << format_double(r.t_gradient) << ','
          << format_double(r.t_hessian) << '\n';
    }
  }

} // namespace lgtraj
