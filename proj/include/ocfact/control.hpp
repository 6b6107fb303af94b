#pragma once

// Smooth unconstrained control systems and their Hamiltonian forms. The
// costate vector is scaled so the cost multiplier is one; control values
// are recovered from the stationarity system, which must be affine in the
// controls (otherwise the synthesis has to come from the caller).

#include <optional>
#include <string>
#include <vector>

#include "ocfact/parser.hpp"
#include "ocfact/symplectic.hpp"

namespace ocfact {

struct LagrangianSystem {
  std::string name;
  std::vector<std::string> states, controls;
  FramePtr frame;              // (q, u)
  std::vector<Expr> dynamics;  // state derivatives, one per state, on frame
  Expr cost;                   // running cost on frame
  std::vector<std::string> charts;   // each expression is required positive
  std::string costate_stem = "p";    // factor systems pair y with x

  std::vector<Expr> charts_on(const FramePtr& f) const {
    std::vector<Expr> out;
    out.reserve(charts.size());
    for (const auto& c : charts) out.push_back(parse_expression(c, f));
    return out;
  }
};

struct PontryaginData {
  FramePtr joint;                  // (p, q, u)
  Expr hfun;                       // sum p_i f^i - L
  std::vector<Expr> stationarity;  // d hfun / d u_j
};

struct HamiltonianSystem {
  std::string name;
  std::vector<std::string> states, controls;
  FramePtr frame;               // (p, q)
  Expr h;                       // hfun restricted to the synthesis
  std::vector<Expr> synthesis;  // optimal control values on frame
  std::vector<std::string> charts;

  std::vector<Expr> charts_on(const FramePtr& f) const {
    std::vector<Expr> out;
    out.reserve(charts.size());
    for (const auto& c : charts) out.push_back(parse_expression(c, f));
    return out;
  }
  std::vector<Expr> chart_exprs() const { return charts_on(frame); }
};

inline PontryaginData pontryagin_function(const LagrangianSystem& sys) {
  if (sys.dynamics.size() != sys.states.size())
    throw Error("system needs one dynamics component per state");
  FramePtr joint = joint_frame(sys.states, sys.controls, sys.costate_stem);
  Expr hfun = Expr::zero(joint);
  for (std::size_t i = 0; i < sys.states.size(); ++i) {
    Expr p = Expr::variable(joint, sys.costate_stem + std::to_string(i + 1));
    hfun = hfun + p * substitute(sys.dynamics[i], joint, {});
  }
  hfun = hfun - substitute(sys.cost, joint, {});
  PontryaginData data{joint, hfun, {}};
  for (const auto& u : sys.controls) data.stationarity.push_back(hfun.differentiate(u));
  return data;
}

// control values solving the stationarity system, expressed on (p, q)
inline std::vector<Expr> solve_synthesis(const LagrangianSystem& sys,
                                         const PontryaginData& data) {
  std::vector<int> us;
  for (const auto& u : sys.controls) us.push_back(data.joint->index_of(u));
  std::vector<Expr> joint_sol =
      solve_linear(data.stationarity, us, sys.charts_on(data.joint));
  FramePtr canon = canonical_frame(sys.states, sys.costate_stem);
  std::vector<Expr> out;
  out.reserve(joint_sol.size());
  for (const auto& e : joint_sol) out.push_back(substitute(e, canon, {}));
  return out;
}

struct NondegeneracyReport {
  int control_rank = 0;
  std::size_t control_count = 0, state_count = 0;
  std::vector<Verdict> stationarity_at_synthesis;
  bool more_controls_than_states = false;

  bool ok() const {
    if (control_rank != (int)control_count) return false;
    for (const auto& v : stationarity_at_synthesis)
      if (v.truth == Truth::No) return false;
    return true;
  }
};

inline NondegeneracyReport check_nondegenerate(const LagrangianSystem& sys,
                                               const PontryaginData& data,
                                               const std::vector<Expr>& synthesis) {
  NondegeneracyReport report;
  report.control_count = sys.controls.size();
  report.state_count = sys.states.size();
  report.more_controls_than_states = sys.controls.size() > sys.states.size();

  std::vector<int> us;
  for (const auto& u : sys.controls) us.push_back(sys.frame->index_of(u));
  SamplePlan plan = default_plan(sys.frame, sys.charts_on(sys.frame));
  report.control_rank = jacobian_rank(sys.dynamics, us, sample_points(plan));

  FramePtr canon = canonical_frame(sys.states, sys.costate_stem);
  std::map<std::string, Expr> at;
  for (std::size_t j = 0; j < sys.controls.size(); ++j) at.emplace(sys.controls[j], synthesis[j]);
  auto canon_charts = sys.charts_on(canon);
  for (const auto& s : data.stationarity)
    report.stationarity_at_synthesis.push_back(
        is_zero(substitute(s, canon, at), canon_charts));
  return report;
}

inline HamiltonianSystem hamiltonianize(const LagrangianSystem& sys) {
  PontryaginData data = pontryagin_function(sys);
  std::vector<Expr> synthesis = solve_synthesis(sys, data);
  FramePtr canon = canonical_frame(sys.states, sys.costate_stem);
  std::map<std::string, Expr> at;
  for (std::size_t j = 0; j < sys.controls.size(); ++j) at.emplace(sys.controls[j], synthesis[j]);
  HamiltonianSystem hs;
  hs.name = sys.name;
  hs.states = sys.states;
  hs.controls = sys.controls;
  hs.frame = canon;
  hs.h = substitute(data.hfun, canon, at);
  hs.synthesis = std::move(synthesis);
  hs.charts = sys.charts;
  return hs;
}

// field components in frame order: p_i' = -dH/dq^i, q^i' = dH/dp_i
inline std::vector<Expr> canonical_equations(const HamiltonianSystem& hs) {
  return hamiltonian_field(hs.h);
}

struct RegularityReport {
  int rank = 0;        // rank of the iterated-derivative family at the point
  int depth_used = 0;  // derivative order at which the rank stopped growing
};

// the point must not be an equilibrium, and the rank of the family
// {state, its iterated flow derivatives} must stabilize and stay constant
// near the point
inline RegularityReport check_regularity(const HamiltonianSystem& hs,
                                         const std::vector<double>& point, int depth = -1) {
  const std::size_t n2 = hs.frame->size();
  if (depth < 0) depth = (int)n2;
  auto field = canonical_equations(hs);
  double norm = 0;
  for (const auto& f : field) norm += std::abs(f.evaluate(point));
  if (norm < 1e-9) throw SingularPoint("the canonical field vanishes at the point");

  std::vector<int> all_vars(n2);
  for (std::size_t i = 0; i < n2; ++i) all_vars[i] = (int)i;

  std::vector<Expr> fns;
  std::vector<Expr> layer;
  for (std::size_t i = n2 / 2; i < n2; ++i) layer.push_back(Expr::variable(hs.frame, (int)i));
  fns = layer;
  int prev_rank = rank_at_point(fns, all_vars, point);
  int rank = prev_rank, depth_used = 0;
  for (int s = 1; s <= depth; ++s) {
    for (auto& f : layer) f = lie_derivative_fn(f, hs.h);
    fns.insert(fns.end(), layer.begin(), layer.end());
    rank = rank_at_point(fns, all_vars, point);
    depth_used = s;
    if (rank == prev_rank) break;
    prev_rank = rank;
  }
  if (rank != prev_rank) throw RankUnstable(prev_rank, rank);

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> bump(-1e-3, 1e-3);
  int checked = 0, attempts = 0;
  while (checked < 10 && attempts < 1000) {
    ++attempts;
    std::vector<double> nearby = point;
    for (auto& c : nearby) c += bump(rng);
    int r;
    try {
      r = rank_at_point(fns, all_vars, nearby);
    } catch (const EvalDomainError&) {
      continue;
    }
    if (r != rank) throw RankUnstable(rank, r);
    ++checked;
  }
  if (checked < 10)
    throw SingularPoint("the iterated-derivative family is undefined near the point");
  return RegularityReport{rank, depth_used};
}

}  // namespace ocfact
