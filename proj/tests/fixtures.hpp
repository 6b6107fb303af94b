#pragma once

// control systems and reduction candidates shared across the test binaries

#include <string>
#include <vector>

#include "ocfact/factorization.hpp"

namespace fixtures {

using namespace ocfact;

inline bool identical(const Expr& a, const Expr& b) {
  return a.nf().num == b.nf().num && a.nf().den == b.nf().den;
}

inline LagrangianSystem make_system(const std::string& name, std::vector<std::string> states,
                                    std::vector<std::string> controls,
                                    const std::vector<std::string>& dyn, const std::string& cost,
                                    std::vector<std::string> charts = {}) {
  LagrangianSystem sys;
  sys.name = name;
  sys.states = std::move(states);
  sys.controls = std::move(controls);
  sys.frame = lagrangian_frame(sys.states, sys.controls);
  for (const auto& t : dyn) sys.dynamics.push_back(parse_expression(t, sys.frame));
  sys.cost = parse_expression(cost, sys.frame);
  sys.charts = std::move(charts);
  return sys;
}

inline LagrangianSystem bilinear_cost_system() {
  return make_system("bilinear", {"q1", "q2"}, {"u1", "u2"}, {"u1", "u2"},
                     "q1*u1*u2 + q1*q2", {"q1"});
}

inline LagrangianSystem coupled_quadratic_system() {
  return make_system("coupled", {"q1", "q2"}, {"u1"}, {"q2 - u1", "q1 + u1"},
                     "q1*q2 + (1/2)*u1^2");
}

inline LagrangianSystem cascade_system() {
  return make_system("cascade", {"q1", "q2", "q3"}, {"u1", "u2", "u3"},
                     {"u1", "q1 + u2 + u3", "q2 - u2 + u3"},
                     "(1/2)*u2^2 - u1*u3 - (1/4)*q1^2 - (1/4)*q3^2");
}

inline LagrangianSystem double_chain_system() {
  return make_system("chain", {"q1", "q2"}, {"u1", "u2"}, {"u1", "u2"}, "u1*u2 + q2");
}

// factor system on (y, v) with costates x1..xnu
inline LagrangianSystem make_factor(std::size_t nu, std::size_t mu,
                                    const std::vector<std::string>& dyn, const std::string& cost,
                                    std::vector<std::string> charts = {}) {
  LagrangianSystem sys;
  sys.name = "factor";
  sys.states = indexed_names("y", nu);
  sys.controls = indexed_names("v", mu);
  sys.frame = factor_lagrangian_frame(nu, mu);
  sys.costate_stem = "x";
  for (const auto& t : dyn) sys.dynamics.push_back(parse_expression(t, sys.frame));
  sys.cost = parse_expression(cost, sys.frame);
  sys.charts = std::move(charts);
  return sys;
}

inline FactorizationCandidate candidate(const HamiltonianSystem& hs, const std::string& name,
                                        const std::vector<std::string>& xs,
                                        const std::vector<std::string>& ys,
                                        const std::string& qtilde = "") {
  FactorizationCandidate c;
  c.name = name;
  for (const auto& t : xs) c.x.push_back(parse_expression(t, hs.frame));
  for (const auto& t : ys) c.y.push_back(parse_expression(t, hs.frame));
  if (!qtilde.empty()) c.qtilde = parse_expression(qtilde, hs.frame);
  return c;
}

// reduction of the bilinear cost system to a scalar double integrator with a
// power-law potential
inline FactorizationCandidate momentum_square_candidate(const HamiltonianSystem& hs) {
  auto c = candidate(hs, "momentum_square", {"2*p2"}, {"q1^2"}, "2*p2^2 + (4/3)*q1^3");
  c.declared = make_factor(1, 1, {"v1"}, "(1/2)*v1^2 + (4/3)*y1^(3/2)", {"y1"});
  return c;
}

// reduction of the coupled quadratic system along the control direction
inline FactorizationCandidate difference_mode_candidate(const HamiltonianSystem& hs) {
  auto c = candidate(hs, "difference_mode", {"q1 - q2 + p2 - p1"}, {"p2 - p1"});
  c.declared = make_factor(1, 1, {"v1"}, "(1/2)*(v1^2 - y1^2)");
  return c;
}

// same map with a cost correction that misses the factorization equation
inline FactorizationCandidate offcost_candidate(const HamiltonianSystem& hs) {
  return candidate(hs, "offcost", {"q1 - q2 + p2 - p1"}, {"p2 - p1"},
                   "(1/2)*(q1 - q2 + p2 - p1)^2 - (p2 - p1)^2");
}

// claimed two-dimensional block of the cascade system
inline FactorizationCandidate symmetric_block_candidate(const HamiltonianSystem& hs) {
  auto c = candidate(hs, "symmetric_block", {"p1", "(1/2)*(q2 + q3)"}, {"q1", "-p2 - p3"});
  c.declared = make_factor(2, 1, {"y2", "v1"}, "y1*y2 + (1/2)*v1^2");
  return c;
}

// claimed one-dimensional block built from the difference coordinates
inline FactorizationCandidate antisymmetric_block_candidate(const HamiltonianSystem& hs) {
  auto c = candidate(hs, "antisymmetric_block", {"(1/2)*(q2 - q3)"}, {"p3 - p2"});
  c.declared = make_factor(1, 1, {"v1"}, "(1/2)*(v1^2 - y1^2)");
  return c;
}

// reduction of the double chain onto a single free particle
inline FactorizationCandidate momentum_product_candidate(const HamiltonianSystem& hs) {
  auto c = candidate(hs, "momentum_product", {"p1"}, {"p1*p2"});
  c.declared = make_factor(1, 1, {"v1"}, "(1/2)*v1^2");
  return c;
}

// identity map; the factor system is the original one and the cost
// correction is the running cost along the synthesis
inline FactorizationCandidate identity_candidate(const HamiltonianSystem& hs,
                                                 const std::string& qtilde,
                                                 LagrangianSystem declared) {
  FactorizationCandidate c;
  c.name = "identity";
  auto pairs = hs.frame->conjugate_pairs();
  for (const auto& [pi, qi] : pairs) {
    c.x.push_back(Expr::variable(hs.frame, pi));
    c.y.push_back(Expr::variable(hs.frame, qi));
  }
  c.qtilde = parse_expression(qtilde, hs.frame);
  c.declared = std::move(declared);
  return c;
}

inline FactorizationCandidate bilinear_identity(const HamiltonianSystem& hs) {
  return identity_candidate(hs, "p1*p2/q1 + q1*q2",
                            make_factor(2, 2, {"v1", "v2"}, "y1*v1*v2 + y1*y2", {"y1"}));
}

inline FactorizationCandidate coupled_identity(const HamiltonianSystem& hs) {
  return identity_candidate(hs, "q1*q2 + (1/2)*(p2 - p1)^2",
                            make_factor(2, 1, {"y2 - v1", "y1 + v1"}, "y1*y2 + (1/2)*v1^2"));
}

inline FactorizationCandidate cascade_identity(const HamiltonianSystem& hs) {
  return identity_candidate(
      hs, "(1/2)*(p2 - p3)^2 - p1*p2 - p1*p3 - (1/4)*q1^2 - (1/4)*q3^2",
      make_factor(3, 3, {"v1", "y1 + v2 + v3", "y2 - v2 + v3"},
                  "(1/2)*v2^2 - v1*v3 - (1/4)*y1^2 - (1/4)*y3^2"));
}

inline FactorizationCandidate chain_identity(const HamiltonianSystem& hs) {
  return identity_candidate(hs, "p1*p2 + q2",
                            make_factor(2, 2, {"v1", "v2"}, "v1*v2 + y2"));
}

}  // namespace fixtures
