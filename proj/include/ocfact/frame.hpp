#pragma once

#include <memory>
#include <set>
#include <string>
#include <vector>

#include "ocfact/errors.hpp"

namespace ocfact {

enum class Role { State, Costate, Control };

// ordered symbol list; the declaration order fixes the normal-form variable
// order and the component order of points, fields and one-forms
struct CoordinateFrame {
  std::vector<std::string> names;
  std::vector<Role> roles;

  CoordinateFrame(std::vector<std::string> n, std::vector<Role> r)
      : names(std::move(n)), roles(std::move(r)) {
    if (names.size() != roles.size()) throw Error("frame names/roles size mismatch");
    std::set<std::string> seen;
    for (const auto& s : names)
      if (!seen.insert(s).second) throw Error("duplicate symbol '" + s + "' in frame");
  }

  std::size_t size() const { return names.size(); }

  int index_of(const std::string& name) const {
    for (std::size_t i = 0; i < names.size(); ++i)
      if (names[i] == name) return (int)i;
    return -1;
  }

  std::vector<int> indices_with(Role r) const {
    std::vector<int> out;
    for (std::size_t i = 0; i < roles.size(); ++i)
      if (roles[i] == r) out.push_back((int)i);
    return out;
  }

  // (costate, state) index pairs, same order as declared states
  std::vector<std::pair<int, int>> conjugate_pairs() const {
    auto ps = indices_with(Role::Costate), qs = indices_with(Role::State);
    if (ps.size() != qs.size() || ps.empty())
      throw Error("frame has no costate/state pairing");
    std::vector<std::pair<int, int>> out;
    for (std::size_t i = 0; i < ps.size(); ++i) out.emplace_back(ps[i], qs[i]);
    return out;
  }
};

using FramePtr = std::shared_ptr<const CoordinateFrame>;

inline bool same_frame(const FramePtr& a, const FramePtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->names == b->names && a->roles == b->roles;
}

inline std::vector<std::string> indexed_names(const std::string& stem, std::size_t n) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= n; ++i) out.push_back(stem + std::to_string(i));
  return out;
}

// costates are named after the stem: p1..pn for a primary system, x1..xnu
// for a factor system
inline std::vector<std::string> costate_names(std::size_t n, const std::string& stem = "p") {
  return indexed_names(stem, n);
}

// (p1..pn, q1..qn)
inline FramePtr canonical_frame(const std::vector<std::string>& states,
                                const std::string& costate_stem = "p") {
  std::vector<std::string> names = costate_names(states.size(), costate_stem);
  std::vector<Role> roles(states.size(), Role::Costate);
  for (const auto& s : states) {
    names.push_back(s);
    roles.push_back(Role::State);
  }
  return std::make_shared<CoordinateFrame>(std::move(names), std::move(roles));
}

// (q1..qn, u1..um)
inline FramePtr lagrangian_frame(const std::vector<std::string>& states,
                                 const std::vector<std::string>& controls) {
  std::vector<std::string> names = states;
  std::vector<Role> roles(states.size(), Role::State);
  for (const auto& u : controls) {
    names.push_back(u);
    roles.push_back(Role::Control);
  }
  return std::make_shared<CoordinateFrame>(std::move(names), std::move(roles));
}

// (p1..pn, q1..qn, u1..um), used while the synthesis is still unresolved
inline FramePtr joint_frame(const std::vector<std::string>& states,
                            const std::vector<std::string>& controls,
                            const std::string& costate_stem = "p") {
  std::vector<std::string> names = costate_names(states.size(), costate_stem);
  std::vector<Role> roles(states.size(), Role::Costate);
  for (const auto& s : states) {
    names.push_back(s);
    roles.push_back(Role::State);
  }
  for (const auto& u : controls) {
    names.push_back(u);
    roles.push_back(Role::Control);
  }
  return std::make_shared<CoordinateFrame>(std::move(names), std::move(roles));
}

// (x1..xnu, y1..ynu)
inline FramePtr factor_canonical_frame(std::size_t nu) {
  return canonical_frame(indexed_names("y", nu), "x");
}

// (y1..ynu, v1..vmu)
inline FramePtr factor_lagrangian_frame(std::size_t nu, std::size_t mu) {
  return lagrangian_frame(indexed_names("y", nu), indexed_names("v", mu));
}

}  // namespace ocfact
