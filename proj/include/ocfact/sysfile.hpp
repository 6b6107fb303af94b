#pragma once

#include <algorithm>
#include <fstream>
#include <map>
#include <regex>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "factorization.hpp"
#include "parser.hpp"

namespace ocfact {

// text form of a control system plus reduction candidates:
//
//   system <name>
//   states q1 q2
//   controls u1 u2
//   dyn q1' = <expr in states and controls>
//   cost <expr in states and controls>
//   chart <expr in states> > 0
//   candidate <name>
//   x1 = <expr in costates and states>
//   y1 = <expr in costates and states>
//   qtilde = <expr in costates and states>
//   factor dyn y1' = <expr in y* and v*>
//   factor cost <expr in y* and v*>
//   factor chart <expr in y*> > 0
//
// qtilde and the factor block are optional, '#' starts a comment.
struct SystemFile {
  LagrangianSystem system;
  std::vector<FactorizationCandidate> candidates;
};

namespace sysfile_detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

inline std::string strip_positivity(const std::string& s) {
  static const std::regex tail("\\s*>\\s*0\\s*$");
  return trim(std::regex_replace(s, tail, ""));
}

using Src = std::pair<int, std::string>;

struct CandText {
  std::string name;
  int line = 0;
  std::map<int, Src> xs, ys, fdyn;
  std::optional<Src> qtilde, fcost;
  std::vector<Src> fcharts;
};

}  // namespace sysfile_detail

inline SystemFile parse_system_file(const std::string& text) {
  using namespace sysfile_detail;
  std::istringstream in(text);
  std::string raw;
  int lineno = 0;
  auto fail = [&](const std::string& msg) -> void {
    if (lineno > 0) throw SyntaxError("line " + std::to_string(lineno) + ": " + msg);
    throw SyntaxError(msg);
  };

  LagrangianSystem sys;
  bool have_system = false, have_states = false, have_cost = false;
  int states_line = 0;
  std::map<std::string, Src> dyn_texts;
  Src cost_text;
  std::vector<Src> chart_texts;
  std::vector<CandText> cands;
  CandText* cur = nullptr;

  static const std::regex xy_line("^([xy])([0-9]+)\\s*=\\s*(.+)$");
  static const std::regex dyn_line("^([A-Za-z_][A-Za-z0-9_]*)'\\s*=\\s*(.+)$");
  std::smatch m;

  while (std::getline(in, raw)) {
    ++lineno;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
    line = trim(line);
    if (line.empty()) continue;

    std::string head = line.substr(0, line.find_first_of(" \t"));
    std::string rest = trim(line.substr(head.size()));

    if (head == "system") {
      if (have_system) fail("duplicate system line");
      if (split_ws(rest).size() != 1) fail("system needs exactly one name");
      sys.name = rest;
      have_system = true;
    } else if (head == "states") {
      if (!have_system) fail("states before system");
      if (have_states) fail("duplicate states line");
      sys.states = split_ws(rest);
      have_states = true;
      states_line = lineno;
    } else if (head == "controls") {
      if (!have_states) fail("controls before states");
      if (!sys.controls.empty()) fail("duplicate controls line");
      sys.controls = split_ws(rest);
      if (sys.controls.empty()) fail("controls line lists no names");
    } else if (head == "dyn") {
      if (cur) fail("dyn after a candidate block");
      if (!have_states) fail("dyn before states");
      if (!std::regex_match(rest, m, dyn_line)) fail("expected dyn <state>' = <expr>");
      if (dyn_texts.count(m[1])) fail("duplicate dynamics for " + m[1].str());
      dyn_texts.emplace(m[1], Src{lineno, trim(m[2])});
    } else if (head == "cost") {
      if (cur) fail("cost after a candidate block");
      if (have_cost) fail("duplicate cost line");
      cost_text = {lineno, rest};
      have_cost = true;
    } else if (head == "chart") {
      if (cur) fail("chart after a candidate block");
      chart_texts.push_back({lineno, strip_positivity(rest)});
    } else if (head == "candidate") {
      if (split_ws(rest).size() != 1) fail("candidate needs exactly one name");
      for (const auto& c : cands)
        if (c.name == rest) fail("duplicate candidate " + rest);
      cands.push_back({});
      cur = &cands.back();
      cur->name = rest;
      cur->line = lineno;
    } else if (head == "qtilde") {
      if (!cur) fail("qtilde outside a candidate block");
      if (cur->qtilde) fail("duplicate qtilde");
      if (rest.size() < 2 || rest[0] != '=') fail("expected qtilde = <expr>");
      cur->qtilde = Src{lineno, trim(rest.substr(1))};
    } else if (head == "factor") {
      if (!cur) fail("factor outside a candidate block");
      std::string sub = rest.substr(0, rest.find_first_of(" \t"));
      std::string body = trim(rest.substr(sub.size()));
      if (sub == "dyn") {
        if (!std::regex_match(body, m, dyn_line)) fail("expected factor dyn y<k>' = <expr>");
        std::string lhs = m[1];
        if (!std::regex_match(lhs, std::regex("^y[0-9]+$")))
          fail("factor state must be one of the y names");
        int k = std::stoi(lhs.substr(1));
        if (cur->fdyn.count(k)) fail("duplicate factor dynamics for " + lhs);
        cur->fdyn.emplace(k, Src{lineno, trim(m[2])});
      } else if (sub == "cost") {
        if (cur->fcost) fail("duplicate factor cost");
        cur->fcost = Src{lineno, body};
      } else if (sub == "chart") {
        cur->fcharts.push_back({lineno, strip_positivity(body)});
      } else {
        fail("unknown factor directive '" + sub + "'");
      }
    } else if (std::regex_match(line, m, xy_line)) {
      if (!cur) fail("map component outside a candidate block");
      auto& side = m[1] == "x" ? cur->xs : cur->ys;
      int k = std::stoi(m[2]);
      if (side.count(k)) fail("duplicate component " + m[1].str() + m[2].str());
      side.emplace(k, Src{lineno, trim(m[3])});
    } else {
      fail("unknown directive '" + head + "'");
    }
  }

  lineno = 0;
  if (!have_system) fail("missing system line");
  if (!have_states || sys.states.empty()) fail("missing states");
  if (!have_cost) fail("missing cost");

  static const std::regex ident("^[A-Za-z_][A-Za-z0-9_]*$");
  static const std::regex generated("^[pxyv][0-9]+$");
  auto check_name = [&](const std::string& n, const std::string& kind) {
    if (!std::regex_match(n, ident)) fail("bad " + kind + " name '" + n + "'");
    if (std::regex_match(n, generated))
      fail(kind + " name '" + n + "' is reserved for generated frames");
  };
  lineno = states_line;
  std::set<std::string> seen;
  for (const auto& n : sys.states) {
    check_name(n, "state");
    if (!seen.insert(n).second) fail("duplicate name '" + n + "'");
  }
  for (const auto& n : sys.controls) {
    check_name(n, "control");
    if (!seen.insert(n).second) fail("duplicate name '" + n + "'");
  }

  for (const auto& [n, src] : dyn_texts)
    if (std::find(sys.states.begin(), sys.states.end(), n) == sys.states.end()) {
      lineno = src.first;
      fail("dynamics for undeclared state " + n);
    }
  for (const auto& n : sys.states)
    if (!dyn_texts.count(n)) fail("missing dynamics for state " + n);

  auto parse_at = [](const Src& s, const FramePtr& f) -> Expr {
    try {
      return parse_expression(s.second, f);
    } catch (const Error& e) {
      throw SyntaxError("line " + std::to_string(s.first) + ": " + e.what());
    }
  };

  sys.frame = lagrangian_frame(sys.states, sys.controls);
  for (const auto& n : sys.states) sys.dynamics.push_back(parse_at(dyn_texts.at(n), sys.frame));
  sys.cost = parse_at(cost_text, sys.frame);

  const std::size_t n = sys.states.size();
  FramePtr canon = canonical_frame(sys.states);
  for (const auto& src : chart_texts) {
    Expr c = parse_at(src, canon);
    for (std::size_t i = 0; i < n; ++i)
      if (c.contains((int)i))
        throw SyntaxError("line " + std::to_string(src.first) + ": chart may only involve states");
    sys.charts.push_back(src.second);
  }

  SystemFile out;
  static const std::regex vtok("\\bv([0-9]+)\\b");
  for (const auto& c : cands) {
    lineno = c.line;
    if (c.xs.empty()) fail("candidate " + c.name + " has no map components");
    const std::size_t nu = c.xs.size();
    if (c.ys.size() != nu) fail("candidate " + c.name + " has unequal x and y counts");
    if (nu > n) fail("candidate " + c.name + " has more pairs than the system has states");
    for (std::size_t k = 1; k <= nu; ++k) {
      if (!c.xs.count((int)k)) fail("candidate " + c.name + " is missing x" + std::to_string(k));
      if (!c.ys.count((int)k)) fail("candidate " + c.name + " is missing y" + std::to_string(k));
    }

    FactorizationCandidate cand;
    cand.name = c.name;
    for (std::size_t k = 1; k <= nu; ++k) {
      cand.x.push_back(parse_at(c.xs.at((int)k), canon));
      cand.y.push_back(parse_at(c.ys.at((int)k), canon));
    }
    if (c.qtilde) cand.qtilde = parse_at(*c.qtilde, canon);

    if (!c.fdyn.empty() || c.fcost || !c.fcharts.empty()) {
      if (!c.fcost) fail("candidate " + c.name + " declares factor dynamics without a cost");
      for (std::size_t k = 1; k <= nu; ++k)
        if (!c.fdyn.count((int)k))
          fail("candidate " + c.name + " is missing factor dynamics for y" + std::to_string(k));
      if (c.fdyn.size() != nu) fail("factor dynamics outside y1..y" + std::to_string(nu));

      std::size_t mu = 0;
      auto scan = [&](const std::string& s) {
        for (auto it = std::sregex_iterator(s.begin(), s.end(), vtok);
             it != std::sregex_iterator(); ++it)
          mu = std::max(mu, (std::size_t)std::stoi((*it)[1]));
      };
      for (const auto& [k, src] : c.fdyn) scan(src.second);
      scan(c.fcost->second);

      LagrangianSystem fac;
      fac.name = c.name + "_factor";
      fac.states = indexed_names("y", nu);
      fac.controls = indexed_names("v", mu);
      fac.frame = factor_lagrangian_frame(nu, mu);
      fac.costate_stem = "x";
      for (std::size_t k = 1; k <= nu; ++k)
        fac.dynamics.push_back(parse_at(c.fdyn.at((int)k), fac.frame));
      fac.cost = parse_at(*c.fcost, fac.frame);
      FramePtr fcanon = factor_canonical_frame(nu);
      for (const auto& src : c.fcharts) {
        Expr fc = parse_at(src, fcanon);
        for (std::size_t i = 0; i < nu; ++i)
          if (fc.contains((int)i))
            throw SyntaxError("line " + std::to_string(src.first) +
                              ": factor chart may only involve the y names");
        fac.charts.push_back(src.second);
      }
      cand.declared = std::move(fac);
    }
    out.candidates.push_back(std::move(cand));
  }
  out.system = std::move(sys);
  return out;
}

inline SystemFile load_system_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_system_file(buf.str());
}

inline const FactorizationCandidate& find_candidate(const SystemFile& file,
                                                    const std::string& name) {
  auto list = [&file] {
    std::string s;
    for (const auto& c : file.candidates) s += (s.empty() ? "" : ", ") + c.name;
    return s.empty() ? "none" : s;
  };
  if (name.empty()) {
    if (file.candidates.size() == 1) return file.candidates.front();
    throw Error(file.candidates.empty()
                    ? "file declares no candidates"
                    : "several candidates, pick one of: " + list());
  }
  for (const auto& c : file.candidates)
    if (c.name == name) return c;
  throw Error("no candidate named " + name + "; file has: " + list());
}

}  // namespace ocfact
