#pragma once

#include <algorithm>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "integrate.hpp"
#include "sysfile.hpp"

namespace ocfact {

// exit codes: 0 verdict holds, 1 verdict refuted or computation impossible,
// 2 usage or file problems, 3 inconclusive
namespace cli_detail {

using nlohmann::json;

inline const char* truth_word(Truth t) {
  switch (t) {
    case Truth::Yes: return "yes";
    case Truth::No: return "no";
    default: return "unknown";
  }
}

inline std::string join(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& w : v) s += (s.empty() ? "" : " ") + w;
  return s;
}

inline json point_json(const std::vector<double>& p) {
  json a = json::array();
  for (double c : p) a.push_back(c);
  return a;
}

inline json exprs_json(const std::vector<Expr>& v) {
  json a = json::array();
  for (const auto& e : v) a.push_back(e.str());
  return a;
}

struct Opts {
  std::string file, candidate, init;
  VerifyOptions vo;
  int fibers = 20;
  bool json_out = false;
  bool dump = false;
  bool rename = false;
};

inline int load(const Opts& o, SystemFile& sf, std::ostream& err) {
  try {
    sf = load_system_file(o.file);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

inline int lift(const SystemFile& sf, HamiltonianSystem& hs, std::ostream& err) {
  try {
    hs = hamiltonianize(sf.system);
  } catch (const Error& e) {
    err << "cannot build the Hamiltonian form: " << e.what() << "\n";
    return 1;
  }
  return 0;
}

inline int pick(const SystemFile& sf, const std::string& name,
                const FactorizationCandidate*& cand, std::ostream& err) {
  try {
    cand = &find_candidate(sf, name);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

inline int cmd_parse(const Opts& o, std::ostream& out, std::ostream& err) {
  SystemFile sf;
  if (int rc = load(o, sf, err)) return rc;
  const auto& sys = sf.system;

  std::optional<HamiltonianSystem> hs;
  std::string lift_note;
  try {
    hs = hamiltonianize(sys);
  } catch (const Error& e) {
    lift_note = e.what();
  }

  if (o.json_out) {
    json j;
    j["system"] = {{"name", sys.name},
                   {"states", sys.states},
                   {"controls", sys.controls},
                   {"cost", sys.cost.str()},
                   {"charts", sys.charts}};
    j["system"]["dynamics"] = exprs_json(sys.dynamics);
    if (hs) {
      j["hamiltonian"] = hs->h.str();
      j["synthesis"] = exprs_json(hs->synthesis);
    } else {
      j["hamiltonian"] = nullptr;
      j["synthesis"] = nullptr;
      j["note"] = lift_note;
    }
    j["candidates"] = json::array();
    for (const auto& c : sf.candidates) {
      json jc = {{"name", c.name}, {"nu", c.nu()}};
      jc["x"] = exprs_json(c.x);
      jc["y"] = exprs_json(c.y);
      jc["qtilde"] = c.qtilde ? json(c.qtilde->str()) : json(nullptr);
      if (c.declared) {
        json jf = {{"states", c.declared->states}, {"controls", c.declared->controls}};
        jf["dynamics"] = exprs_json(c.declared->dynamics);
        jf["cost"] = c.declared->cost.str();
        jf["charts"] = c.declared->charts;
        jc["factor"] = jf;
      } else {
        jc["factor"] = nullptr;
      }
      j["candidates"].push_back(jc);
    }
    out << j.dump(2) << "\n";
    return 0;
  }

  out << "system " << sys.name << ": " << sys.states.size() << " states ("
      << join(sys.states) << "), " << sys.controls.size() << " controls ("
      << join(sys.controls) << ")\n";
  for (std::size_t i = 0; i < sys.states.size(); ++i)
    out << "  " << sys.states[i] << "' = " << sys.dynamics[i].str() << "\n";
  out << "  cost = " << sys.cost.str() << "\n";
  for (const auto& c : sys.charts) out << "  chart " << c << " > 0\n";
  if (hs) {
    out << "  H = " << hs->h.str() << "\n";
    for (std::size_t i = 0; i < sys.controls.size(); ++i)
      out << "  " << sys.controls[i] << "* = " << hs->synthesis[i].str() << "\n";
  } else {
    out << "  Hamiltonian form unavailable: " << lift_note << "\n";
  }
  for (const auto& c : sf.candidates) {
    out << "candidate " << c.name << ": " << c.nu() << " pair" << (c.nu() == 1 ? "" : "s");
    out << (c.qtilde ? ", cost correction declared" : ", cost correction to reconstruct");
    out << (c.declared ? ", factor system declared" : "") << "\n";
    for (std::size_t i = 0; i < c.nu(); ++i)
      out << "  x" << i + 1 << " = " << c.x[i].str() << ", y" << i + 1 << " = "
          << c.y[i].str() << "\n";
  }
  return 0;
}

inline int cmd_verify(const Opts& o, std::ostream& out, std::ostream& err) {
  SystemFile sf;
  if (int rc = load(o, sf, err)) return rc;
  HamiltonianSystem hs;
  if (int rc = lift(sf, hs, err)) return rc;
  const FactorizationCandidate* cand = nullptr;
  if (int rc = pick(sf, o.candidate, cand, err)) return rc;

  VerificationReport rep = run_verification(hs, *cand, o.vo);
  Outcome oc = rep.outcome();

  if (o.json_out) {
    json j;
    j["system"] = rep.system;
    j["candidate"] = rep.candidate;
    j["verdict"] = outcome_name(oc);
    j["reconstructed"] = rep.reconstructed;
    j["qtilde"] = rep.qtilde ? json(rep.qtilde->str()) : json(nullptr);
    j["gbar"] = rep.gbar ? json(rep.gbar->str()) : json(nullptr);
    j["g"] = rep.g ? json(rep.g->str()) : json(nullptr);
    j["checks"] = json::array();
    for (const auto& c : rep.checks) {
      json jc = {{"name", c.name},
                 {"symbolic", truth_word(c.symbolic)},
                 {"numeric_residual", c.numeric_residual},
                 {"tolerance", c.tolerance},
                 {"ran", c.ran},
                 {"passed", c.passed()},
                 {"note", c.note}};
      jc["witness"] = c.witness ? point_json(*c.witness) : json(nullptr);
      j["checks"].push_back(jc);
    }
    out << j.dump(2) << "\n";
    return oc == Outcome::Pass ? 0 : oc == Outcome::Fail ? 1 : 3;
  }

  out << "system " << rep.system << ", candidate " << rep.candidate;
  if (rep.reconstructed && rep.qtilde)
    out << " (reconstructed qtilde = " << rep.qtilde->str() << ")";
  out << "\n";
  for (const auto& c : rep.checks) {
    const char* tag = !c.ran ? " skip " : c.passed() ? " pass " : " FAIL ";
    out << "  [" << tag << "] " << std::left << std::setw(28) << c.name << std::right
        << " symbolic=" << std::setw(7) << truth_word(c.symbolic) << "  residual="
        << std::setw(9) << std::setprecision(3) << std::scientific << c.numeric_residual
        << std::defaultfloat;
    if (!c.note.empty()) out << "  " << c.note;
    if (c.witness) {
      out << "  at (";
      for (std::size_t i = 0; i < c.witness->size(); ++i)
        out << (i ? ", " : "") << std::setprecision(4) << (*c.witness)[i];
      out << ")";
    }
    out << "\n";
  }
  out << "verdict: " << outcome_name(oc) << "\n";
  return oc == Outcome::Pass ? 0 : oc == Outcome::Fail ? 1 : 3;
}

inline int cmd_reduce(const Opts& o, std::ostream& out, std::ostream& err) {
  SystemFile sf;
  if (int rc = load(o, sf, err)) return rc;
  HamiltonianSystem hs;
  if (int rc = lift(sf, hs, err)) return rc;
  const FactorizationCandidate* cand = nullptr;
  if (int rc = pick(sf, o.candidate, cand, err)) return rc;

  ReductionResult red;
  try {
    red = build_factor_system(hs, *cand, o.vo);
  } catch (const Error& e) {
    err << "reduction failed: " << e.what() << "\n";
    return 1;
  }
  bool ok = true;
  for (const auto& [what, v] : red.consistency) ok = ok && v.acceptable();

  if (o.rename) {
    // rewrite y -> q and v -> u so the output parses as a fresh system file
    const std::size_t nu = red.factor.states.size(), mu = red.factor.controls.size();
    std::vector<std::string> qs = indexed_names("q", nu), us = indexed_names("u", mu);
    FramePtr plag = lagrangian_frame(qs, us);
    FramePtr pcanon = canonical_frame(qs);
    std::map<std::string, Expr> to_lag, to_canon;
    for (std::size_t i = 0; i < nu; ++i) {
      to_lag.emplace("y" + std::to_string(i + 1), Expr::variable(plag, qs[i]));
      to_canon.emplace("y" + std::to_string(i + 1), Expr::variable(pcanon, qs[i]));
      to_canon.emplace("x" + std::to_string(i + 1),
                       Expr::variable(pcanon, "p" + std::to_string(i + 1)));
    }
    for (std::size_t k = 0; k < mu; ++k)
      to_lag.emplace("v" + std::to_string(k + 1), Expr::variable(plag, us[k]));
    for (auto& f : red.factor.dynamics) f = substitute(f, plag, to_lag);
    red.factor.cost = substitute(red.factor.cost, plag, to_lag);
    red.factor.states = qs;
    red.factor.controls = us;
    red.factor.frame = plag;
    red.factor.costate_stem = "p";
    FramePtr fcanon = factor_canonical_frame(nu);
    for (auto& c : red.factor.charts)
      c = substitute(parse_expression(c, fcanon), pcanon, to_canon).str();
    red.g = substitute(red.g, pcanon, to_canon);
    for (auto& vh : red.vhat) vh = substitute(vh, pcanon, to_canon);
  }

  if (o.json_out) {
    json j;
    j["g"] = red.g.str();
    j["mu"] = red.mu;
    j["vhat"] = exprs_json(red.vhat);
    json jf = {{"name", red.factor.name},
               {"states", red.factor.states},
               {"controls", red.factor.controls},
               {"cost", red.factor.cost.str()},
               {"charts", red.factor.charts}};
    jf["dynamics"] = exprs_json(red.factor.dynamics);
    j["factor"] = jf;
    j["consistency"] = json::array();
    for (const auto& [what, v] : red.consistency)
      j["consistency"].push_back({{"what", what},
                                  {"symbolic", truth_word(v.truth)},
                                  {"max_abs", v.max_abs}});
    j["consistent"] = ok;
    out << j.dump(2) << "\n";
    return ok ? 0 : 1;
  }

  // comments keep the output loadable as a system file
  out << "# factor Hamiltonian G = " << red.g.str() << "\n";
  for (std::size_t k = 0; k < red.vhat.size(); ++k)
    out << "# " << red.factor.controls[k] << "* = " << red.vhat[k].str() << "\n";
  out << "system " << red.factor.name << "\n";
  out << "states " << join(red.factor.states) << "\n";
  if (!red.factor.controls.empty()) out << "controls " << join(red.factor.controls) << "\n";
  for (std::size_t i = 0; i < red.factor.states.size(); ++i)
    out << "dyn " << red.factor.states[i] << "' = " << red.factor.dynamics[i].str() << "\n";
  out << "cost " << red.factor.cost.str() << "\n";
  for (const auto& c : red.factor.charts) out << "chart " << c << " > 0\n";
  for (const auto& [what, v] : red.consistency)
    out << "# " << what << ": " << v.str() << "\n";
  return ok ? 0 : 1;
}

inline int cmd_simulate(const Opts& o, std::ostream& out, std::ostream& err) {
  SystemFile sf;
  if (int rc = load(o, sf, err)) return rc;
  HamiltonianSystem hs;
  if (int rc = lift(sf, hs, err)) return rc;
  const FactorizationCandidate* cand = nullptr;
  if (!o.candidate.empty()) {
    if (int rc = pick(sf, o.candidate, cand, err)) return rc;
  } else if (sf.candidates.size() == 1) {
    cand = &sf.candidates.front();
  }

  auto charts = hs.chart_exprs();
  const std::size_t dim = hs.frame->size();
  std::vector<double> init;
  if (!o.init.empty()) {
    std::istringstream is(o.init);
    std::string tok;
    while (std::getline(is, tok, ',')) {
      try {
        init.push_back(std::stod(tok));
      } catch (const std::exception&) {
        err << "error: bad --init value '" << tok << "'\n";
        return 2;
      }
    }
    if (init.size() != dim) {
      err << "error: --init needs " << dim << " values in the order " << join(hs.frame->names)
          << "\n";
      return 2;
    }
    if (!on_charts(charts, init, 0.0)) {
      err << "error: --init violates a chart condition\n";
      return 2;
    }
  }

  std::vector<Expr> field;
  std::optional<Trajectory> traj;
  try {
    field = canonical_equations(hs);
    if (!init.empty()) {
      traj = integrate(field, init, o.vo.T, o.vo.h, charts);
    } else {
      SamplePlan plan = default_plan(hs.frame, charts, o.vo.samples, o.vo.seed);
      plan.margin = o.vo.flow_margin;
      PointStream stream(plan);
      for (int attempt = 0; attempt < 20 && !traj; ++attempt) {
        init = stream.next();
        try {
          traj = integrate(field, init, o.vo.T, o.vo.h, charts, o.vo.flow_margin);
        } catch (const ChartExit&) {
        } catch (const EvalDomainError&) {
        }
      }
      if (!traj) {
        err << "error: no sampled start stayed on the charts for the whole flow\n";
        return 1;
      }
    }
  } catch (const Error& e) {
    err << "integration failed: " << e.what() << "\n";
    return 1;
  }

  double drift_h = conservation_drift(*traj, hs.h);
  std::optional<double> drift_gbar, mapped;
  std::string qnote, mnote;
  if (cand) {
    try {
      Expr qt = cand->qtilde ? *cand->qtilde : reconstruct_Qtilde(hs, *cand, o.vo);
      drift_gbar = conservation_drift(*traj, build_Gbar(hs, *cand, qt));
    } catch (const Error& e) {
      qnote = e.what();
    }
    MappedCheck mc = check_mapped_dynamics(hs, *cand, *traj, o.vo);
    mapped = mc.residual;
    mnote = mc.note;
  }

  if (o.json_out) {
    json j;
    j["system"] = hs.name;
    j["frame"] = hs.frame->names;
    j["init"] = point_json(traj->states.front());
    j["T"] = o.vo.T;
    j["h"] = o.vo.h;
    j["steps"] = traj->times.size() - 1;
    j["final"] = point_json(traj->states.back());
    j["drift_H"] = drift_h;
    if (cand) {
      j["candidate"] = cand->name;
      j["drift_Gbar"] = drift_gbar ? json(*drift_gbar) : json(nullptr);
      j["mapped_residual"] = mapped ? json(*mapped) : json(nullptr);
      if (!qnote.empty()) j["gbar_note"] = qnote;
      j["mapped_note"] = mnote;
    }
    if (o.dump) {
      j["times"] = point_json(traj->times);
      j["states"] = json::array();
      for (const auto& z : traj->states) j["states"].push_back(point_json(z));
    }
    out << j.dump(2) << "\n";
    return 0;
  }

  auto csv = [&out](const std::vector<double>& p) {
    for (std::size_t i = 0; i < p.size(); ++i) out << (i ? ", " : "") << p[i];
  };
  out << "frame: " << join(hs.frame->names) << "\n";
  out << "init:  ";
  csv(traj->states.front());
  out << "\nfinal: ";
  csv(traj->states.back());
  out << "\nsteps: " << traj->times.size() - 1 << ", T = " << o.vo.T << ", h = " << o.vo.h
      << "\n";
  out << "drift of H: " << std::setprecision(3) << std::scientific << drift_h
      << std::defaultfloat << "\n";
  if (cand) {
    if (drift_gbar)
      out << "drift of Gbar: " << std::setprecision(3) << std::scientific << *drift_gbar
          << std::defaultfloat << "\n";
    else
      out << "drift of Gbar unavailable: " << qnote << "\n";
    if (mapped)
      out << "mapped dynamics residual: " << std::setprecision(3) << std::scientific << *mapped
          << std::defaultfloat << " (" << mnote << ")\n";
    else
      out << "mapped dynamics residual unavailable: " << mnote << "\n";
  }
  if (o.dump) {
    out << "t";
    for (const auto& n : hs.frame->names) out << ", " << n;
    out << "\n";
    for (std::size_t k = 0; k < traj->times.size(); ++k) {
      out << traj->times[k] << ", ";
      csv(traj->states[k]);
      out << "\n";
    }
  }
  return 0;
}

inline int cmd_boundary(const Opts& o, std::ostream& out, std::ostream& err) {
  SystemFile sf;
  if (int rc = load(o, sf, err)) return rc;
  HamiltonianSystem hs;
  if (int rc = lift(sf, hs, err)) return rc;
  const FactorizationCandidate* cand = nullptr;
  if (int rc = pick(sf, o.candidate, cand, err)) return rc;

  BoundaryReport rep;
  try {
    rep = classify_boundary(hs, *cand, o.fibers, 20, o.vo);
  } catch (const Error& e) {
    err << "boundary scan failed: " << e.what() << "\n";
    return 3;
  }

  if (o.json_out) {
    json j;
    j["nu"] = rep.nu;
    j["fibers"] = json::array();
    for (const auto& f : rep.fibers)
      j["fibers"].push_back(
          {{"q0", point_json(f.q0)}, {"rank", f.rank}, {"class", boundary_name(f.cls)}});
    j["counts"] = {{"overdetermined", rep.over},
                   {"well-posed", rep.well},
                   {"underdetermined", rep.under}};
    j["consensus"] = boundary_name(rep.consensus);
    j["unanimous"] = rep.unanimous;
    out << j.dump(2) << "\n";
    return rep.unanimous ? 0 : 3;
  }

  out << "endpoint conditions pinned per costate fiber (nu = " << rep.nu << ", fibers = "
      << rep.fibers.size() << ")\n";
  out << "  overdetermined: " << rep.over << ", well-posed: " << rep.well
      << ", underdetermined: " << rep.under << "\n";
  out << "consensus: " << boundary_name(rep.consensus)
      << (rep.unanimous ? " (unanimous)" : " (mixed)") << "\n";
  return rep.unanimous ? 0 : 3;
}

}  // namespace cli_detail

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using namespace cli_detail;
  CLI::App app{"Hamiltonian forms and order reductions of smooth optimal control systems"};
  app.name("ocfact");
  app.require_subcommand(1);
  Opts o;

  app.set_help_flag("--help", "print help");
  auto add_common = [&](CLI::App* sub, bool sampling) {
    sub->set_help_flag("--help", "print help");
    sub->add_option("file", o.file, "system description file")->required();
    sub->add_flag("--json", o.json_out, "machine readable output");
    if (sampling) {
      sub->add_option("--samples", o.vo.samples, "sample count for numeric checks")
          ->capture_default_str();
      sub->add_option("--seed", o.vo.seed, "sampling seed")->capture_default_str();
      sub->add_option("--tol", o.vo.tol, "numeric zero tolerance")->capture_default_str();
    }
  };

  auto* c_parse = app.add_subcommand("parse", "read a system file and report its contents");
  add_common(c_parse, false);

  auto* c_verify =
      app.add_subcommand("verify", "check a reduction candidate symbolically and numerically");
  add_common(c_verify, true);
  c_verify->add_option("--candidate", o.candidate, "candidate name (default: the only one)");
  c_verify->add_option("--T", o.vo.T, "flow horizon")->capture_default_str();
  c_verify->add_option("--h", o.vo.h, "integration step")->capture_default_str();

  auto* c_reduce = app.add_subcommand("reduce", "construct the factor control system");
  add_common(c_reduce, true);
  c_reduce->add_option("--candidate", o.candidate, "candidate name (default: the only one)");
  c_reduce->add_flag("--rename", o.rename, "emit the factor system in fresh q/u names");

  auto* c_sim = app.add_subcommand("simulate", "integrate the closed loop flow");
  add_common(c_sim, true);
  c_sim->add_option("--candidate", o.candidate, "also track the mapped trajectory");
  c_sim->add_option("--T", o.vo.T, "flow horizon")->capture_default_str();
  c_sim->add_option("--h", o.vo.h, "integration step")->capture_default_str();
  c_sim->add_option("--init", o.init, "start point, comma separated, costates first");
  c_sim->add_flag("--dump", o.dump, "emit the whole trajectory");

  auto* c_bound = app.add_subcommand("boundary", "classify endpoint conditions fiber by fiber");
  add_common(c_bound, true);
  c_bound->add_option("--candidate", o.candidate, "candidate name (default: the only one)");
  c_bound->add_option("--fibers", o.fibers, "initial states to scan")->capture_default_str();

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e, out, err);
    return rc == 0 ? 0 : 2;
  }

  if (app.got_subcommand(c_parse)) return cmd_parse(o, out, err);
  if (app.got_subcommand(c_verify)) return cmd_verify(o, out, err);
  if (app.got_subcommand(c_reduce)) return cmd_reduce(o, out, err);
  if (app.got_subcommand(c_sim)) return cmd_simulate(o, out, err);
  return cmd_boundary(o, out, err);
}

}  // namespace ocfact
