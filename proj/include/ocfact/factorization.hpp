#pragma once

// Order reduction of a Hamiltonian control system along a candidate map
// phi: (p, q) -> (x, y). A candidate factors the system when the transported
// pair form solves the factorization equation for some cost correction, the
// factor Hamiltonian pulls back to a first integral, and the flows are
// phi-related. Every symbolic verdict is cross-checked on sampled points and
// along an integrated trajectory.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ocfact/control.hpp"
#include "ocfact/integrate.hpp"

namespace ocfact {

// map components live on the system's canonical frame; names x1..xnu pair
// with y1..ynu on the factor side
struct FactorizationCandidate {
  std::string name;
  std::vector<Expr> x, y;
  std::optional<Expr> qtilde;                // claimed cost correction, on (p, q)
  std::optional<LagrangianSystem> declared;  // claimed factor system, on (y, v)

  std::size_t nu() const { return x.size(); }

  std::vector<std::pair<Expr, Expr>> pairs() const {
    std::vector<std::pair<Expr, Expr>> out;
    for (std::size_t i = 0; i < x.size(); ++i) out.emplace_back(x[i], y[i]);
    return out;
  }

  // x_i -> i-th component, y_i -> conjugate component
  std::map<std::string, Expr> phi() const {
    std::map<std::string, Expr> out;
    for (std::size_t i = 0; i < x.size(); ++i) {
      out.emplace("x" + std::to_string(i + 1), x[i]);
      out.emplace("y" + std::to_string(i + 1), y[i]);
    }
    return out;
  }
};

struct VerifyOptions {
  int samples = 100;
  unsigned long seed = 42;
  double tol = 1e-8;         // sampled-residual tolerance
  double T = 1.0;            // trajectory length for flow cross-checks
  double h = 1e-3;           // integration step
  double drift_tol = 1e-6;   // conserved-quantity drift along the flow
  double mapped_tol = 1e-5;  // finite-difference residual of the mapped flow
  double flow_margin = 5e-2; // keeps trajectories clear of chart boundaries
};

inline Verdict combine_verdicts(const std::vector<Verdict>& vs) {
  Verdict out;
  out.truth = Truth::Yes;
  for (const auto& v : vs) {
    out.samples = std::max(out.samples, v.samples);
    out.zero_samples = std::max(out.zero_samples, v.zero_samples);
    out.max_abs = std::max(out.max_abs, v.max_abs);
    if (v.truth == Truth::No) {
      if (out.truth != Truth::No) {
        out.witness = v.witness;
        out.note = v.note;
      }
      out.truth = Truth::No;
    } else if (v.truth == Truth::Unknown && out.truth == Truth::Yes) {
      out.truth = Truth::Unknown;
    }
  }
  return out;
}

// variables some chart pins positive, usable as even-root branch choices
inline std::set<int> positive_chart_vars(const std::vector<Expr>& charts) {
  std::set<int> out;
  for (const auto& c : charts) {
    const NormalForm& nf = c.nf();
    if (!nf.den.is_constant()) continue;
    if (nf.num.terms.size() != 1) continue;
    const auto& [m, coef] = *nf.num.terms.begin();
    if (coef < 0) continue;
    if (m.size() != 1) continue;
    const auto& [g, e] = *m.begin();
    if (g.is_var() && e == 1) out.insert(g.var);
  }
  return out;
}

struct IndependenceReport {
  int rank = 0;
  std::size_t expected = 0;

  bool ok() const { return rank == (int)expected; }
};

inline IndependenceReport check_independence(const HamiltonianSystem& hs,
                                             const FactorizationCandidate& cand,
                                             const VerifyOptions& opt = {}) {
  std::vector<Expr> xy = cand.x;
  xy.insert(xy.end(), cand.y.begin(), cand.y.end());
  std::vector<int> all(hs.frame->size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = (int)i;
  auto pts = sample_points(default_plan(hs.frame, hs.chart_exprs(), opt.samples, opt.seed));
  IndependenceReport rep;
  rep.expected = 2 * cand.nu();
  rep.rank = jacobian_rank(xy, all, pts);
  return rep;
}

// sum x_i (y^i, H), the pairing of the candidate with the transported flow
inline Expr transported_sum(const HamiltonianSystem& hs, const FactorizationCandidate& cand) {
  Expr out = Expr::zero(hs.frame);
  for (const auto& [x, y] : cand.pairs()) out = out + x * poisson_bracket(y, hs.h);
  return out;
}

inline OneForm pair_form(const HamiltonianSystem& hs, const FactorizationCandidate& cand) {
  OneForm sigma = OneForm::zero(hs.frame);
  for (const auto& [x, y] : cand.pairs()) sigma = sigma + x * d(y);
  return sigma;
}

// cost correction recovered from the transported pair form; exists exactly
// when the interior product is closed, so the verdict of is_closed gates it
inline Expr reconstruct_Qtilde(const HamiltonianSystem& hs, const FactorizationCandidate& cand,
                               const VerifyOptions& opt = {}) {
  auto charts = hs.chart_exprs();
  OneForm ip = interior_product(cand.pairs(), hs.h);
  ClosednessReport closed = is_closed(ip, charts, opt.samples, opt.seed);
  if (closed.overall == Truth::No) {
    const auto& f = closed.failures.front();
    throw NotClosed("mixed partials differ between d" + hs.frame->names[f.i] + " and d" +
                    hs.frame->names[f.j] + " components");
  }
  return transported_sum(hs, cand) - reconstruct_potential(ip, charts);
}

struct EquationCheck {
  OneForm residual;  // transported pair form minus the differential of qtilde
  Verdict verdict;
};

inline EquationCheck verify_factorization_equation(const HamiltonianSystem& hs,
                                                   const FactorizationCandidate& cand,
                                                   const Expr& qtilde,
                                                   const VerifyOptions& opt = {}) {
  auto charts = hs.chart_exprs();
  OneForm residual = lie_derivative_oneform(pair_form(hs, cand), hs.h) - d(qtilde);
  std::vector<Verdict> parts;
  for (const auto& a : residual.a) parts.push_back(is_zero(a, charts, opt.samples, opt.seed));
  return {std::move(residual), combine_verdicts(parts)};
}

inline Expr build_Gbar(const HamiltonianSystem& hs, const FactorizationCandidate& cand,
                       const Expr& qtilde) {
  return transported_sum(hs, cand) - qtilde;
}

inline Verdict check_first_integral(const HamiltonianSystem& hs, const Expr& gbar,
                                    const VerifyOptions& opt = {}) {
  return is_zero(poisson_bracket(gbar, hs.h), hs.chart_exprs(), opt.samples, opt.seed);
}

// one elimination step: solve eq = 0 for symbol w, either affinely or as a
// pure power c w^k + r = 0 with an even-root branch pinned by a chart
inline std::optional<Expr> solve_symbol(const Expr& eq, int w, const std::vector<Expr>& charts,
                                        const std::set<int>& positive, int samples,
                                        unsigned long seed) {
  try {
    Expr c = eq.differentiate(w);
    if (!c.is_zero_exact() && !c.contains(w)) {
      if (!is_zero(c, charts, samples, seed).definite_no()) return std::nullopt;
      Expr r = eq - c * Expr::variable(eq.frame(), w);
      if (r.contains(w)) return std::nullopt;
      return -r / c;
    }
    const NormalForm& nf = eq.nf();
    if (contains_var(nf.den, w)) return std::nullopt;
    auto view = univariate_view(nf.num, Generator{w, nullptr});
    if (view.empty() || view.size() > 2) return std::nullopt;
    int k = view.rbegin()->first;
    if (k < 2) return std::nullopt;
    if (view.size() == 2 && view.begin()->first != 0) return std::nullopt;
    Polynomial ck = view.rbegin()->second;
    Polynomial r0 = view.size() == 2 ? view.begin()->second : Polynomial();
    if (contains_var(ck, w) || contains_var(r0, w)) return std::nullopt;
    Expr cE(eq.frame(), make_nf(ck, Polynomial(1L)));
    if (!is_zero(cE, charts, samples, seed).definite_no()) return std::nullopt;
    if (k % 2 == 0 && positive.find(w) == positive.end()) return std::nullopt;
    Expr rhs(eq.frame(), make_nf(Polynomial() - r0, ck));
    return rhs.pow(Rational(1, k));
  } catch (const Error&) {
    return std::nullopt;
  }
}

// rewrite f in the image coordinates of the map w = comps(z). Source symbols
// shared with the target pass through; the rest are eliminated against the
// map equations. Functional dependence is checked on sampled Jacobians first.
inline Expr express_through(const Expr& f, const std::vector<std::pair<std::string, Expr>>& comps,
                            const FramePtr& target, const std::vector<Expr>& source_charts,
                            const std::set<int>& positive, int samples = 100,
                            unsigned long seed = 42) {
  const FramePtr& source = f.frame();
  std::vector<Expr> mapfns;
  std::vector<int> elim;
  for (std::size_t i = 0; i < source->size(); ++i) {
    if (target->index_of(source->names[i]) >= 0)
      mapfns.push_back(Expr::variable(source, (int)i));
    else
      elim.push_back((int)i);
  }
  for (const auto& [nm, e] : comps) mapfns.push_back(e);

  std::vector<int> all(source->size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = (int)i;
  auto pts = sample_points(default_plan(source, source_charts, samples, seed));
  int base = jacobian_rank(mapfns, all, pts);
  auto aug = mapfns;
  aug.push_back(f);
  if (jacobian_rank(aug, all, pts) != base)
    throw FiberObstruction("the function varies along the fibers of the map (rank " +
                           std::to_string(base) + " grows when it is appended)");

  std::vector<std::string> names = source->names;
  std::vector<Role> roles = source->roles;
  for (const auto& [nm, e] : comps) {
    names.push_back(nm);
    int ti = target->index_of(nm);
    roles.push_back(ti >= 0 ? target->roles[(std::size_t)ti] : Role::Control);
  }
  auto combined = std::make_shared<const CoordinateFrame>(std::move(names), std::move(roles));

  std::vector<Expr> charts;
  for (const auto& c : source_charts) charts.push_back(substitute(c, combined, {}));

  Expr fc = substitute(f, combined, {});
  std::vector<Expr> eqs;
  for (const auto& [nm, e] : comps)
    eqs.push_back(substitute(e, combined, {}) - Expr::variable(combined, nm));

  std::vector<bool> used(eqs.size(), false);
  bool progress = true;
  while (progress) {
    progress = false;
    for (std::size_t k = 0; k < eqs.size() && !progress; ++k) {
      if (used[k]) continue;
      for (int w : elim) {
        if (!eqs[k].contains(w)) continue;
        auto sol = solve_symbol(eqs[k], w, charts, positive, samples, seed);
        if (!sol) continue;
        std::map<std::string, Expr> sub{{combined->names[(std::size_t)w], *sol}};
        try {
          Expr fc2 = substitute(fc, combined, sub);
          std::vector<Expr> eqs2 = eqs;
          for (std::size_t k2 = 0; k2 < eqs.size(); ++k2)
            if (!used[k2] && k2 != k) eqs2[k2] = substitute(eqs[k2], combined, sub);
          fc = std::move(fc2);
          eqs = std::move(eqs2);
        } catch (const Error&) {
          continue;
        }
        used[k] = true;
        progress = true;
        break;
      }
    }
  }
  for (int w : elim)
    if (fc.contains(w))
      throw EliminationFailure("could not eliminate '" + source->names[(std::size_t)w] +
                               "' using the map equations");
  return substitute(fc, target, {});
}

// push a fiber-constant function on (p, q) down to the factor phase space
inline Expr express_through_map(const HamiltonianSystem& hs, const FactorizationCandidate& cand,
                                const Expr& f, const VerifyOptions& opt = {}) {
  std::vector<std::pair<std::string, Expr>> comps;
  for (std::size_t i = 0; i < cand.nu(); ++i)
    comps.emplace_back("x" + std::to_string(i + 1), cand.x[i]);
  for (std::size_t i = 0; i < cand.nu(); ++i)
    comps.emplace_back("y" + std::to_string(i + 1), cand.y[i]);
  auto charts = hs.chart_exprs();
  return express_through(f, comps, factor_canonical_frame(cand.nu()), charts,
                         positive_chart_vars(charts), opt.samples, opt.seed);
}

struct PhiCheck {
  std::vector<std::pair<std::string, Verdict>> parts;
  Verdict combined;
};

// the candidate flows commute with phi when each transported component of
// the field matches the factor field composed with the map
inline PhiCheck check_phi_related(const HamiltonianSystem& hs, const FactorizationCandidate& cand,
                                  const Expr& g, const VerifyOptions& opt = {}) {
  auto charts = hs.chart_exprs();
  auto phi = cand.phi();
  PhiCheck out;
  std::vector<Verdict> vs;
  for (std::size_t i = 0; i < cand.nu(); ++i) {
    std::string xi = "x" + std::to_string(i + 1), yi = "y" + std::to_string(i + 1);
    Expr ydot = poisson_bracket(cand.y[i], hs.h) - substitute(g.differentiate(xi), hs.frame, phi);
    Expr xdot = poisson_bracket(cand.x[i], hs.h) + substitute(g.differentiate(yi), hs.frame, phi);
    out.parts.emplace_back("flow of " + yi + " against dG/d" + xi,
                           is_zero(ydot, charts, opt.samples, opt.seed));
    out.parts.emplace_back("flow of " + xi + " against -dG/d" + yi,
                           is_zero(xdot, charts, opt.samples, opt.seed));
  }
  for (const auto& [what, v] : out.parts) vs.push_back(v);
  out.combined = combine_verdicts(vs);
  return out;
}

struct ObservabilityEntry {
  std::string what;
  int base_rank = 0, augmented_rank = 0;

  bool ok() const { return augmented_rank == base_rank; }
};

struct ObservabilityReport {
  std::vector<ObservabilityEntry> entries;

  bool ok() const {
    for (const auto& e : entries)
      if (!e.ok()) return false;
    return true;
  }
};

// f is observable through the closed-loop data when it adds no rank to the
// family {states, synthesis}
inline ObservabilityEntry check_observable(const HamiltonianSystem& hs, const Expr& f,
                                           const std::string& what,
                                           const std::vector<std::vector<double>>& pts) {
  std::vector<Expr> base;
  for (const auto& s : hs.states) base.push_back(Expr::variable(hs.frame, s));
  for (const auto& u : hs.synthesis) base.push_back(u);
  std::vector<int> all(hs.frame->size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = (int)i;
  ObservabilityEntry e;
  e.what = what;
  e.base_rank = jacobian_rank(base, all, pts);
  base.push_back(f);
  e.augmented_rank = jacobian_rank(base, all, pts);
  return e;
}

inline ObservabilityReport check_observability(const HamiltonianSystem& hs,
                                               const FactorizationCandidate& cand,
                                               const VerifyOptions& opt = {}) {
  auto pts = sample_points(default_plan(hs.frame, hs.chart_exprs(), opt.samples, opt.seed));
  ObservabilityReport rep;
  for (std::size_t i = 0; i < cand.nu(); ++i) {
    std::string yi = "y" + std::to_string(i + 1);
    rep.entries.push_back(check_observable(hs, cand.y[i], yi, pts));
    rep.entries.push_back(
        check_observable(hs, poisson_bracket(cand.y[i], hs.h), "flow of " + yi, pts));
  }
  return rep;
}

// variables appearing inside radical bases; the factor system inherits a
// positivity chart for each of its states that does
inline void atom_vars(const Polynomial& p, std::size_t width, std::set<int>& out) {
  std::vector<bool> seen(width, false);
  for (const auto& [m, c] : p.terms)
    for (const auto& [g, e] : m)
      if (!g.is_var()) collect_vars(*g.atom->base, seen);
  for (std::size_t i = 0; i < width; ++i)
    if (seen[i]) out.insert((int)i);
}

struct ReductionResult {
  Expr g;                        // factor Hamiltonian on (x, y)
  std::size_t mu = 0;            // factor control count
  std::vector<int> vhat_sources; // which dG/dx_i were chosen as controls
  std::vector<Expr> vhat;        // chosen control values on (x, y)
  LagrangianSystem factor;       // reduced system on (y, v)
  std::vector<std::pair<std::string, Verdict>> consistency;
};

inline ReductionResult build_factor_system(const HamiltonianSystem& hs,
                                           const FactorizationCandidate& cand,
                                           const VerifyOptions& opt = {}) {
  const std::size_t nu = cand.nu();
  Expr qt = cand.qtilde ? *cand.qtilde : reconstruct_Qtilde(hs, cand, opt);
  Expr gbar = build_Gbar(hs, cand, qt);
  Expr g = express_through_map(hs, cand, gbar, opt);

  FramePtr fcanon = g.frame();
  std::vector<Expr> ftilde;
  for (std::size_t i = 0; i < nu; ++i) ftilde.push_back(g.differentiate("x" + std::to_string(i + 1)));

  auto x_idx = fcanon->indices_with(Role::Costate);
  auto fpts = sample_points(default_plan(fcanon, {}, opt.samples, opt.seed));
  std::size_t mu = (std::size_t)jacobian_rank(ftilde, x_idx, fpts);

  ReductionResult out{g, mu, {}, {}, {}, {}};
  int cur = 0;
  for (std::size_t i = 0; i < nu && out.vhat.size() < mu; ++i) {
    auto trial = out.vhat;
    trial.push_back(ftilde[i]);
    int r = jacobian_rank(trial, x_idx, fpts);
    if (r > cur) {
      cur = r;
      out.vhat = std::move(trial);
      out.vhat_sources.push_back((int)i);
    }
  }

  std::vector<std::pair<std::string, Expr>> comps;
  for (std::size_t k = 0; k < mu; ++k)
    comps.emplace_back("v" + std::to_string(k + 1), out.vhat[k]);
  FramePtr flag = factor_lagrangian_frame(nu, mu);

  LagrangianSystem factor;
  factor.name = cand.name + "_factor";
  factor.states = indexed_names("y", nu);
  factor.controls = indexed_names("v", mu);
  factor.frame = flag;
  factor.costate_stem = "x";
  for (std::size_t i = 0; i < nu; ++i)
    factor.dynamics.push_back(express_through(ftilde[i], comps, flag, {}, {}, opt.samples, opt.seed));
  Expr qexpr = Expr::zero(fcanon);
  for (std::size_t i = 0; i < nu; ++i)
    qexpr = qexpr + Expr::variable(fcanon, "x" + std::to_string(i + 1)) * ftilde[i];
  qexpr = qexpr - g;
  factor.cost = express_through(qexpr, comps, flag, {}, {}, opt.samples, opt.seed);

  std::set<int> radical_states;
  atom_vars(factor.cost.nf().num, flag->size(), radical_states);
  for (const auto& f : factor.dynamics) atom_vars(f.nf().num, flag->size(), radical_states);
  for (int v : radical_states)
    if ((std::size_t)v < nu) factor.charts.push_back(flag->names[(std::size_t)v]);

  // the chosen controls must solve the stationarity system of the factor
  // cost, and the factor field must pull back to dG/dx
  if (mu > 0) {
    FramePtr fjoint = joint_frame(factor.states, factor.controls, "x");
    Expr tau = Expr::zero(fjoint);
    for (std::size_t i = 0; i < nu; ++i)
      tau = tau + Expr::variable(fjoint, "x" + std::to_string(i + 1)) *
                      substitute(factor.dynamics[i], fjoint, {});
    tau = tau - substitute(factor.cost, fjoint, {});
    std::map<std::string, Expr> at;
    for (std::size_t k = 0; k < mu; ++k)
      at.emplace("v" + std::to_string(k + 1), substitute(out.vhat[k], fjoint, {}));
    for (std::size_t k = 0; k < mu; ++k) {
      Expr st = substitute(tau.differentiate("v" + std::to_string(k + 1)), fjoint, at);
      out.consistency.emplace_back("stationarity in v" + std::to_string(k + 1),
                                   is_zero(st, {}, opt.samples, opt.seed));
    }
  }
  std::map<std::string, Expr> vmap;
  for (std::size_t k = 0; k < mu; ++k) vmap.emplace("v" + std::to_string(k + 1), out.vhat[k]);
  for (std::size_t i = 0; i < nu; ++i) {
    Expr back = substitute(factor.dynamics[i], fcanon, vmap) - ftilde[i];
    out.consistency.emplace_back("field component y" + std::to_string(i + 1),
                                 is_zero(back, {}, opt.samples, opt.seed));
  }
  out.factor = std::move(factor);
  return out;
}

// pushes a trajectory of the full system through the map and compares finite
// differences of the mapped states against the factor field, preferring
// declared factor data and falling back to a fresh reduction
struct MappedCheck {
  std::optional<double> residual;
  std::string note;
};

inline MappedCheck check_mapped_dynamics(const HamiltonianSystem& hs,
                                         const FactorizationCandidate& cand,
                                         const Trajectory& traj,
                                         const VerifyOptions& opt = {}) {
  MappedCheck out;
  std::vector<Expr> ffield, vhat;
  bool have = false;
  if (cand.declared) {
    try {
      vhat = hamiltonianize(*cand.declared).synthesis;
      ffield = cand.declared->dynamics;
      out.note = "against the declared factor system";
      have = true;
    } catch (const Error&) {
    }
  }
  if (!have) {
    try {
      ReductionResult red = build_factor_system(hs, cand, opt);
      ffield = red.factor.dynamics;
      vhat = red.vhat;
      out.note = "against the reduced factor system";
    } catch (const Error& err) {
      out.note = err.what();
      return out;
    }
  }
  auto phi = cand.phi();
  std::vector<Expr> vfns;
  for (const auto& vh : vhat) vfns.push_back(substitute(vh, hs.frame, phi));
  auto yrows = map_trajectory(traj, cand.y);
  auto vrows = map_trajectory(traj, vfns);
  std::vector<std::vector<double>> rhs(yrows.size());
  for (std::size_t k = 0; k < yrows.size(); ++k) {
    std::vector<double> pt = yrows[k];
    pt.insert(pt.end(), vrows[k].begin(), vrows[k].end());
    for (const auto& fi : ffield) {
      try {
        rhs[k].push_back(fi.evaluate(pt));
      } catch (const EvalDomainError&) {
        out.note = "mapped trajectory leaves the factor evaluation domain";
        return out;
      }
    }
  }
  out.residual = residual_dynamics(yrows, traj.h, rhs);
  return out;
}

enum class BoundaryClass { Over, Well, Under };

inline const char* boundary_name(BoundaryClass c) {
  switch (c) {
    case BoundaryClass::Over: return "overdetermined";
    case BoundaryClass::Well: return "well-posed";
    default: return "underdetermined";
  }
}

struct FiberClassification {
  std::vector<double> q0;
  int rank = 0;
  BoundaryClass cls = BoundaryClass::Well;
};

struct BoundaryReport {
  std::size_t nu = 0;
  std::vector<FiberClassification> fibers;
  int over = 0, well = 0, under = 0;
  BoundaryClass consensus = BoundaryClass::Well;
  bool unanimous = false;
};

// transversality transport: over each sampled initial state the candidate
// pins d = rank of p -> (x, y)(p, q0) conditions on the costate fiber,
// against the nu conditions the factor problem expects
inline BoundaryReport classify_boundary(const HamiltonianSystem& hs,
                                        const FactorizationCandidate& cand, int fibers = 20,
                                        int draws_per_fiber = 20, const VerifyOptions& opt = {}) {
  if (fibers < 1 || draws_per_fiber < 1) throw Error("boundary scan needs positive fiber counts");
  auto charts = hs.chart_exprs();
  SamplePlan plan = default_plan(hs.frame, charts, opt.samples, opt.seed);
  PointStream stream(plan);
  auto p_idx = hs.frame->indices_with(Role::Costate);
  auto q_idx = hs.frame->indices_with(Role::State);
  std::vector<Expr> xy = cand.x;
  xy.insert(xy.end(), cand.y.begin(), cand.y.end());
  auto jac = jacobian(xy, p_idx);

  BoundaryReport rep;
  rep.nu = cand.nu();
  for (int f = 0; f < fibers; ++f) {
    std::vector<double> base = stream.next();
    FiberClassification fc;
    for (int j : q_idx) fc.q0.push_back(base[(std::size_t)j]);
    int got = 0;
    for (int attempt = 0; got < draws_per_fiber && attempt < 100 * draws_per_fiber; ++attempt) {
      std::vector<double> pt = stream.next();
      for (int j : q_idx) pt[(std::size_t)j] = base[(std::size_t)j];
      if (!on_charts(charts, pt, plan.margin)) continue;
      try {
        fc.rank = std::max(fc.rank, rank_at_point(jac, pt));
      } catch (const EvalDomainError&) {
        continue;
      }
      ++got;
    }
    if (got == 0) throw ExhaustedSampling("no usable costate draws over a sampled fiber");
    fc.cls = fc.rank < (int)rep.nu    ? BoundaryClass::Over
             : fc.rank == (int)rep.nu ? BoundaryClass::Well
                                      : BoundaryClass::Under;
    if (fc.cls == BoundaryClass::Over) ++rep.over;
    if (fc.cls == BoundaryClass::Well) ++rep.well;
    if (fc.cls == BoundaryClass::Under) ++rep.under;
    rep.fibers.push_back(std::move(fc));
  }
  rep.consensus = rep.over >= rep.well && rep.over >= rep.under ? BoundaryClass::Over
                  : rep.well >= rep.under                       ? BoundaryClass::Well
                                                                : BoundaryClass::Under;
  int top = std::max({rep.over, rep.well, rep.under});
  rep.unanimous = top == fibers;
  return rep;
}

struct CheckEntry {
  std::string name;
  Truth symbolic = Truth::Unknown;
  double numeric_residual = 0;
  double tolerance = 1e-8;
  bool ran = true;  // false when a prerequisite was unavailable
  std::optional<std::vector<double>> witness;
  std::string note;

  // a check fails only on a definite symbolic refutation or a numeric
  // residual above its tolerance
  bool passed() const { return symbolic != Truth::No && numeric_residual <= tolerance; }
};

enum class Outcome { Pass, Fail, Inconclusive };

inline const char* outcome_name(Outcome o) {
  switch (o) {
    case Outcome::Pass: return "pass";
    case Outcome::Fail: return "fail";
    default: return "inconclusive";
  }
}

struct VerificationReport {
  std::string system, candidate;
  std::vector<CheckEntry> checks;
  std::optional<Expr> qtilde;  // declared or reconstructed cost correction
  std::optional<Expr> gbar;    // first-integral candidate on (p, q)
  std::optional<Expr> g;       // factor Hamiltonian used for the phi checks
  std::optional<OneForm> equation_residual;
  bool reconstructed = false;

  // skipped checks never count as passes
  Outcome outcome() const {
    bool skipped = false;
    for (const auto& c : checks) {
      if (!c.passed()) return Outcome::Fail;
      if (!c.ran) skipped = true;
    }
    return skipped ? Outcome::Inconclusive : Outcome::Pass;
  }

  bool pass() const { return outcome() == Outcome::Pass; }

  const CheckEntry* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }
};

inline void fill_from(CheckEntry& e, const Verdict& v) {
  e.symbolic = v.truth;
  e.numeric_residual = v.max_abs;
  e.witness = v.witness;
}

inline VerificationReport run_verification(const HamiltonianSystem& hs,
                                           const FactorizationCandidate& cand,
                                           const VerifyOptions& opt = {}) {
  VerificationReport rep;
  rep.system = hs.name;
  rep.candidate = cand.name;
  auto charts = hs.chart_exprs();
  const std::size_t nu = cand.nu();

  {
    CheckEntry e{"independence"};
    e.tolerance = opt.tol;
    auto ind = check_independence(hs, cand, opt);
    e.symbolic = ind.ok() ? Truth::Yes : Truth::No;
    e.numeric_residual = ind.ok() ? 0 : (double)((int)ind.expected - ind.rank);
    e.note = "rank " + std::to_string(ind.rank) + " of " + std::to_string(ind.expected);
    rep.checks.push_back(std::move(e));
  }

  std::optional<Expr> qt = cand.qtilde;
  bool closed_refuted = false;
  std::optional<std::vector<double>> closed_witness;
  std::string closed_note;
  if (!qt) {
    CheckEntry e{"qtilde_reconstruction"};
    e.tolerance = opt.tol;
    OneForm ip = interior_product(cand.pairs(), hs.h);
    ClosednessReport closed = is_closed(ip, charts, opt.samples, opt.seed);
    if (closed.overall == Truth::No) {
      closed_refuted = true;
      e.symbolic = Truth::No;
      const MixedPartialEntry* worst = nullptr;
      for (const auto& f : closed.failures)
        if (f.verdict.truth == Truth::No && (!worst || f.verdict.max_abs > worst->verdict.max_abs))
          worst = &f;
      if (worst) {
        e.numeric_residual = worst->verdict.max_abs;
        e.witness = worst->verdict.witness;
        e.note = "mixed partials differ between d" + hs.frame->names[worst->i] + " and d" +
                 hs.frame->names[worst->j] + " components";
        closed_witness = e.witness;
        closed_note = e.note;
      }
    } else {
      try {
        qt = transported_sum(hs, cand) - reconstruct_potential(ip, charts);
        rep.reconstructed = true;
        e.symbolic = closed.overall;
        e.note = "qtilde = " + qt->str();
      } catch (const Error& err) {
        e.symbolic = Truth::Unknown;
        e.note = err.what();
        e.ran = false;
      }
    }
    rep.checks.push_back(std::move(e));
  }
  rep.qtilde = qt;

  {
    CheckEntry e{"factorization_equation"};
    e.tolerance = opt.tol;
    if (qt) {
      EquationCheck eq = verify_factorization_equation(hs, cand, *qt, opt);
      rep.equation_residual = eq.residual;
      fill_from(e, eq.verdict);
      if (e.symbolic == Truth::No) e.note = "residual " + eq.residual.str();
    } else if (closed_refuted) {
      e.symbolic = Truth::No;
      e.witness = closed_witness;
      e.note = "no cost correction can exist; " + closed_note;
    } else {
      e.note = "needs a cost correction";
      e.ran = false;
    }
    rep.checks.push_back(std::move(e));
  }

  std::optional<Expr> gbar;
  {
    CheckEntry e{"first_integral"};
    e.tolerance = opt.tol;
    if (qt) {
      gbar = build_Gbar(hs, cand, *qt);
      fill_from(e, check_first_integral(hs, *gbar, opt));
    } else {
      e.note = "needs a cost correction";
      e.ran = false;
    }
    rep.checks.push_back(std::move(e));
  }
  rep.gbar = gbar;

  std::optional<HamiltonianSystem> decl_h;
  std::string decl_note;
  if (cand.declared) {
    try {
      decl_h = hamiltonianize(*cand.declared);
    } catch (const Error& err) {
      decl_note = err.what();
    }
  }

  std::optional<Expr> g;
  std::string g_src;
  if (decl_h) {
    g = decl_h->h;
    g_src = "declared factor system";
  } else if (!cand.declared && gbar) {
    try {
      g = express_through_map(hs, cand, *gbar, opt);
      g_src = "recovered from the first integral";
    } catch (const Error& err) {
      g_src = err.what();
    }
  }
  rep.g = g;

  {
    CheckEntry e{"phi_relatedness"};
    e.tolerance = opt.tol;
    if (g) {
      PhiCheck phi = check_phi_related(hs, cand, *g, opt);
      fill_from(e, phi.combined);
      e.note = g_src;
      if (e.symbolic == Truth::No)
        for (const auto& [what, v] : phi.parts)
          if (v.truth == Truth::No) {
            e.note = what + " (G " + g_src + ")";
            break;
          }
    } else {
      e.note = cand.declared ? "factor system rejected: " + decl_note
                             : "no factor Hamiltonian available: " + g_src;
      e.ran = false;
    }
    rep.checks.push_back(std::move(e));
  }

  if (cand.declared) {
    CheckEntry e{"declared_factor_consistency"};
    e.tolerance = opt.tol;
    if (decl_h && gbar) {
      // both sides are only fixed up to an additive constant, so compare differentials
      Expr diff = *gbar - substitute(decl_h->h, hs.frame, cand.phi());
      std::vector<Verdict> vs;
      for (const auto& nm : hs.frame->names)
        vs.push_back(is_zero(diff.differentiate(nm), charts, opt.samples, opt.seed));
      fill_from(e, combine_verdicts(vs));
      e.note = e.symbolic == Truth::No ? "declared Hamiltonian does not pull back to Gbar"
                                       : "up to an additive constant";
    } else {
      e.note = decl_h ? "needs a cost correction" : decl_note;
      e.ran = false;
    }
    rep.checks.push_back(std::move(e));
  }

  {
    CheckEntry e{"observability"};
    e.tolerance = opt.tol;
    auto obs = check_observability(hs, cand, opt);
    e.symbolic = obs.ok() ? Truth::Yes : Truth::No;
    int gap = 0;
    for (const auto& en : obs.entries) {
      gap += std::max(0, en.augmented_rank - en.base_rank);
      if (!en.ok() && e.note.empty())
        e.note = en.what + " raises the rank from " + std::to_string(en.base_rank) + " to " +
                 std::to_string(en.augmented_rank);
    }
    e.numeric_residual = gap;
    rep.checks.push_back(std::move(e));
  }

  CheckEntry eh{"conservation_H"};
  eh.tolerance = opt.drift_tol;
  CheckEntry eg{"conservation_Gbar"};
  eg.tolerance = opt.drift_tol;
  CheckEntry em{"mapped_dynamics_residual"};
  em.tolerance = opt.mapped_tol;
  std::optional<Trajectory> traj;
  try {
    std::vector<Expr> field = canonical_equations(hs);
    SamplePlan fplan = default_plan(hs.frame, charts, opt.samples, opt.seed);
    fplan.margin = opt.flow_margin;
    PointStream stream(fplan);
    for (int attempt = 0; attempt < 20 && !traj; ++attempt) {
      std::vector<double> init = stream.next();
      try {
        Trajectory t = integrate(field, init, opt.T, opt.h, charts, opt.flow_margin);
        bool sane = true;
        for (const auto& z : t.states)
          for (double c : z)
            if (!std::isfinite(c) || std::abs(c) > 1e6) sane = false;
        if (sane) traj = std::move(t);
      } catch (const ChartExit&) {
      } catch (const EvalDomainError&) {
      }
    }
    if (!traj) eh.note = "no sampled start stayed on the charts for the whole flow";
  } catch (const Error& err) {
    eh.note = err.what();
  }

  if (traj) {
    eh.numeric_residual = conservation_drift(*traj, hs.h);
    eh.note = "drift along a sampled trajectory";
    if (gbar) {
      eg.numeric_residual = conservation_drift(*traj, *gbar);
      eg.note = "drift along a sampled trajectory";
    } else {
      eg.note = "needs a cost correction";
      eg.ran = false;
    }

    MappedCheck mc = check_mapped_dynamics(hs, cand, *traj, opt);
    em.note = mc.note;
    if (mc.residual)
      em.numeric_residual = *mc.residual;
    else
      em.ran = false;
  } else {
    if (eh.note.empty()) eh.note = "no trajectory available";
    eg.note = em.note = "no trajectory available";
    eh.ran = eg.ran = em.ran = false;
  }
  rep.checks.push_back(std::move(eh));
  rep.checks.push_back(std::move(eg));
  rep.checks.push_back(std::move(em));
  return rep;
}

}  // namespace ocfact
