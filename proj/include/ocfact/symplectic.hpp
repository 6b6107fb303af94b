#pragma once

// Poisson brackets, Lie derivatives along a Hamiltonian field, interior
// products of pair forms, closedness tests and potential reconstruction.
//
// The bracket convention is (f,g) = sum_i df/dq^i dg/dp_i - df/dp_i dg/dq^i,
// so (f,H) is the derivative of f along the flow of H and (q^i,p_i) = 1.

#include <optional>
#include <vector>

#include "ocfact/analysis.hpp"
#include "ocfact/oneform.hpp"

namespace ocfact {

inline Expr poisson_bracket(const Expr& f, const Expr& g) {
  if (!same_frame(f.frame(), g.frame()))
    throw Error("bracket arguments live on different coordinate frames");
  auto pairs = f.frame()->conjugate_pairs();
  Expr acc = Expr::zero(f.frame());
  for (auto [pi, qi] : pairs)
    acc = acc + f.differentiate(qi) * g.differentiate(pi) -
          f.differentiate(pi) * g.differentiate(qi);
  return acc;
}

// derivative of f along the Hamiltonian flow of h
inline Expr lie_derivative_fn(const Expr& f, const Expr& h) { return poisson_bracket(f, h); }

// components of the Hamiltonian vector field in frame order: z^i' = (z^i, h)
inline std::vector<Expr> hamiltonian_field(const Expr& h) {
  std::vector<Expr> field;
  field.reserve(h.frame()->size());
  for (std::size_t i = 0; i < h.frame()->size(); ++i)
    field.push_back(poisson_bracket(Expr::variable(h.frame(), (int)i), h));
  return field;
}

// L_h(sum a_i dz^i) = sum (a_i,h) dz^i + a_i d((z^i,h))
inline OneForm lie_derivative_oneform(const OneForm& w, const Expr& h) {
  if (!same_frame(w.frame, h.frame()))
    throw Error("one-form and Hamiltonian live on different coordinate frames");
  OneForm out = OneForm::zero(w.frame);
  for (std::size_t i = 0; i < w.a.size(); ++i) out.a[i] = poisson_bracket(w.a[i], h);
  for (std::size_t i = 0; i < w.a.size(); ++i) {
    if (w.a[i].is_zero_exact()) continue;
    out = out + w.a[i] * d(poisson_bracket(Expr::variable(w.frame, (int)i), h));
  }
  return out;
}

// contraction of the Hamiltonian field with d(sum x_i dy^i):
// sum (y^i,h) dx_i - (x_i,h) dy^i
inline OneForm interior_product(const std::vector<std::pair<Expr, Expr>>& pairs, const Expr& h) {
  OneForm out = OneForm::zero(h.frame());
  for (const auto& [x, y] : pairs)
    out = out + poisson_bracket(y, h) * d(x) - poisson_bracket(x, h) * d(y);
  return out;
}

// ---- closedness -------------------------------------------------------------

struct MixedPartialEntry {
  std::size_t i, j;    // frame indices with da_i/dz^j - da_j/dz^i != 0
  Expr residual;
  Verdict verdict;
};

struct ClosednessReport {
  Truth overall = Truth::Yes;
  std::vector<MixedPartialEntry> failures;  // entries whose verdict is not Yes

  bool acceptable() const { return overall != Truth::No; }
};

inline ClosednessReport is_closed(const OneForm& w, const std::vector<Expr>& charts = {},
                                  int samples = 100, unsigned long seed = 42) {
  ClosednessReport report;
  for (std::size_t i = 0; i < w.a.size(); ++i)
    for (std::size_t j = i + 1; j < w.a.size(); ++j) {
      Expr residual = w.a[i].differentiate((int)j) - w.a[j].differentiate((int)i);
      if (residual.is_zero_exact()) continue;
      Verdict v = is_zero(residual, charts, samples, seed);
      if (v.truth == Truth::Yes) continue;
      if (v.truth == Truth::No)
        report.overall = Truth::No;
      else if (report.overall == Truth::Yes)
        report.overall = Truth::Unknown;
      report.failures.push_back({i, j, residual, v});
    }
  return report;
}

// ---- potential reconstruction ----------------------------------------------

// antiderivative in variable v; the denominator must be a monomial in v and
// every term must integrate by the power rule
inline Expr antiderivative(const Expr& a, int v) {
  const FramePtr& frame = a.frame();
  if (a.is_zero_exact()) return a;
  Generator gv{v, nullptr};
  auto dview = univariate_view(a.nf().den, gv);
  if (dview.size() != 1)
    throw NonIntegrableTerm("denominator is not a monomial in the integration variable");
  int dpow = dview.begin()->first;
  const Polynomial& d0 = dview.begin()->second;
  Expr acc = Expr::zero(frame);
  for (const auto& [m, c] : a.nf().num.terms) {
    Rational k(0);
    Monomial rest;
    for (const auto& [g, e] : m) {
      if (g.is_var()) {
        if (g.var == v)
          k += e;
        else
          rest.emplace(g, e);
        continue;
      }
      const Polynomial& base = *g.atom->base;
      if (!contains_var(base, v)) {
        rest.emplace(g, e);
        continue;
      }
      if (base.terms.size() != 1 || base.terms.begin()->second != 1)
        throw NonIntegrableTerm("radical of a sum in the integration variable");
      for (const auto& [bg, be] : base.terms.begin()->first) {
        if (!bg.is_var() || bg.var != v)
          throw NonIntegrableTerm("radical mixes the integration variable with other symbols");
        k += Rational((long)be * e, g.atom->root);
      }
    }
    Rational kappa = k - dpow;
    if (kappa == -1) throw NonIntegrableTerm("term integrates to a logarithm");
    Expr term(frame, make_nf(Polynomial(rest, c / (kappa + 1)), d0));
    acc = acc + term * Expr::variable(frame, v).pow(kappa + 1);
  }
  return acc;
}

// base point for path integration: all zeros, except that variables pinned
// by charts or appearing in component denominators are searched over small
// integers until every chart clears its margin and no denominator vanishes
inline std::vector<Rational> integration_base(const OneForm& w, const std::vector<Expr>& charts) {
  const std::size_t n = w.frame->size();
  std::vector<bool> constrained(n, false);
  for (const auto& c : charts)
    for (std::size_t i = 0; i < n; ++i)
      if (c.contains((int)i)) constrained[i] = true;
  for (const auto& comp : w.a)
    for (std::size_t i = 0; i < n; ++i)
      if (contains_var(comp.nf().den, (int)i)) constrained[i] = true;
  std::vector<std::size_t> vars;
  for (std::size_t i = 0; i < n; ++i)
    if (constrained[i]) vars.push_back(i);
  if (vars.size() > 8) throw Error("too many constrained variables for base-point search");

  static const long options[] = {0, 1, -1, 2, -2};
  std::vector<std::size_t> idx(vars.size(), 0);
  while (true) {
    std::vector<Rational> base(n, Rational(0));
    for (std::size_t k = 0; k < vars.size(); ++k) base[vars[k]] = Rational(options[idx[k]]);
    std::vector<double> bd(n);
    for (std::size_t i = 0; i < n; ++i) bd[i] = base[i].get_d();
    bool ok = true;
    for (const auto& c : charts) {
      try {
        if (c.evaluate(bd) < 1e-3) ok = false;
      } catch (const EvalDomainError&) {
        ok = false;
      }
      if (!ok) break;
    }
    if (ok)
      for (const auto& comp : w.a)
        if (std::abs(evaluate(comp.nf().den, bd)) < 1e-12) {
          ok = false;
          break;
        }
    if (ok) return base;
    std::size_t k = 0;
    for (; k < vars.size(); ++k) {
      if (++idx[k] < sizeof(options) / sizeof(options[0])) break;
      idx[k] = 0;
    }
    if (k == vars.size())
      throw Error("could not place an integration base point satisfying the charts");
  }
}

// potential of a closed one-form by axis-parallel path integration from the
// base point; the result vanishes at the base, so it is determined only up
// to an additive constant
inline Expr reconstruct_potential(const OneForm& w, const std::vector<Expr>& charts = {}) {
  const FramePtr& frame = w.frame;
  auto base = integration_base(w, charts);
  Expr q = Expr::zero(frame);
  for (std::size_t i = 0; i < frame->size(); ++i) {
    if (w.a[i].is_zero_exact()) continue;
    std::map<std::string, Expr> freeze;
    for (std::size_t j = i + 1; j < frame->size(); ++j)
      freeze.emplace(frame->names[j], Expr::constant(frame, base[j]));
    Expr ai = freeze.empty() ? w.a[i] : substitute(w.a[i], frame, freeze);
    if (ai.is_zero_exact()) continue;
    Expr anti = antiderivative(ai, (int)i);
    Expr at_base =
        substitute(anti, frame, {{frame->names[i], Expr::constant(frame, base[i])}});
    q = q + anti - at_base;
  }
  return q;
}

}  // namespace ocfact
