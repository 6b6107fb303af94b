#pragma once

// Exact multivariate polynomials over rationals. Generators are frame
// variables plus opaque radicals ("atoms"): (base)^(1/root) with integer
// base coefficients. Atoms are never unwrapped structurally; only integer
// content leaves an atom (sqrt(4*x) -> 2*sqrt(x)), so sqrt(q1^2) stays
// opaque and equivalences across distinct atoms are left to sampling.

#include <gmpxx.h>

#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "ocfact/errors.hpp"

namespace ocfact {

using Rational = mpq_class;
using Integer = mpz_class;

struct Polynomial;
struct Atom;
int compare(const Polynomial& a, const Polynomial& b);
int compare(const Atom& a, const Atom& b);

// variable (var >= 0, index into a frame) or radical atom
struct Generator {
  int var = -1;
  std::shared_ptr<const Atom> atom;
  bool is_var() const { return var >= 0; }
};

int compare(const Generator& a, const Generator& b);

struct GeneratorLess {
  bool operator()(const Generator& a, const Generator& b) const { return compare(a, b) < 0; }
};

// exponents >= 1; atom exponents stay in [1, root)
using Monomial = std::map<Generator, int, GeneratorLess>;

// lexicographic in generator order, larger exponent on the earliest
// differing generator wins
inline int compare(const Monomial& a, const Monomial& b) {
  auto ia = a.begin(), ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    int c = compare(ia->first, ib->first);
    if (c < 0) return 1;   // a has the earlier generator with positive exponent
    if (c > 0) return -1;
    if (ia->second != ib->second) return ia->second < ib->second ? -1 : 1;
    ++ia;
    ++ib;
  }
  if (ia != a.end()) return 1;
  if (ib != b.end()) return -1;
  return 0;
}

struct MonomialLess {
  bool operator()(const Monomial& a, const Monomial& b) const { return compare(a, b) < 0; }
};

struct Polynomial {
  std::map<Monomial, Rational, MonomialLess> terms;  // no zero coefficients

  Polynomial() = default;
  explicit Polynomial(const Rational& c) {
    if (c != 0) terms.emplace(Monomial{}, c);
  }
  explicit Polynomial(long c) : Polynomial(Rational(c)) {}
  Polynomial(const Monomial& m, const Rational& c) {
    if (c != 0) terms.emplace(m, c);
  }

  static Polynomial variable(int v) {
    Monomial m;
    m.emplace(Generator{v, nullptr}, 1);
    return Polynomial(m, Rational(1));
  }

  bool is_zero() const { return terms.empty(); }
  bool is_constant() const { return terms.empty() || (terms.size() == 1 && terms.begin()->first.empty()); }
  Rational constant_value() const {
    if (terms.empty()) return Rational(0);
    return terms.begin()->second;
  }
};

struct Atom {
  std::shared_ptr<const Polynomial> base;  // integer coefficients, root-power-free content
  int root;                                // >= 2
};

inline int compare(const Atom& a, const Atom& b) {
  if (a.root != b.root) return a.root < b.root ? -1 : 1;
  if (a.base == b.base) return 0;
  return compare(*a.base, *b.base);
}

inline int compare(const Generator& a, const Generator& b) {
  if (a.is_var() != b.is_var()) return a.is_var() ? -1 : 1;
  if (a.is_var()) return a.var < b.var ? -1 : (a.var > b.var ? 1 : 0);
  if (a.atom == b.atom) return 0;
  return compare(*a.atom, *b.atom);
}

// structural total order; used for atom identity and deterministic printing
inline int compare(const Polynomial& a, const Polynomial& b) {
  auto ia = a.terms.rbegin(), ib = b.terms.rbegin();
  while (ia != a.terms.rend() && ib != b.terms.rend()) {
    int c = compare(ia->first, ib->first);
    if (c != 0) return c;
    c = cmp(ia->second, ib->second);
    if (c != 0) return c;
    ++ia;
    ++ib;
  }
  if (ia != a.terms.rend()) return 1;
  if (ib != b.terms.rend()) return -1;
  return 0;
}

inline bool operator==(const Polynomial& a, const Polynomial& b) { return compare(a, b) == 0; }
inline bool operator!=(const Polynomial& a, const Polynomial& b) { return compare(a, b) != 0; }

inline Polynomial operator-(const Polynomial& a) {
  Polynomial r;
  for (const auto& [m, c] : a.terms) r.terms.emplace(m, -c);
  return r;
}

inline Polynomial& operator+=(Polynomial& a, const Polynomial& b) {
  for (const auto& [m, c] : b.terms) {
    auto it = a.terms.find(m);
    if (it == a.terms.end()) {
      a.terms.emplace(m, c);
    } else {
      it->second += c;
      if (it->second == 0) a.terms.erase(it);
    }
  }
  return a;
}

inline Polynomial operator+(Polynomial a, const Polynomial& b) {
  a += b;
  return a;
}

inline Polynomial operator-(Polynomial a, const Polynomial& b) {
  a += -b;
  return a;
}

Polynomial operator*(const Polynomial& a, const Polynomial& b);

inline Polynomial pow(const Polynomial& a, unsigned long e) {
  Polynomial r(1L);
  Polynomial base = a;
  while (e) {
    if (e & 1) r = r * base;
    if (e >>= 1) base = base * base;
  }
  return r;
}

// multiply two monomials with coefficient, peeling atom exponents that reach
// the root (atom^root contributes one copy of the base polynomial) and
// reducing exponent/root by their gcd ((B^(1/4))^2 = B^(1/2))
inline Polynomial term_mul(const Monomial& m1, const Rational& c1, const Monomial& m2,
                           const Rational& c2) {
  Monomial merged = m1;
  for (const auto& [g, e] : m2) {
    auto it = merged.find(g);
    if (it == merged.end())
      merged.emplace(g, e);
    else
      it->second += e;
  }
  Monomial rest;
  std::vector<std::pair<std::shared_ptr<const Polynomial>, int>> carries;
  for (auto& [g, e] : merged) {
    if (g.is_var()) {
      rest.emplace(g, e);
      continue;
    }
    int t = g.atom->root;
    int whole = e / t, frac = e % t;
    if (whole > 0) carries.emplace_back(g.atom->base, whole);
    if (frac > 0) {
      long d = std::gcd((long)frac, (long)t);
      if (d > 1) {
        auto reduced = std::make_shared<Atom>(Atom{g.atom->base, (int)(t / d)});
        rest.emplace(Generator{-1, reduced}, frac / (int)d);
      } else {
        rest.emplace(g, frac);
      }
    }
  }
  Polynomial r(rest, c1 * c2);
  for (const auto& [base, k] : carries) r = r * pow(*base, (unsigned long)k);
  return r;
}

inline Polynomial operator*(const Polynomial& a, const Polynomial& b) {
  Polynomial r;
  for (const auto& [ma, ca] : a.terms)
    for (const auto& [mb, cb] : b.terms) r += term_mul(ma, ca, mb, cb);
  return r;
}

inline Polynomial operator*(const Polynomial& a, const Rational& c) {
  Polynomial r;
  if (c == 0) return r;
  for (const auto& [m, k] : a.terms) r.terms.emplace(m, k * c);
  return r;
}

inline bool atom_free(const Monomial& m) {
  for (const auto& [g, e] : m)
    if (!g.is_var()) return false;
  return true;
}

inline bool atom_free(const Polynomial& p) {
  for (const auto& [m, c] : p.terms)
    if (!atom_free(m)) return false;
  return true;
}

inline bool contains_var(const Polynomial& p, int v);

inline bool contains_var(const Monomial& m, int v) {
  for (const auto& [g, e] : m) {
    if (g.is_var() && g.var == v) return true;
    if (!g.is_var() && contains_var(*g.atom->base, v)) return true;
  }
  return false;
}

inline bool contains_var(const Polynomial& p, int v) {
  for (const auto& [m, c] : p.terms)
    if (contains_var(m, v)) return true;
  return false;
}

inline void collect_vars(const Polynomial& p, std::vector<bool>& seen) {
  for (const auto& [m, c] : p.terms)
    for (const auto& [g, e] : m) {
      if (g.is_var()) {
        if ((std::size_t)g.var < seen.size()) seen[g.var] = true;
      } else {
        collect_vars(*g.atom->base, seen);
      }
    }
}

// ---- evaluation --------------------------------------------------------

inline double evaluate(const Polynomial& p, const std::vector<double>& point);

inline double evaluate_generator(const Generator& g, int e, const std::vector<double>& point) {
  if (g.is_var()) {
    if ((std::size_t)g.var >= point.size()) throw EvalDomainError("point does not cover variable");
    return std::pow(point[(std::size_t)g.var], e);
  }
  double base = evaluate(*g.atom->base, point);
  int t = g.atom->root;
  double root;
  if (t % 2 == 0) {
    if (base < 0) {
      if (base > -1e-12)
        base = 0;
      else
        throw EvalDomainError("even root of a negative value");
    }
    root = std::pow(base, 1.0 / t);
  } else {
    root = std::copysign(std::pow(std::abs(base), 1.0 / t), base);
  }
  return std::pow(root, e);
}

inline double evaluate(const Polynomial& p, const std::vector<double>& point) {
  double sum = 0;
  for (const auto& [m, c] : p.terms) {
    double v = c.get_d();
    for (const auto& [g, e] : m) v *= evaluate_generator(g, e, point);
    sum += v;
  }
  return sum;
}

// ---- content and primitive parts ---------------------------------------

// positive rational c with p/c integer and coprime; 0 for the zero polynomial
inline Rational content(const Polynomial& p) {
  Integer g = 0, l = 1;
  for (const auto& [m, c] : p.terms) {
    mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_num().get_mpz_t());
    mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), c.get_den().get_mpz_t());
  }
  if (g == 0) return Rational(0);
  Rational r(g, l);
  r.canonicalize();
  return r;
}

inline const Rational& leading_coeff(const Polynomial& p) {
  static const Rational zero(0);
  if (p.terms.empty()) return zero;
  return p.terms.rbegin()->second;
}

// scale to integer coprime coefficients with positive leading coefficient
inline Polynomial make_primitive(const Polynomial& p, Rational* factor_out = nullptr) {
  if (p.is_zero()) {
    if (factor_out) *factor_out = 0;
    return p;
  }
  Rational c = content(p);
  if (leading_coeff(p) < 0) c = -c;
  if (factor_out) *factor_out = c;
  return p * (1 / c);
}

// ---- atom-free gcd machinery (primitive PRS) ----------------------------

inline int degree_in(const Polynomial& p, const Generator& g) {
  int d = 0;
  for (const auto& [m, c] : p.terms) {
    auto it = m.find(g);
    if (it != m.end() && it->second > d) d = it->second;
  }
  return d;
}

// view as univariate in g: degree -> coefficient polynomial (g removed)
inline std::map<int, Polynomial> univariate_view(const Polynomial& p, const Generator& g) {
  std::map<int, Polynomial> v;
  for (const auto& [m, c] : p.terms) {
    Monomial rest = m;
    int d = 0;
    auto it = rest.find(g);
    if (it != rest.end()) {
      d = it->second;
      rest.erase(it);
    }
    v[d] += Polynomial(rest, c);
  }
  for (auto it = v.begin(); it != v.end();)
    it = it->second.is_zero() ? v.erase(it) : std::next(it);
  return v;
}

inline Polynomial from_univariate(const std::map<int, Polynomial>& v, const Generator& g) {
  Polynomial r;
  for (const auto& [d, coeff] : v) {
    if (d == 0) {
      r += coeff;
      continue;
    }
    Monomial m;
    m.emplace(g, d);
    r += coeff * Polynomial(m, Rational(1));
  }
  return r;
}

inline bool smallest_generator(const Polynomial& p, Generator& out, bool have) {
  for (const auto& [m, c] : p.terms)
    for (const auto& [g, e] : m)
      if (!have || compare(g, out) < 0) {
        out = g;
        have = true;
      }
  return have;
}

Polynomial gcd_polys(const Polynomial& a, const Polynomial& b);
Polynomial divexact(const Polynomial& a, const Polynomial& b);

// gcd of the univariate coefficients of p in g
inline Polynomial content_in(const Polynomial& p, const Generator& g) {
  Polynomial c;
  for (const auto& [d, coeff] : univariate_view(p, g)) c = gcd_polys(c, coeff);
  return c;
}

inline Polynomial pseudo_remainder(Polynomial a, const Polynomial& b, const Generator& g) {
  int db = degree_in(b, g);
  Polynomial lb = univariate_view(b, g).rbegin()->second;
  int da = degree_in(a, g);
  while (!a.is_zero() && (da = degree_in(a, g)) >= db) {
    auto va = univariate_view(a, g);
    Polynomial la = va.rbegin()->second;
    Monomial shift;
    if (da - db > 0) shift.emplace(g, da - db);
    a = a * lb - b * (la * Polynomial(shift, Rational(1)));
    if (!a.is_zero() && degree_in(a, g) == da) {
      // leading terms must cancel; guard against a stuck loop
      throw Error("pseudo-division failed to reduce degree");
    }
  }
  return a;
}

// primitive gcd with positive leading coefficient; inputs must be atom-free
inline Polynomial gcd_polys(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero()) return b.is_zero() ? b : make_primitive(b);
  if (b.is_zero()) return make_primitive(a);
  if (a.is_constant() || b.is_constant()) return Polynomial(1L);
  Generator g{};
  bool have = smallest_generator(a, g, false);
  have = smallest_generator(b, g, have);
  (void)have;
  int da = degree_in(a, g), db = degree_in(b, g);
  if (da == 0 || db == 0) {
    // g appears in only one argument: it cannot divide the other
    const Polynomial& with = da == 0 ? b : a;
    const Polynomial& without = da == 0 ? a : b;
    return gcd_polys(content_in(with, g), without);
  }
  Polynomial ca = content_in(a, g), cb = content_in(b, g);
  Polynomial c = gcd_polys(ca, cb);
  Polynomial pa = divexact(a, ca), pb = divexact(b, cb);
  if (da < db) std::swap(pa, pb);
  while (!pb.is_zero()) {
    Polynomial r = pseudo_remainder(pa, pb, g);
    pa = pb;
    if (r.is_zero()) {
      pb = r;
    } else {
      Polynomial cr = content_in(r, g);
      pb = make_primitive(divexact(r, cr));
    }
  }
  return make_primitive(c * make_primitive(pa));
}

// exact division; throws if b does not divide a (internal misuse)
inline Polynomial divexact(const Polynomial& a, const Polynomial& b) {
  if (a.is_zero()) return a;
  if (b.is_zero()) throw Error("exact division by zero polynomial");
  if (b.is_constant()) return a * (1 / b.constant_value());
  Generator g{};
  smallest_generator(b, g, false);
  auto vb = univariate_view(b, g);
  int db = vb.rbegin()->first;
  const Polynomial& lb = vb.rbegin()->second;
  Polynomial rem = a, q;
  while (!rem.is_zero()) {
    auto vr = univariate_view(rem, g);
    int dr = vr.rbegin()->first;
    if (dr < db) throw Error("exact polynomial division left a remainder");
    Polynomial qc = divexact(vr.rbegin()->second, lb);
    Monomial shift;
    if (dr - db > 0) shift.emplace(g, dr - db);
    Polynomial qterm = qc * Polynomial(shift, Rational(1));
    q += qterm;
    rem = rem - qterm * b;
    if (!rem.is_zero() && degree_in(rem, g) >= dr)
      throw Error("exact polynomial division left a remainder");
  }
  return q;
}

// partial derivative of an atom-free polynomial
inline Polynomial derivative_atom_free(const Polynomial& p, int v) {
  Polynomial r;
  Generator gv{v, nullptr};
  for (const auto& [m, c] : p.terms) {
    auto it = m.find(gv);
    if (it == m.end()) continue;
    Monomial rest = m;
    int e = it->second;
    rest.erase(gv);
    if (e > 1) rest.emplace(gv, e - 1);
    r += Polynomial(rest, c * e);
  }
  return r;
}

}  // namespace ocfact
