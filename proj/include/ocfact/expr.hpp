#pragma once

// Canonical rational normal form num/den over a coordinate frame and the
// immutable Expr value built on it. Construction canonicalizes eagerly:
// den is atom-free with coprime integer coefficients and positive leading
// coefficient, and shares no polynomial factor with num. Atom-free zero
// tests are therefore exact; atom-bearing ones are sampled elsewhere.

#include <cstdlib>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ocfact/frame.hpp"
#include "ocfact/polynomial.hpp"

namespace ocfact {

struct NormalForm {
  Polynomial num;
  Polynomial den = Polynomial(1L);
};

// re-normalize an explicitly assembled monomial (atom exponents may exceed
// their root or share a factor with it)
inline Polynomial normalize_monomial(const Monomial& m, const Rational& c) {
  return term_mul(m, c, Monomial{}, Rational(1));
}

inline Monomial atom_part(const Monomial& m) {
  Monomial out;
  for (const auto& [g, e] : m)
    if (!g.is_var()) out.emplace(g, e);
  return out;
}

inline Monomial var_part(const Monomial& m) {
  Monomial out;
  for (const auto& [g, e] : m)
    if (g.is_var()) out.emplace(g, e);
  return out;
}

// numerator grouped by its atom factors; values are atom-free polynomials
inline std::map<Monomial, Polynomial, MonomialLess> group_by_atoms(const Polynomial& p) {
  std::map<Monomial, Polynomial, MonomialLess> groups;
  for (const auto& [m, c] : p.terms) groups[atom_part(m)] += Polynomial(var_part(m), c);
  return groups;
}

inline NormalForm make_nf(Polynomial num, Polynomial den) {
  if (den.is_zero()) throw DivisionByZeroExpr();
  if (!atom_free(den)) throw Error("internal: denominator must stay atom-free");
  if (num.is_zero()) return NormalForm{Polynomial(), Polynomial(1L)};
  auto groups = group_by_atoms(num);
  Polynomial var_content;
  for (const auto& [am, vp] : groups) var_content = gcd_polys(var_content, vp);
  Polynomial g = gcd_polys(var_content, den);
  if (!(g.is_constant() && g.constant_value() == 1)) {
    Polynomial reduced;
    for (const auto& [am, vp] : groups)
      reduced += divexact(vp, g) * Polynomial(am, Rational(1));
    num = reduced;
    den = divexact(den, g);
  }
  Rational scale;
  den = make_primitive(den, &scale);
  num = num * (1 / scale);
  return NormalForm{num, den};
}

inline NormalForm nf_from(Polynomial p) { return NormalForm{std::move(p), Polynomial(1L)}; }
inline NormalForm nf_constant(const Rational& c) { return nf_from(Polynomial(c)); }

inline NormalForm nf_neg(const NormalForm& a) { return NormalForm{-a.num, a.den}; }

inline NormalForm nf_add(const NormalForm& a, const NormalForm& b) {
  return make_nf(a.num * b.den + b.num * a.den, a.den * b.den);
}

inline NormalForm nf_sub(const NormalForm& a, const NormalForm& b) { return nf_add(a, nf_neg(b)); }

inline NormalForm nf_mul(const NormalForm& a, const NormalForm& b) {
  return make_nf(a.num * b.num, a.den * b.den);
}

inline NormalForm nf_inv(const NormalForm& a) {
  if (a.num.is_zero()) throw DivisionByZeroExpr();
  if (atom_free(a.num)) return make_nf(a.den, a.num);
  if (a.num.terms.size() != 1)
    throw Error("division by a sum containing radicals is not supported");
  // 1/(c * m * prod atom^k) = prod atom^(root-k) / (c * m * prod base)
  const auto& [m, c] = *a.num.terms.begin();
  Monomial inverted;
  Polynomial den_extra(Monomial(var_part(m)), Rational(1));
  for (const auto& [g, e] : atom_part(m)) {
    if (!atom_free(*g.atom->base))
      throw Error("division by a nested radical is not supported");
    inverted.emplace(g, g.atom->root - e);
    den_extra = den_extra * *g.atom->base;
  }
  Polynomial num = a.den * normalize_monomial(inverted, Rational(1));
  return make_nf(num, den_extra * c);
}

inline NormalForm nf_div(const NormalForm& a, const NormalForm& b) {
  return nf_mul(a, nf_inv(b));
}

inline NormalForm nf_pow_int(const NormalForm& a, long e) {
  if (e < 0) return nf_pow_int(nf_inv(a), -e);
  NormalForm r = nf_constant(1);
  NormalForm base = a;
  unsigned long k = (unsigned long)e;
  while (k) {
    if (k & 1) r = nf_mul(r, base);
    if (k >>= 1) base = nf_mul(base, base);
  }
  return r;
}

// largest h >= 1 with h^t dividing d (d > 0)
inline Integer extract_root_content(Integer d, int t) {
  Integer h;
  mpz_root(h.get_mpz_t(), d.get_mpz_t(), (unsigned long)t);
  while (h > 1) {
    Integer ht;
    mpz_pow_ui(ht.get_mpz_t(), h.get_mpz_t(), (unsigned long)t);
    if (mpz_divisible_p(d.get_mpz_t(), ht.get_mpz_t())) break;
    h -= 1;
  }
  return h < 1 ? Integer(1) : h;
}

// (num/den)^(s/b) with 0 < s < b, gcd(s,b) = 1
inline NormalForm nf_frac_pow(const NormalForm& a, long s, long b) {
  if (a.num.is_zero()) return nf_from(Polynomial());
  Polynomial r = pow(a.num, (unsigned long)s) * pow(a.den, (unsigned long)(b - s));
  Rational c0 = content(r);
  Polynomial r1 = r * (1 / c0);  // integer coefficients, original sign
  int sign = 1;
  if (b % 2 == 1 && leading_coeff(r1) < 0) {
    r1 = -r1;
    sign = -1;
  }
  // fold the rational content into the integer base: u/w -> (u w^(b-1)) / w^b
  Integer u = c0.get_num(), w = c0.get_den();
  Integer d;
  mpz_pow_ui(d.get_mpz_t(), w.get_mpz_t(), (unsigned long)(b - 1));
  d *= u;
  Integer h = extract_root_content(d, (int)b);
  Integer hb;
  mpz_pow_ui(hb.get_mpz_t(), h.get_mpz_t(), (unsigned long)b);
  Integer rest = d / hb;
  Polynomial base = r1 * Rational(rest);
  Rational coeff = Rational(sign) * Rational(h);
  Polynomial num;
  if (base.is_constant() && base.constant_value() == 1) {
    num = Polynomial(coeff);
  } else {
    auto atom = std::make_shared<Atom>(Atom{std::make_shared<Polynomial>(base), (int)b});
    Monomial m;
    m.emplace(Generator{-1, atom}, 1);
    num = Polynomial(m, coeff);
  }
  return make_nf(num, a.den * Rational(w));
}

inline NormalForm nf_pow(const NormalForm& a, const Rational& e) {
  long b = e.get_den().get_si();
  long s = e.get_num().get_si();
  if (b == 1) return nf_pow_int(a, s);
  // split off the integer part with floor division so the fractional part is in (0,1)
  long q = s / b;
  long rm = s % b;
  if (rm < 0) {
    rm += b;
    q -= 1;
  }
  NormalForm frac = nf_frac_pow(a, rm, b);
  if (q == 0) return frac;
  return nf_mul(nf_pow_int(a, q), frac);
}

// ---- derivatives ---------------------------------------------------------

NormalForm derivative(const NormalForm& f, int v);

// chain rule through atoms: d(B^(k/t)) = (k/t) dB B^(k/t)/B
inline NormalForm derivative_poly(const Polynomial& p, int v) {
  NormalForm acc = nf_from(Polynomial());
  for (const auto& [m, c] : p.terms) {
    for (const auto& [g, e] : m) {
      if (g.is_var()) {
        if (g.var != v) continue;
        Monomial rest = m;
        rest.erase(g);
        if (e > 1) rest.emplace(g, e - 1);
        acc = nf_add(acc, nf_from(Polynomial(rest, c * e)));
      } else {
        if (!contains_var(*g.atom->base, v)) continue;
        NormalForm db = derivative_poly(*g.atom->base, v);
        NormalForm factor =
            nf_mul(nf_from(Polynomial(m, c * Rational(e, g.atom->root))), db);
        acc = nf_add(acc, nf_div(factor, nf_from(*g.atom->base)));
      }
    }
  }
  return acc;
}

inline NormalForm derivative(const NormalForm& f, int v) {
  NormalForm dn = derivative_poly(f.num, v);
  Polynomial dd = derivative_atom_free(f.den, v);
  NormalForm top = nf_sub(nf_mul(dn, nf_from(f.den)), nf_from(f.num * dd));
  return make_nf(top.num, top.den * (f.den * f.den));
}

// ---- substitution and evaluation -----------------------------------------

// replacement[i] substitutes source variable i; all entries must be set
inline NormalForm substitute_poly(const Polynomial& p, const std::vector<NormalForm>& replacement) {
  NormalForm acc = nf_from(Polynomial());
  for (const auto& [m, c] : p.terms) {
    NormalForm term = nf_constant(c);
    for (const auto& [g, e] : m) {
      if (g.is_var()) {
        term = nf_mul(term, nf_pow_int(replacement.at((std::size_t)g.var), e));
      } else {
        NormalForm base = substitute_poly(*g.atom->base, replacement);
        term = nf_mul(term, nf_pow(base, Rational(e, g.atom->root)));
      }
    }
    acc = nf_add(acc, term);
  }
  return acc;
}

inline NormalForm substitute_nf(const NormalForm& f, const std::vector<NormalForm>& replacement) {
  return nf_div(substitute_poly(f.num, replacement), substitute_poly(f.den, replacement));
}

inline double evaluate(const NormalForm& f, const std::vector<double>& point) {
  double d = evaluate(f.den, point);
  if (std::abs(d) < 1e-12) throw EvalDomainError("denominator vanishes at the point");
  return evaluate(f.num, point) / d;
}

// ---- printing -------------------------------------------------------------

inline std::string rational_str(const Rational& c) { return c.get_str(); }

std::string poly_str(const Polynomial& p, const std::vector<std::string>& names);

inline std::string exponent_str(const std::string& base, const Rational& e) {
  if (e == 1) return base;
  if (e.get_den() == 1) return base + "^" + e.get_num().get_str();
  return base + "^(" + e.get_str() + ")";
}

inline std::string term_str(const Monomial& m, const Rational& abs_coeff,
                            const std::vector<std::string>& names) {
  // merge integer variable powers with single-variable atom powers so
  // y1 * sqrt(y1) prints as y1^(3/2)
  std::map<int, Rational> var_exp;
  std::vector<std::string> other;
  for (const auto& [g, e] : m) {
    if (g.is_var()) {
      var_exp[g.var] += e;
      continue;
    }
    const Polynomial& base = *g.atom->base;
    int t = g.atom->root;
    if (base.terms.size() == 1) {
      const auto& [bm, bc] = *base.terms.begin();
      if (bc == 1 && bm.size() == 1 && bm.begin()->first.is_var()) {
        var_exp[bm.begin()->first.var] += Rational((long)e * bm.begin()->second, t);
        continue;
      }
    }
    std::string base_s = poly_str(base, names);
    if (t == 2 && e == 1)
      other.push_back("sqrt(" + base_s + ")");
    else
      other.push_back(exponent_str("(" + base_s + ")", Rational(e, t)));
  }
  std::vector<std::string> factors;
  for (const auto& [v, e] : var_exp) factors.push_back(exponent_str(names.at((std::size_t)v), e));
  factors.insert(factors.end(), other.begin(), other.end());
  std::string out;
  if (factors.empty()) return rational_str(abs_coeff);
  if (abs_coeff != 1) {
    out = abs_coeff.get_den() == 1 ? rational_str(abs_coeff) : "(" + rational_str(abs_coeff) + ")";
    out += "*";
  }
  for (std::size_t i = 0; i < factors.size(); ++i) {
    if (i) out += "*";
    out += factors[i];
  }
  return out;
}

inline std::string poly_str(const Polynomial& p, const std::vector<std::string>& names) {
  if (p.is_zero()) return "0";
  std::string out;
  bool first = true;
  for (auto it = p.terms.rbegin(); it != p.terms.rend(); ++it) {
    const Rational& c = it->second;
    bool neg = c < 0;
    if (first) {
      if (neg) out += "-";
      first = false;
    } else {
      out += neg ? " - " : " + ";
    }
    out += term_str(it->first, abs(c), names);
  }
  return out;
}

inline std::string nf_str(const NormalForm& f, const std::vector<std::string>& names) {
  std::string num = poly_str(f.num, names);
  if (f.den.is_constant() && f.den.constant_value() == 1) return num;
  std::string den = poly_str(f.den, names);
  bool den_simple = f.den.terms.size() == 1 && f.den.terms.begin()->second == 1 &&
                    f.den.terms.begin()->first.size() == 1;
  if (f.num.terms.size() > 1) num = "(" + num + ")";
  if (!den_simple) den = "(" + den + ")";
  return num + "/" + den;
}

// ---- Expr -----------------------------------------------------------------

class Expr {
 public:
  Expr() = default;
  Expr(FramePtr frame, NormalForm nf) : frame_(std::move(frame)), nf_(std::move(nf)) {}

  static Expr constant(FramePtr frame, const Rational& c) {
    return Expr(std::move(frame), nf_constant(c));
  }
  static Expr zero(FramePtr frame) { return constant(std::move(frame), Rational(0)); }
  static Expr variable(FramePtr frame, int index) {
    if (index < 0 || (std::size_t)index >= frame->size())
      throw Error("variable index out of frame");
    return Expr(std::move(frame), nf_from(Polynomial::variable(index)));
  }
  static Expr variable(const FramePtr& frame, const std::string& name) {
    int i = frame->index_of(name);
    if (i < 0) throw UnknownSymbol(name);
    return variable(frame, i);
  }

  const FramePtr& frame() const { return frame_; }
  const NormalForm& nf() const { return nf_; }

  bool is_zero_exact() const { return nf_.num.is_zero(); }
  bool is_atom_free() const { return atom_free(nf_.num); }
  bool is_constant() const { return nf_.num.is_constant() && nf_.den.is_constant(); }
  Rational constant_value() const { return nf_.num.constant_value() / nf_.den.constant_value(); }
  bool contains(int var) const {
    return contains_var(nf_.num, var) || contains_var(nf_.den, var);
  }

  Expr pow(const Rational& e) const { return Expr(frame_, nf_pow(nf_, e)); }
  Expr sqrt() const { return pow(Rational(1, 2)); }

  Expr differentiate(int var) const { return Expr(frame_, derivative(nf_, var)); }
  Expr differentiate(const std::string& name) const {
    int i = frame_->index_of(name);
    if (i < 0) throw UnknownSymbol(name);
    return differentiate(i);
  }

  double evaluate(const std::vector<double>& point) const {
    if (point.size() != frame_->size()) throw EvalDomainError("point/frame size mismatch");
    return ocfact::evaluate(nf_, point);
  }

  std::string str() const { return nf_str(nf_, frame_->names); }

  friend Expr operator-(const Expr& a) { return Expr(a.frame_, nf_neg(a.nf_)); }
  friend Expr operator+(const Expr& a, const Expr& b) {
    check(a, b);
    return Expr(a.frame_, nf_add(a.nf_, b.nf_));
  }
  friend Expr operator-(const Expr& a, const Expr& b) {
    check(a, b);
    return Expr(a.frame_, nf_sub(a.nf_, b.nf_));
  }
  friend Expr operator*(const Expr& a, const Expr& b) {
    check(a, b);
    return Expr(a.frame_, nf_mul(a.nf_, b.nf_));
  }
  friend Expr operator/(const Expr& a, const Expr& b) {
    check(a, b);
    return Expr(a.frame_, nf_div(a.nf_, b.nf_));
  }
  friend Expr operator*(const Expr& a, const Rational& c) {
    return Expr(a.frame_, nf_mul(a.nf_, nf_constant(c)));
  }
  friend Expr operator*(const Rational& c, const Expr& a) { return a * c; }

 private:
  static void check(const Expr& a, const Expr& b) {
    if (!same_frame(a.frame_, b.frame_))
      throw Error("operands live on different coordinate frames");
  }

  FramePtr frame_;
  NormalForm nf_;
};

// kept so call sites can state intent; construction already canonicalizes
inline const Expr& simplify(const Expr& e) { return e; }

// substitute by name into the target frame; source symbols without a
// replacement must exist in the target frame under the same name
inline Expr substitute(const Expr& e, const FramePtr& target,
                       const std::map<std::string, Expr>& map) {
  std::vector<NormalForm> replacement;
  const auto& src = e.frame();
  replacement.reserve(src->size());
  for (std::size_t i = 0; i < src->size(); ++i) {
    auto it = map.find(src->names[i]);
    if (it != map.end()) {
      if (!same_frame(it->second.frame(), target))
        throw Error("replacement for '" + src->names[i] + "' is not on the target frame");
      replacement.push_back(it->second.nf());
    } else if (!e.contains((int)i)) {
      replacement.push_back(nf_constant(0));  // never reached
    } else {
      int j = target->index_of(src->names[i]);
      if (j < 0) throw UnknownSymbol(src->names[i]);
      replacement.push_back(nf_from(Polynomial::variable(j)));
    }
  }
  return Expr(target, substitute_nf(e.nf(), replacement));
}

}  // namespace ocfact
