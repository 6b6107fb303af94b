#pragma once

// Differential one-forms with expression coefficients: component i
// multiplies the differential of frame symbol i.

#include <string>
#include <vector>

#include "ocfact/expr.hpp"

namespace ocfact {

struct OneForm {
  FramePtr frame;
  std::vector<Expr> a;

  static OneForm zero(const FramePtr& frame) {
    OneForm w;
    w.frame = frame;
    w.a.assign(frame->size(), Expr::zero(frame));
    return w;
  }

  bool is_zero_exact() const {
    for (const auto& c : a)
      if (!c.is_zero_exact()) return false;
    return true;
  }

  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < a.size(); ++i) {
      if (a[i].is_zero_exact()) continue;
      if (!out.empty()) out += " + ";
      out += "(" + a[i].str() + ") d" + frame->names[i];
    }
    return out.empty() ? "0" : out;
  }
};

inline void check_form(const OneForm& w, const OneForm& v) {
  if (!same_frame(w.frame, v.frame)) throw Error("one-forms live on different coordinate frames");
}

inline OneForm operator+(const OneForm& w, const OneForm& v) {
  check_form(w, v);
  OneForm r = w;
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = r.a[i] + v.a[i];
  return r;
}

inline OneForm operator-(const OneForm& w, const OneForm& v) {
  check_form(w, v);
  OneForm r = w;
  for (std::size_t i = 0; i < r.a.size(); ++i) r.a[i] = r.a[i] - v.a[i];
  return r;
}

inline OneForm operator-(const OneForm& w) {
  OneForm r = w;
  for (auto& c : r.a) c = -c;
  return r;
}

inline OneForm operator*(const Expr& f, const OneForm& w) {
  OneForm r = w;
  for (auto& c : r.a) c = f * c;
  return r;
}

// exterior derivative of a function: d f = sum_i (df/dz^i) dz^i
inline OneForm d(const Expr& f) {
  OneForm w = OneForm::zero(f.frame());
  for (std::size_t i = 0; i < w.a.size(); ++i) w.a[i] = f.differentiate((int)i);
  return w;
}

}  // namespace ocfact
