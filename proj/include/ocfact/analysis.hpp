#pragma once

// Zero verdicts, exact linear solving and Jacobian ranks. Atom-free
// expressions get exact answers; atom-bearing ones are sampled on the
// declared charts and can only report Unknown-leaning-yes or a definite
// witness, never an exact yes.

#include <Eigen/Dense>
#include <Eigen/SVD>

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "ocfact/sampling.hpp"

namespace ocfact {

constexpr double kZeroTol = 1e-9;
constexpr double kRankTol = 1e-8;  // relative to the largest singular value

enum class Truth { Yes, No, Unknown };

struct Verdict {
  Truth truth = Truth::Unknown;
  int samples = 0;
  int zero_samples = 0;
  double max_abs = 0;
  std::optional<std::vector<double>> witness;
  std::string note;

  bool definite_no() const { return truth == Truth::No; }
  bool acceptable() const { return truth != Truth::No; }

  std::string str() const {
    std::ostringstream os;
    switch (truth) {
      case Truth::Yes:
        os << "yes";
        break;
      case Truth::No:
        os << "no";
        break;
      case Truth::Unknown:
        os << "unknown (" << zero_samples << "/" << samples << " samples zero)";
        break;
    }
    if (!note.empty()) os << " [" << note << "]";
    return os.str();
  }
};

inline SamplePlan default_plan(const FramePtr& frame, const std::vector<Expr>& charts,
                               int count = 100, unsigned long seed = 42) {
  SamplePlan plan;
  plan.frame = frame;
  plan.charts = charts;
  plan.count = count;
  plan.seed = seed;
  return plan;
}

// evaluates e at plan.count chart points, redrawing on domain errors
inline Verdict sampled_zero_verdict(const Expr& e, const SamplePlan& plan) {
  Verdict v;
  PointStream stream(plan);
  int redraws_left = 10 * plan.count;
  while (v.samples < plan.count) {
    auto p = stream.next();
    double val;
    try {
      val = e.evaluate(p);
    } catch (const EvalDomainError&) {
      if (--redraws_left < 0)
        throw ExhaustedSampling("expression undefined at almost all sampled points");
      continue;
    }
    ++v.samples;
    double a = std::abs(val);
    if (a > v.max_abs) v.max_abs = a;
    if (a <= kZeroTol) {
      ++v.zero_samples;
    } else if (!v.witness) {
      v.witness = p;
    }
  }
  v.truth = v.witness ? Truth::No : Truth::Unknown;
  return v;
}

inline Verdict is_zero(const Expr& e, const std::vector<Expr>& charts = {},
                       int samples = 100, unsigned long seed = 42) {
  if (e.is_atom_free()) {
    Verdict v;
    if (e.is_zero_exact()) {
      v.truth = Truth::Yes;
      return v;
    }
    v.truth = Truth::No;
    // exact verdict; sampling only decorates it with a witness point
    try {
      Verdict s = sampled_zero_verdict(e, default_plan(e.frame(), charts, samples, seed));
      v.witness = s.witness;
      v.max_abs = s.max_abs;
      v.samples = s.samples;
      v.zero_samples = s.zero_samples;
    } catch (const ExhaustedSampling&) {
    }
    return v;
  }
  return sampled_zero_verdict(e, default_plan(e.frame(), charts, samples, seed));
}

// ---- exact linear solving -------------------------------------------------

// unique solution of equations affine in the unknowns, by exact elimination
inline std::vector<Expr> solve_linear(const std::vector<Expr>& equations,
                                      const std::vector<int>& unknowns,
                                      const std::vector<Expr>& charts = {}) {
  const std::size_t k = unknowns.size();
  if (equations.size() != k)
    throw NotLinear("expected as many equations as unknowns");
  if (k == 0) return {};
  const FramePtr& frame = equations.front().frame();

  std::map<std::string, Expr> to_zero;
  for (int u : unknowns) to_zero.emplace(frame->names[(std::size_t)u], Expr::zero(frame));

  std::vector<std::vector<Expr>> m(k);  // rows: coefficients then rhs
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      Expr c = equations[i].differentiate(unknowns[j]);
      for (int u : unknowns)
        if (c.contains(u))
          throw NotLinear("equation " + std::to_string(i + 1) +
                          " is not affine in the unknowns");
      m[i].push_back(c);
    }
    m[i].push_back(-substitute(equations[i], frame, to_zero));  // rhs
  }

  int rank = 0;
  std::vector<std::size_t> pivot_row(k, SIZE_MAX);
  std::size_t next_row = 0;
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t chosen = SIZE_MAX;
    for (std::size_t r = next_row; r < k; ++r) {
      if (is_zero(m[r][col], charts).definite_no()) {
        chosen = r;
        break;
      }
    }
    if (chosen == SIZE_MAX) continue;
    std::swap(m[chosen], m[next_row]);
    for (std::size_t r = 0; r < k; ++r) {
      if (r == next_row) continue;
      if (m[r][col].is_zero_exact()) continue;
      Expr factor = m[r][col] / m[next_row][col];
      for (std::size_t c2 = col; c2 <= k; ++c2)
        m[r][c2] = m[r][c2] - factor * m[next_row][c2];
    }
    pivot_row[col] = next_row;
    ++next_row;
    ++rank;
  }
  if (rank < (int)k)
    throw Singular("stationarity system is singular (rank " + std::to_string(rank) + " of " +
                       std::to_string(k) + ")",
                   rank);
  std::vector<Expr> solution;
  solution.reserve(k);
  for (std::size_t col = 0; col < k; ++col) {
    const auto& row = m[pivot_row[col]];
    solution.push_back(row[k] / row[col]);
  }
  return solution;
}

// ---- Jacobian rank ----------------------------------------------------------

inline std::vector<std::vector<Expr>> jacobian(const std::vector<Expr>& fns,
                                               const std::vector<int>& vars) {
  std::vector<std::vector<Expr>> j;
  j.reserve(fns.size());
  for (const auto& f : fns) {
    std::vector<Expr> row;
    row.reserve(vars.size());
    for (int v : vars) row.push_back(f.differentiate(v));
    j.push_back(std::move(row));
  }
  return j;
}

inline int numeric_rank(const Eigen::MatrixXd& m) {
  if (m.rows() == 0 || m.cols() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  if (sv.size() == 0 || sv(0) <= 0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i)
    if (sv(i) > kRankTol * sv(0)) ++rank;
  return rank;
}

inline Expr expr_determinant(const std::vector<std::vector<Expr>>& m, std::vector<int> cols,
                             std::size_t row0, const FramePtr& frame) {
  if (cols.size() == 1) return m[row0][(std::size_t)cols[0]];
  Expr det = Expr::zero(frame);
  for (std::size_t i = 0; i < cols.size(); ++i) {
    std::vector<int> rest;
    for (std::size_t j = 0; j < cols.size(); ++j)
      if (j != i) rest.push_back(cols[j]);
    Expr minor = expr_determinant(m, rest, row0 + 1, frame);
    Expr term = m[row0][(std::size_t)cols[i]] * minor;
    det = (i % 2 == 0) ? det + term : det - term;
  }
  return det;
}

// generic rank via exact minors; requires atom-free entries
inline int symbolic_rank(const std::vector<std::vector<Expr>>& j, const FramePtr& frame) {
  const std::size_t r = j.size(), c = r ? j[0].size() : 0;
  std::size_t kmax = std::min(r, c);
  for (std::size_t k = kmax; k >= 1; --k) {
    std::vector<std::size_t> rows(k), cols(k);
    // enumerate k-subsets of rows and columns
    std::vector<std::size_t> ri(k), ci(k);
    for (std::size_t i = 0; i < k; ++i) ri[i] = i;
    while (true) {
      for (std::size_t i = 0; i < k; ++i) ci[i] = i;
      while (true) {
        std::vector<std::vector<Expr>> sub;
        for (std::size_t a = 0; a < k; ++a) {
          std::vector<Expr> row;
          for (std::size_t b = 0; b < k; ++b) row.push_back(j[ri[a]][ci[b]]);
          sub.push_back(std::move(row));
        }
        std::vector<int> all(k);
        for (std::size_t b = 0; b < k; ++b) all[b] = (int)b;
        if (!expr_determinant(sub, all, 0, frame).is_zero_exact()) return (int)k;
        // next column subset
        std::size_t pos = k;
        while (pos > 0 && ci[pos - 1] == c - k + pos - 1) --pos;
        if (pos == 0) break;
        ++ci[pos - 1];
        for (std::size_t q = pos; q < k; ++q) ci[q] = ci[q - 1] + 1;
      }
      std::size_t pos = k;
      while (pos > 0 && ri[pos - 1] == r - k + pos - 1) --pos;
      if (pos == 0) break;
      ++ri[pos - 1];
      for (std::size_t q = pos; q < k; ++q) ri[q] = ri[q - 1] + 1;
    }
  }
  return 0;
}

// rank of the Jacobian matrix evaluated at one point
inline int rank_at_point(const std::vector<std::vector<Expr>>& j,
                         const std::vector<double>& point) {
  if (j.empty() || j[0].empty()) return 0;
  Eigen::MatrixXd m((Eigen::Index)j.size(), (Eigen::Index)j[0].size());
  for (std::size_t r = 0; r < j.size(); ++r)
    for (std::size_t c = 0; c < j[r].size(); ++c)
      m((Eigen::Index)r, (Eigen::Index)c) = j[r][c].evaluate(point);
  return numeric_rank(m);
}

inline int rank_at_point(const std::vector<Expr>& fns, const std::vector<int>& vars,
                         const std::vector<double>& point) {
  return rank_at_point(jacobian(fns, vars), point);
}

// generic rank: max numeric rank over the points, refined by exact minors
// for small atom-free Jacobians
inline int jacobian_rank(const std::vector<Expr>& fns, const std::vector<int>& vars,
                         const std::vector<std::vector<double>>& points) {
  if (fns.empty() || vars.empty()) return 0;
  auto j = jacobian(fns, vars);
  int best = 0;
  int usable = 0;
  for (const auto& p : points) {
    Eigen::MatrixXd m((Eigen::Index)fns.size(), (Eigen::Index)vars.size());
    bool ok = true;
    for (std::size_t r = 0; r < fns.size() && ok; ++r)
      for (std::size_t c = 0; c < vars.size(); ++c) {
        try {
          m((Eigen::Index)r, (Eigen::Index)c) = j[r][c].evaluate(p);
        } catch (const EvalDomainError&) {
          ok = false;
          break;
        }
      }
    if (!ok) continue;
    ++usable;
    best = std::max(best, numeric_rank(m));
  }
  bool small = std::min(fns.size(), vars.size()) <= 4;
  bool clean = true;
  for (const auto& row : j)
    for (const auto& e : row) clean = clean && e.is_atom_free();
  if (small && clean) best = std::max(best, symbolic_rank(j, fns.front().frame()));
  if (usable == 0 && !(small && clean))
    throw EvalDomainError("Jacobian could not be evaluated at any sample point");
  return best;
}

}  // namespace ocfact
