#pragma once

// Deterministic chart-aware point sampling. Every emitted point satisfies
// each chart expression >= margin; points near singular loci of evaluated
// expressions are excluded by rejection in the consumers (evaluation throws
// EvalDomainError, the point is redrawn).

#include <random>
#include <vector>

#include "ocfact/expr.hpp"

namespace ocfact {

struct SamplePlan {
  FramePtr frame;
  int count = 100;
  unsigned long seed = 42;
  std::vector<std::pair<double, double>> box;  // per symbol; defaults to [-2,2]
  std::vector<Expr> charts;                    // each required >= margin
  double margin = 1e-3;

  std::pair<double, double> bounds(std::size_t i) const {
    if (i < box.size()) return box[i];
    return {-2.0, 2.0};
  }
};

inline bool on_charts(const std::vector<Expr>& charts, const std::vector<double>& point,
                      double margin) {
  for (const auto& c : charts) {
    try {
      if (c.evaluate(point) < margin) return false;
    } catch (const EvalDomainError&) {
      return false;
    }
  }
  return true;
}

// draws one candidate point; chart rejection is the caller's loop
inline std::vector<double> draw_point(const SamplePlan& plan, std::mt19937_64& rng) {
  std::vector<double> p(plan.frame->size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    auto [lo, hi] = plan.bounds(i);
    p[i] = std::uniform_real_distribution<double>(lo, hi)(rng);
  }
  return p;
}

// streaming sampler so verdicts can redraw on evaluation-domain failures
// without disturbing determinism for a fixed seed
class PointStream {
 public:
  explicit PointStream(const SamplePlan& plan) : plan_(plan), rng_(plan.seed) {}

  std::vector<double> next() {
    for (int attempt = 0; attempt < kMaxAttempts; ++attempt) {
      auto p = draw_point(plan_, rng_);
      if (on_charts(plan_.charts, p, plan_.margin)) return p;
    }
    throw ExhaustedSampling("could not find a point satisfying the charts with margin " +
                            std::to_string(plan_.margin));
  }

 private:
  static constexpr int kMaxAttempts = 100000;
  SamplePlan plan_;
  std::mt19937_64 rng_;
};

inline std::vector<std::vector<double>> sample_points(const SamplePlan& plan) {
  PointStream stream(plan);
  std::vector<std::vector<double>> out;
  out.reserve((std::size_t)plan.count);
  for (int i = 0; i < plan.count; ++i) out.push_back(stream.next());
  return out;
}

}  // namespace ocfact
