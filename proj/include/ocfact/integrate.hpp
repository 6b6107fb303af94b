#pragma once

// Fixed-step fourth-order Runge-Kutta flow of a symbolic field, trajectory
// mapping, discrete dynamics residuals and conservation drift.

#include <cmath>
#include <vector>

#include "ocfact/expr.hpp"
#include "ocfact/sampling.hpp"

namespace ocfact {

struct Trajectory {
  FramePtr frame;
  double h = 0;
  std::vector<double> times;
  std::vector<std::vector<double>> states;
};

inline std::vector<double> eval_field(const std::vector<Expr>& field,
                                      const std::vector<double>& z) {
  std::vector<double> out(field.size());
  for (std::size_t i = 0; i < field.size(); ++i) out[i] = field[i].evaluate(z);
  return out;
}

inline Trajectory integrate(const std::vector<Expr>& field, const std::vector<double>& init,
                            double T, double h, const std::vector<Expr>& charts = {},
                            double margin = 1e-3) {
  if (field.empty() || h <= 0 || T <= 0) throw Error("flow needs a field, T > 0 and h > 0");
  const FramePtr& frame = field.front().frame();
  if (init.size() != frame->size()) throw Error("initial state does not match the frame");
  if (!on_charts(charts, init, margin)) throw ChartExit(0.0, init);

  Trajectory traj;
  traj.frame = frame;
  traj.h = h;
  traj.times.push_back(0.0);
  traj.states.push_back(init);

  const std::size_t n = init.size();
  long steps = std::lround(T / h);
  if (steps < 1) steps = 1;
  std::vector<double> z = init;
  for (long s = 1; s <= steps; ++s) {
    auto k1 = eval_field(field, z);
    std::vector<double> tmp(n);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * h * k1[i];
    auto k2 = eval_field(field, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + 0.5 * h * k2[i];
    auto k3 = eval_field(field, tmp);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = z[i] + h * k3[i];
    auto k4 = eval_field(field, tmp);
    for (std::size_t i = 0; i < n; ++i)
      z[i] += h / 6.0 * (k1[i] + 2 * k2[i] + 2 * k3[i] + k4[i]);
    double t = (double)s * h;
    if (!on_charts(charts, z, margin)) throw ChartExit(t, z);
    traj.times.push_back(t);
    traj.states.push_back(z);
  }
  return traj;
}

// values of the given functions along the trajectory; row k is time step k
inline std::vector<std::vector<double>> map_trajectory(const Trajectory& traj,
                                                       const std::vector<Expr>& fns) {
  std::vector<std::vector<double>> rows;
  rows.reserve(traj.states.size());
  for (const auto& z : traj.states) {
    std::vector<double> row(fns.size());
    for (std::size_t i = 0; i < fns.size(); ++i) row[i] = fns[i].evaluate(z);
    rows.push_back(std::move(row));
  }
  return rows;
}

// largest deviation of fn along the trajectory from its initial value
inline double conservation_drift(const Trajectory& traj, const Expr& fn) {
  double first = fn.evaluate(traj.states.front());
  double drift = 0;
  for (const auto& z : traj.states) drift = std::max(drift, std::abs(fn.evaluate(z) - first));
  return drift;
}

// largest |central difference of rows - rhs| over interior time steps;
// rows[k][i] are sampled values on a uniform grid with spacing h
inline double residual_dynamics(const std::vector<std::vector<double>>& rows, double h,
                                const std::vector<std::vector<double>>& rhs) {
  if (rows.size() != rhs.size()) throw Error("value and right-hand-side row counts differ");
  double worst = 0;
  for (std::size_t k = 1; k + 1 < rows.size(); ++k) {
    for (std::size_t i = 0; i < rows[k].size(); ++i) {
      double diff = (rows[k + 1][i] - rows[k - 1][i]) / (2 * h);
      worst = std::max(worst, std::abs(diff - rhs[k][i]));
    }
  }
  return worst;
}

}  // namespace ocfact
