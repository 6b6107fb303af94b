#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "ocfact/integrate.hpp"
#include "ocfact/parser.hpp"
#include "ocfact/symplectic.hpp"

using namespace ocfact;

namespace {

const FramePtr kCircle = canonical_frame({"q1"});

// harmonic oscillator: p' = -q, q' = p, exact flow is a rotation
std::vector<Expr> circle_field() {
  return hamiltonian_field(parse_expression("(1/2)*(p1^2 + q1^2)", kCircle));
}

double circle_error(double h) {
  auto traj = integrate(circle_field(), {0.0, 1.0}, 1.0, h);
  const auto& last = traj.states.back();
  double t = traj.times.back();
  return std::hypot(last[0] + std::sin(t), last[1] - std::cos(t));
}

}  // namespace

TEST_CASE("flow matches the exact rotation") {
  auto traj = integrate(circle_field(), {0.0, 1.0}, 1.0, 1e-3);
  REQUIRE(traj.states.size() == 1001);
  CHECK(traj.times.back() == Catch::Approx(1.0));
  CHECK(traj.states.back()[0] == Catch::Approx(-std::sin(1.0)).margin(1e-9));
  CHECK(traj.states.back()[1] == Catch::Approx(std::cos(1.0)).margin(1e-9));
}

TEST_CASE("step halving reduces the error as a fourth-order method") {
  double ratio = circle_error(0.05) / circle_error(0.025);
  CHECK(ratio >= 12.0);
  CHECK(ratio <= 20.0);
}

TEST_CASE("energy drift stays small") {
  Expr h = parse_expression("(1/2)*(p1^2 + q1^2)", kCircle);
  auto traj = integrate(circle_field(), {0.0, 1.0}, 1.0, 1e-2);
  CHECK(conservation_drift(traj, h) < 1e-7);
}

TEST_CASE("flows are deterministic") {
  auto a = integrate(circle_field(), {0.0, 1.0}, 0.5, 1e-2);
  auto b = integrate(circle_field(), {0.0, 1.0}, 0.5, 1e-2);
  CHECK(a.states == b.states);
  CHECK(a.times == b.times);
}

TEST_CASE("leaving the chart region stops the flow") {
  std::vector<Expr> field{Expr::zero(kCircle), Expr::constant(kCircle, Rational(-1))};
  try {
    integrate(field, {0.0, 0.5}, 1.0, 1e-2, {parse_expression("q1", kCircle)});
    FAIL("expected ChartExit");
  } catch (const ChartExit& e) {
    CHECK(e.t >= 0.49);
    CHECK(e.t <= 0.51);
    REQUIRE(e.state.size() == 2);
    CHECK(e.state[1] < 1e-2);
  }
  // an initial state off the chart is rejected immediately
  CHECK_THROWS_AS(
      integrate(field, {0.0, -1.0}, 1.0, 1e-2, {parse_expression("q1", kCircle)}),
      ChartExit);
}

TEST_CASE("argument guards") {
  CHECK_THROWS_AS(integrate(circle_field(), {0.0, 1.0}, 1.0, 0.0), Error);
  CHECK_THROWS_AS(integrate(circle_field(), {0.0}, 1.0, 1e-2), Error);
  CHECK_THROWS_AS(integrate({}, {}, 1.0, 1e-2), Error);
}

TEST_CASE("mapped trajectories and dynamics residuals") {
  auto traj = integrate(circle_field(), {0.0, 1.0}, 1.0, 1e-2);

  // y = q1^2 obeys y' = 2 q1 p1 along the flow
  auto y_rows = map_trajectory(traj, {parse_expression("q1^2", kCircle)});
  auto rhs_rows = map_trajectory(traj, {parse_expression("2*q1*p1", kCircle)});
  REQUIRE(y_rows.size() == traj.states.size());
  double res = residual_dynamics(y_rows, traj.h, rhs_rows);
  CHECK(res < 1e-3);

  // a function violating the claimed dynamics leaves an order-one residual
  auto bad_rhs = map_trajectory(traj, {parse_expression("q1 + 1", kCircle)});
  CHECK(residual_dynamics(y_rows, traj.h, bad_rhs) > 0.1);

  CHECK_THROWS_AS(residual_dynamics(y_rows, traj.h, {}), Error);
}

TEST_CASE("conserved quantities have near-zero residual dynamics") {
  auto traj = integrate(circle_field(), {0.0, 1.0}, 1.0, 1e-2);
  auto rows = map_trajectory(traj, {parse_expression("p1^2 + q1^2", kCircle)});
  std::vector<std::vector<double>> zero(rows.size(), std::vector<double>{0.0});
  CHECK(residual_dynamics(rows, traj.h, zero) < 1e-6);
}
