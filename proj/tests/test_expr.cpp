#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "ocfact/analysis.hpp"
#include "ocfact/parser.hpp"

using namespace ocfact;

namespace {

bool identical(const Expr& a, const Expr& b) {
  return a.nf().num == b.nf().num && a.nf().den == b.nf().den;
}

const FramePtr kCanon = canonical_frame({"q1", "q2"});
const FramePtr kJoint = joint_frame({"q1", "q2"}, {"u1", "u2"});

Expr P(const std::string& text, const FramePtr& frame = kCanon) {
  return parse_expression(text, frame);
}

}  // namespace

TEST_CASE("parsing and evaluation") {
  Expr h = P("p1*p2/q1 - q1*q2");
  CHECK(h.evaluate({2, 3, 4, 5}) == Catch::Approx(6.0 / 4.0 - 20.0));
  CHECK(P("2^3").constant_value() == 8);
  CHECK(P("q1^-2").evaluate({0, 0, 2, 0}) == Catch::Approx(0.25));
  CHECK(P("q1^(3/2)").evaluate({0, 0, 4, 0}) == Catch::Approx(8.0));
  CHECK(P("q1^(-1/2)").evaluate({0, 0, 4, 0}) == Catch::Approx(0.5));
  CHECK(P("-q1 - -q2").evaluate({0, 0, 3, 5}) == Catch::Approx(2.0));
  CHECK(P("(4/3)*q1^3").evaluate({0, 0, 2, 0}) == Catch::Approx(32.0 / 3.0));
}

TEST_CASE("parse errors") {
  CHECK_THROWS_AS(P("z1 + q1"), UnknownSymbol);
  CHECK_THROWS_AS(P("q1 +"), SyntaxError);
  CHECK_THROWS_AS(P("(q1"), SyntaxError);
  CHECK_THROWS_AS(P("q1^(1/0)"), SyntaxError);
  CHECK_THROWS_AS(P("q1 q2"), SyntaxError);
  CHECK_THROWS_AS(P(""), SyntaxError);
}

TEST_CASE("construction canonicalizes") {
  CHECK(identical(P("q1*(p2/q1)"), P("p2")));
  CHECK(identical(P("(q1^2 - q2^2)/(q1 - q2)"), P("q1 + q2")));
  CHECK(P("q1 + q1 - 2*q1").is_zero_exact());
  CHECK_THROWS_AS(P("1/(q1 - q1)"), DivisionByZeroExpr);
  // deterministic printed form regardless of construction order
  CHECK(P("p1*p2/q1 - q1*q2").str() == "(p1*p2 - q1^2*q2)/q1");
  CHECK(P("- q1*q2 + p1*p2/q1").str() == "(p1*p2 - q1^2*q2)/q1");
}

TEST_CASE("radicals") {
  CHECK(identical(P("sqrt(4*q1)"), P("2*sqrt(q1)")));
  CHECK(identical(P("1/sqrt(q1)"), P("sqrt(q1)/q1")));
  CHECK(identical(P("sqrt(q1)*sqrt(q1)"), P("q1")));
  CHECK(identical(P("q1/sqrt(q1)"), P("sqrt(q1)")));
  CHECK(identical(P("sqrt(q1/4)"), P("sqrt(q1)/2")));
  CHECK_FALSE(identical(P("sqrt(q1^2)"), P("q1")));  // stays opaque
  CHECK_FALSE(P("sqrt(q1^2)").is_atom_free());
  CHECK(identical(P("(sqrt(q1)*sqrt(q2))^2"), P("q1*q2")));
  CHECK(P("sqrt(q1^2)").evaluate({0, 0, 2, 0}) == Catch::Approx(2.0));
  CHECK(P("sqrt(q1^2)").evaluate({0, 0, -2, 0}) == Catch::Approx(2.0));
  CHECK_THROWS_AS(P("1/(1 + sqrt(q1))"), Error);
  const FramePtr fac = factor_lagrangian_frame(1, 1);
  CHECK(parse_expression("y1^(3/2)", fac).str() == "y1^(3/2)");
}

TEST_CASE("printed forms parse back") {
  for (const char* s : {"p1*p2/q1 - q1*q2", "(4/3)*q1^3 + 2*p2^2", "sqrt(q1)/(2*q1)",
                        "q1^(3/2) - sqrt(q2)*p1", "(p1 - p2)/(q1 + q2)"}) {
    Expr e = P(s);
    CHECK(identical(e, P(e.str())));
  }
}

TEST_CASE("differentiation") {
  Expr g = P("p1*u1 - q1*u1*u2", kJoint);
  CHECK(identical(g.differentiate("u1"), P("p1 - q1*u2", kJoint)));
  CHECK(identical(P("p1/q1").differentiate("q1"), P("-p1/q1^2")));
  CHECK(identical(P("sqrt(q1)").differentiate("q1"), P("sqrt(q1)/(2*q1)")));
  CHECK(P("sqrt(q1)").differentiate("q1").evaluate({0, 0, 4, 0}) == Catch::Approx(0.25));
  const FramePtr fac = factor_lagrangian_frame(1, 1);
  CHECK(identical(parse_expression("y1^(3/2)", fac).differentiate("y1"),
                  parse_expression("(3/2)*sqrt(y1)", fac)));
  CHECK(P("p2 + q2").differentiate("p1").is_zero_exact());
}

TEST_CASE("substitution across frames") {
  Expr g = P("p1*u1 - q1*u1*u2 + q2", kJoint);
  std::map<std::string, Expr> synth{{"u1", P("p2/q1")}, {"u2", P("p1/q1")}};
  Expr h = substitute(g, kCanon, synth);
  CHECK(identical(h, P("p1*p2/q1 - p1*p2/q1 + q2")));
  CHECK(identical(h, P("q2")));
  // radical bases are substituted through
  Expr r = substitute(P("sqrt(q1*u1)", kJoint), kCanon, {{"u1", P("q1")}});
  CHECK(identical(r, P("sqrt(q1^2)")));
}

TEST_CASE("evaluation guards") {
  CHECK_THROWS_AS(P("p1/q1").evaluate({1, 0, 0, 0}), EvalDomainError);
  CHECK_THROWS_AS(P("q1").evaluate({1, 2}), EvalDomainError);
  CHECK_THROWS_AS(P("sqrt(q1)").evaluate({0, 0, -1, 0}), EvalDomainError);
}

TEST_CASE("zero verdicts") {
  Verdict yes = is_zero(P("(q1 + q2)^2 - q1^2 - 2*q1*q2 - q2^2"));
  CHECK(yes.truth == Truth::Yes);

  Verdict no = is_zero(P("q1*q2 - 1"));
  CHECK(no.truth == Truth::No);
  REQUIRE(no.witness.has_value());
  CHECK(std::abs(P("q1*q2 - 1").evaluate(*no.witness)) > kZeroTol);

  // |q1| - q1 vanishes only on the q1 > 0 chart
  Expr e = P("sqrt(q1^2) - q1");
  Verdict off_chart = is_zero(e);
  CHECK(off_chart.truth == Truth::No);
  REQUIRE(off_chart.witness.has_value());

  Verdict on_chart = is_zero(e, {P("q1")});
  CHECK(on_chart.truth == Truth::Unknown);
  CHECK(on_chart.samples == 100);
  CHECK(on_chart.zero_samples == on_chart.samples);
}

TEST_CASE("linear stationarity systems") {
  std::vector<int> us{kJoint->index_of("u1"), kJoint->index_of("u2")};

  SECTION("coupled through a coordinate coefficient") {
    std::vector<Expr> eqs{P("p1 - q1*u2", kJoint), P("p2 - q1*u1", kJoint)};
    auto sol = solve_linear(eqs, us);
    REQUIRE(sol.size() == 2);
    CHECK(identical(sol[0], P("p2/q1", kJoint)));
    CHECK(identical(sol[1], P("p1/q1", kJoint)));
  }

  SECTION("single equation") {
    auto sol = solve_linear({P("p2 - p1 - u1", kJoint)}, {kJoint->index_of("u1")});
    REQUIRE(sol.size() == 1);
    CHECK(identical(sol[0], P("p2 - p1", kJoint)));
  }

  SECTION("elimination between rows") {
    std::vector<Expr> eqs{P("u1 + u2 - p1", kJoint), P("u1 - u2 - p2", kJoint)};
    auto sol = solve_linear(eqs, us);
    CHECK(identical(sol[0], P("(p1 + p2)/2", kJoint)));
    CHECK(identical(sol[1], P("(p1 - p2)/2", kJoint)));
  }

  SECTION("rejects quadratic control terms") {
    CHECK_THROWS_AS(solve_linear({P("u1*u1 - p1", kJoint), P("u2 - p2", kJoint)}, us), NotLinear);
  }

  SECTION("reports singular rank") {
    try {
      solve_linear({P("u1 + u2 - p1", kJoint), P("u1 + u2 - p2", kJoint)}, us);
      FAIL("expected Singular");
    } catch (const Singular& s) {
      CHECK(s.rank == 1);
    }
  }

  SECTION("count mismatch") {
    CHECK_THROWS_AS(solve_linear({P("u1 - p1", kJoint)}, us), NotLinear);
  }
}

TEST_CASE("jacobian ranks") {
  auto pts = sample_points(default_plan(kCanon, {}));
  std::vector<int> all{0, 1, 2, 3};

  CHECK(jacobian_rank({P("p1"), P("2*p1")}, all, pts) == 1);
  CHECK(jacobian_rank({P("2*p2"), P("q1^2")}, all, pts) == 2);
  CHECK(jacobian_rank({P("q1"), P("q2"), P("q1 + q2")}, {2, 3}, pts) == 2);
  CHECK(jacobian_rank({P("q1 + q2"), P("q1 - q2")}, {2, 3}, pts) == 2);
  CHECK(jacobian_rank({P("q1*q2")}, {2}, pts) == 1);

  SamplePlan chart_plan = default_plan(kCanon, {P("q1")});
  auto chart_pts = sample_points(chart_plan);
  CHECK(jacobian_rank({P("sqrt(q1)")}, {2}, chart_pts) == 1);
  CHECK(jacobian_rank({P("sqrt(q1)"), P("3*sqrt(q1)")}, {2, 3}, chart_pts) == 1);
}

TEST_CASE("chart-aware sampling") {
  SamplePlan plan = default_plan(kCanon, {P("q1")});
  for (const auto& p : sample_points(plan)) {
    REQUIRE(p.size() == 4);
    CHECK(p[2] >= plan.margin);
  }
  // deterministic for a fixed seed
  CHECK(sample_points(plan) == sample_points(plan));
}

namespace {

Expr random_poly(const FramePtr& f, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coeff(-5, 5), expo(0, 2), nterms(1, 4);
  Expr acc = Expr::zero(f);
  int nt = nterms(rng);
  for (int t = 0; t < nt; ++t) {
    int c = 0;
    while (c == 0) c = coeff(rng);
    Expr term = Expr::constant(f, Rational(c));
    for (std::size_t v = 0; v < f->size(); ++v)
      for (int k = expo(rng); k > 0; --k) term = term * Expr::variable(f, (int)v);
    acc = acc + term;
  }
  return acc;
}

// rational function, optionally carrying a radical factor; smooth and
// bounded on the sampling box
Expr random_expr(const FramePtr& f, std::mt19937_64& rng, bool with_atom) {
  Expr e = random_poly(f, rng);
  std::uniform_int_distribution<int> pick(0, 2);
  switch (pick(rng)) {
    case 0:
      break;
    case 1:
      e = e / parse_expression("q1 + 3", f);
      break;
    default:
      e = e / parse_expression("q1 + q2 + 5", f);
      break;
  }
  if (with_atom) e = e * parse_expression("sqrt(q1 + 3)", f);
  return e;
}

}  // namespace

TEST_CASE("differentiation is linear and satisfies the product rule") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 100; ++i) {
    INFO("case " << i);
    Expr a = random_poly(kCanon, rng), b = random_poly(kCanon, rng);
    int v = (int)(rng() % kCanon->size());
    Expr lin = (a * Rational(3) - b * Rational(2)).differentiate(v) -
               (a.differentiate(v) * Rational(3) - b.differentiate(v) * Rational(2));
    REQUIRE(lin.is_zero_exact());
    Expr prod = (a * b).differentiate(v) - (a.differentiate(v) * b + a * b.differentiate(v));
    REQUIRE(prod.is_zero_exact());
  }
}

TEST_CASE("product rule holds for radical expressions") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 20; ++i) {
    INFO("case " << i);
    Expr a = random_expr(kCanon, rng, true), b = random_expr(kCanon, rng, false);
    int v = (int)(rng() % kCanon->size());
    Expr residual =
        (a * b).differentiate(v) - (a.differentiate(v) * b + a * b.differentiate(v));
    Verdict verdict = is_zero(residual);
    REQUIRE(verdict.truth != Truth::No);
    if (verdict.truth == Truth::Unknown) REQUIRE(verdict.zero_samples == verdict.samples);
  }
}

TEST_CASE("derivatives agree with central differences") {
  std::mt19937_64 rng(13);
  const double h = 1e-5;
  SamplePlan plan = default_plan(kCanon, {});
  plan.count = 5;
  for (int i = 0; i < 40; ++i) {
    INFO("case " << i);
    Expr e = random_expr(kCanon, rng, i % 2 == 0);
    int v = (int)(rng() % kCanon->size());
    Expr de = e.differentiate(v);
    plan.seed = 100 + (unsigned long)i;
    for (const auto& p : sample_points(plan)) {
      auto plus = p, minus = p;
      plus[(std::size_t)v] += h;
      minus[(std::size_t)v] -= h;
      double fd = (e.evaluate(plus) - e.evaluate(minus)) / (2 * h);
      double dv = de.evaluate(p);
      REQUIRE(std::abs(fd - dv) <= 1e-6 * (1.0 + std::abs(dv)));
    }
  }
}

TEST_CASE("simplify is the canonical form") {
  Expr e = P("(q1 + q2)^2 - q1^2");
  CHECK(identical(simplify(e), e));
  CHECK(simplify(e).str() == e.str());
}
