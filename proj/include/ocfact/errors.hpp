#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ocfact {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SyntaxError : Error {
  explicit SyntaxError(const std::string& msg) : Error(msg), pos(0) {}
  SyntaxError(std::size_t pos, const std::string& expected, const std::string& got)
      : Error("syntax error at position " + std::to_string(pos) + ": expected " + expected +
              ", got '" + got + "'"),
        pos(pos), expected(expected) {}
  std::size_t pos;
  std::string expected;
};

struct UnknownSymbol : Error {
  explicit UnknownSymbol(const std::string& name)
      : Error("unknown symbol '" + name + "'"), name(name) {}
  std::string name;
};

struct DivisionByZeroExpr : Error {
  DivisionByZeroExpr() : Error("division by an expression that simplifies to zero") {}
};

struct EvalDomainError : Error {
  using Error::Error;
};

struct NotLinear : Error {
  using Error::Error;
};

struct Singular : Error {
  Singular(const std::string& what, int rank) : Error(what), rank(rank) {}
  int rank;
};

struct NotClosed : Error {
  using Error::Error;
};

struct NonIntegrableTerm : Error {
  using Error::Error;
};

struct FiberObstruction : Error {
  using Error::Error;
};

struct EliminationFailure : Error {
  using Error::Error;
};

struct ChartExit : Error {
  ChartExit(double t, std::vector<double> state)
      : Error("trajectory left the chart region at t = " + std::to_string(t)),
        t(t), state(std::move(state)) {}
  double t;
  std::vector<double> state;
};

struct ExhaustedSampling : Error {
  using Error::Error;
};

struct DegenerateSystem : Error {
  using Error::Error;
};

struct SingularPoint : Error {
  using Error::Error;
};

struct RankUnstable : Error {
  RankUnstable(int a, int b)
      : Error("iterated-derivative rank is not locally constant: " + std::to_string(a) +
              " vs " + std::to_string(b)),
        rank_a(a), rank_b(b) {}
  int rank_a, rank_b;
};

}  // namespace ocfact
