#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include "etv/expr.hpp"

using etv::Expr;
using etv::parse_expr;

namespace {

const std::vector<std::string> kXY = {"x", "y"};
const std::vector<std::string> kXYZ = {"x", "y", "z"};

double eval2(const Expr& e, double x, double y) {
  double p[2] = {x, y};
  return e.eval(p);
}

// Independent derivative oracle: central difference with step 1e-4.
double fd_oracle(const Expr& e, std::vector<double> x, int k, double h = 1e-4) {
  std::vector<double> xp = x, xm = x;
  xp[k] += h;
  xm[k] -= h;
  return (e.eval(xp) - e.eval(xm)) / (2 * h);
}

}  // namespace

TEST_CASE("parse evaluates arithmetic with the documented precedence") {
  CHECK(eval2(parse_expr("1 + 2*3", kXY), 0, 0) == 7.0);
  CHECK(eval2(parse_expr("6/3/2", kXY), 0, 0) == 1.0);        // left associative
  CHECK(eval2(parse_expr("2^3^2", kXY), 0, 0) == 512.0);      // right associative
  CHECK(eval2(parse_expr("-2^2", kXY), 0, 0) == -4.0);        // '^' above unary minus
  CHECK(eval2(parse_expr("2^-1", kXY), 0, 0) == 0.5);         // signed exponent
  CHECK(eval2(parse_expr("(1+2)*3", kXY), 0, 0) == 9.0);
  CHECK(eval2(parse_expr("2e3 + .5", kXY), 0, 0) == 2000.5);
  CHECK(eval2(parse_expr("1.5e-2", kXY), 0, 0) == 0.015);
}

TEST_CASE("named constants and calls evaluate") {
  CHECK(eval2(parse_expr("pi", kXY), 0, 0) == 3.141592653589793);
  CHECK(eval2(parse_expr("e", kXY), 0, 0) == std::exp(1.0));
  CHECK(eval2(parse_expr("sin(pi/2)", kXY), 0, 0) == Catch::Approx(1.0).margin(1e-15));
  CHECK(eval2(parse_expr("pow(x, 3)", kXY), 2, 0) == 8.0);
  CHECK(eval2(parse_expr("sqrt(x^2 + y^2)", kXY), 3, 4) == Catch::Approx(5.0).margin(1e-14));
  CHECK(eval2(parse_expr("tanh(0)", kXY), 0, 0) == 0.0);
}

TEST_CASE("parse errors carry byte offsets") {
  try {
    parse_expr("x + + y", kXY);
    FAIL("expected SyntaxError");
  } catch (const etv::SyntaxError& err) {
    CHECK(err.offset == 4);
  }

  try {
    parse_expr("x + q", kXY);
    FAIL("expected UnknownIdentifier");
  } catch (const etv::UnknownIdentifier& err) {
    CHECK(err.name == "q");
    CHECK(err.offset == 4);
  }

  CHECK_THROWS_AS(parse_expr("pow(x)", kXY), etv::ArityError);
  CHECK_THROWS_AS(parse_expr("sin(x, y)", kXY), etv::ArityError);
  CHECK_THROWS_AS(parse_expr("x + ", kXY), etv::SyntaxError);
  CHECK_THROWS_AS(parse_expr("(x", kXY), etv::SyntaxError);
  CHECK_THROWS_AS(parse_expr("x y", kXY), etv::SyntaxError);
}

TEST_CASE("eval throws DomainError for log/sqrt of negative arguments") {
  CHECK_THROWS_AS(eval2(parse_expr("log(-1)", kXY), 0, 0), etv::DomainError);
  CHECK_THROWS_AS(eval2(parse_expr("sqrt(x)", kXY), -2.0, 0), etv::DomainError);
  // Nonfinite values propagate rather than throwing.
  CHECK(std::isinf(eval2(parse_expr("1/x", kXY), 0.0, 0)));
}

TEST_CASE("diff matches a central-difference oracle on elementary functions") {
  struct Case {
    const char* src;
    double x, y;
  };
  const Case cases[] = {
      {"sin(x)", 0.3, 0.0},
      {"exp(2*x)", 0.0, 0.0},
      {"x^2 * y + cos(x*y)", 0.7, -0.4},
      {"tan(x) + sinh(y)", 0.5, 0.8},
      {"log(x + 2) * sqrt(y + 3)", 0.9, 0.2},
      {"tanh(x*y)", 1.1, 0.6},
      {"x^x", 1.5, 0.0},  // general power rule
      {"cosh(x) / (1 + y^2)", -0.3, 0.4},
  };
  for (const auto& c : cases) {
    Expr e = parse_expr(c.src, kXY);
    std::vector<double> p = {c.x, c.y};
    for (int k = 0; k < 2; ++k) {
      double exact = e.diff(k).eval(p);
      double approx = fd_oracle(e, p, k);
      double scale = std::max(1.0, std::abs(exact));
      INFO(c.src << " d/d" << kXY[k]);
      CHECK(std::abs(exact - approx) / scale < 1e-7);
    }
  }
  // Frozen oracle value: d/dx exp(2x) at 0 is 2.
  CHECK(parse_expr("exp(2*x)", kXY).diff(0).eval(std::vector<double>{0.0, 0.0}) ==
        Catch::Approx(2.0).margin(1e-14));
}

TEST_CASE("diff is linear") {
  Expr f = parse_expr("sin(x)*y + x^3", kXY);
  Expr g = parse_expr("exp(x*y) - y^2", kXY);
  Expr combo = Expr::number(2.5) * f - Expr::number(1.25) * g;
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    std::vector<double> p = {u(rng), u(rng)};
    for (int k = 0; k < 2; ++k) {
      double lhs = combo.diff(k).eval(p);
      double rhs = 2.5 * f.diff(k).eval(p) - 1.25 * g.diff(k).eval(p);
      CHECK(std::abs(lhs - rhs) <= 1e-12 * std::max(1.0, std::abs(rhs)));
    }
  }
}

TEST_CASE("mixed partials commute numerically") {
  Expr f = parse_expr("sin(x*y) + x^2*y^3 + exp(x - y)", kXY);
  Expr dxy = f.diff(0).diff(1);
  Expr dyx = f.diff(1).diff(0);
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> p = {u(rng), u(rng)};
    double a = dxy.eval(p), b = dyx.eval(p);
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("simplify folds constants and applies 0/1 identities") {
  CHECK(parse_expr("0*x + 1*y", kXY).simplified().str() == "y");
  CHECK(parse_expr("x^1", kXY).simplified().str() == "x");
  CHECK(parse_expr("x^0", kXY).simplified().str() == "1");
  CHECK(parse_expr("x - 0", kXY).simplified().str() == "x");
  CHECK(parse_expr("2*3 + 1", kXY).simplified().str() == "7");
  CHECK(parse_expr("x/1", kXY).simplified().str() == "x");
  // Like-power merging.
  CHECK(parse_expr("x^2 * x^3", kXY).simplified().str() == "(x ^ 5)");
  // Simplification is value-preserving. Power merges may change the rounding
  // path (x^2*x vs x^3), so compare with a few-ulp tolerance, not bit-exactly.
  Expr f = parse_expr("(x + 0)*(1*y) + 0/3 + sin(x)*0 + x^2*x", kXY);
  Expr s = f.simplified();
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  for (int i = 0; i < 50; ++i) {
    std::vector<double> p = {u(rng), u(rng)};
    double a = f.eval(p), b = s.eval(p);
    CHECK(std::abs(a - b) <= 1e-14 * std::max(1.0, std::abs(a)));
  }
}

TEST_CASE("simplify does not fold domain-violating constants") {
  // log(-1) must still throw at eval time, not produce NaN at simplify time.
  Expr f = parse_expr("log(0 - 1)", kXY).simplified();
  CHECK_THROWS_AS(f.eval(std::vector<double>{0.0, 0.0}), etv::DomainError);
}

namespace {

// Random expression generator for the round-trip property.
Expr random_expr(std::mt19937& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 3 : 9);
  std::uniform_real_distribution<double> num(-3.0, 3.0);
  std::uniform_int_distribution<int> coord(0, 2);
  switch (pick(rng)) {
    case 0: return Expr::number(num(rng));
    case 1: {
      int c = coord(rng);
      return Expr::coord(c, kXYZ[c]);
    }
    case 2: return Expr::pi();
    case 3: return Expr::euler();
    case 4: return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 5: return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 6: return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    case 7: return random_expr(rng, depth - 1) / random_expr(rng, depth - 1);
    case 8: {
      int f = std::uniform_int_distribution<int>(0, 5)(rng);
      Expr a = random_expr(rng, depth - 1);
      switch (f) {
        case 0: return sin(a);
        case 1: return cos(a);
        case 2: return tanh(a);
        case 3: return etv::exp(a);
        case 4: return sinh(a);
        default: return etv::cos(a) * etv::sin(a);
      }
    }
    default: return pow(random_expr(rng, depth - 1), Expr::number(double(coord(rng) + 1)));
  }
}

}  // namespace

TEST_CASE("print/parse round-trip reproduces values to the last bit") {
  std::mt19937 rng(20260822);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  int coords_hit = 0;
  for (int trial = 0; trial < 100; ++trial) {
    Expr e = random_expr(rng, 4);
    Expr back = parse_expr(e.str(), kXYZ);
    std::vector<double> p = {u(rng), u(rng), u(rng)};
    double v1 = e.eval(p);
    double v2 = back.eval(p);
    if (std::isnan(v1)) {
      CHECK(std::isnan(v2));
    } else {
      CHECK(v1 == v2);  // bit-exact
    }
    if (!e.is_constant()) ++coords_hit;
  }
  CHECK(coords_hit > 20);  // the generator actually exercises coordinates
}

TEST_CASE("round-trip preserves awkward numeric literals") {
  for (double v : {0.1, 1.0 / 3.0, 1e-17, 123456789.123456789, 2.2250738585072014e-308}) {
    Expr e = Expr::number(v);
    CHECK(parse_expr(e.str(), kXY).eval(std::vector<double>{0, 0}) == v);
  }
}

TEST_CASE("depends_on and is_constant report coordinate usage") {
  Expr f = parse_expr("sin(x) + 2", kXY);
  CHECK(f.depends_on(0));
  CHECK(!f.depends_on(1));
  CHECK(!f.is_constant());
  CHECK(parse_expr("pi * 2 + e", kXY).is_constant());
}
