#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "etv/chart.hpp"

using namespace etv;

namespace {

// Spherical coordinates on a region of R^3: g = diag(1, r^2, r^2 sin^2 th).
Chart spherical3() {
  std::vector<std::string> coords = {"r", "th", "ph"};
  Expr r = parse_expr("r", coords);
  Expr one = Expr::number(1.0);
  Expr g_thth = parse_expr("r^2", coords);
  Expr g_phph = parse_expr("r^2 * sin(th)^2", coords);
  return Chart::diagonal("spherical3", coords, {one, g_thth, g_phph},
                         {{0.5, 2.0}, {0.4, 2.7}, {0.1, 3.0}});
}

// FD oracle for d/dx_k of a metric entry, step 1e-5.
double fd_entry(const Chart& c, int i, int j, int k, Point p, double h = 1e-5) {
  Point pp = p, pm = p;
  pp[k] += h;
  pm[k] -= h;
  return (c.metric_entry(i, j).eval(pp) - c.metric_entry(i, j).eval(pm)) / (2 * h);
}

}  // namespace

TEST_CASE("chart rejects bad construction") {
  std::vector<std::string> two = {"x", "y"};
  CHECK_THROWS_AS(Chart::diagonal("flat2", two, {Expr::number(1), Expr::number(1)},
                                  {{0, 1}, {0, 1}}),
                  DimensionError);
  std::vector<std::string> three = {"x", "y", "z"};
  CHECK_THROWS_AS(Chart::diagonal("bad", three,
                                  {Expr::number(1), Expr::number(1), Expr::number(1)},
                                  {{0, 1}, {0, 1}}),  // missing one interval
                  DimensionError);
  CHECK_THROWS_AS(Chart::diagonal("empty", three,
                                  {Expr::number(1), Expr::number(1), Expr::number(1)},
                                  {{0, 1}, {1, 1}, {0, 1}}),
                  DimensionError);
}

TEST_CASE("metric evaluation checks the domain and positive definiteness") {
  Chart c = spherical3();
  CHECK_THROWS_AS(c.metric_at({0.1, 1.0, 1.0}), OutOfDomain);  // r below domain

  std::vector<std::string> coords = {"x", "y", "z"};
  Chart bad = Chart::diagonal("indefinite", coords,
                              {Expr::number(-1), Expr::number(1), Expr::number(1)},
                              {{-1, 1}, {-1, 1}, {-1, 1}});
  for (const Point& p : bad.sample(8, 1))
    CHECK_THROWS_AS(bad.metric_at(p), NotPositiveDefinite);
}

TEST_CASE("inverse metric satisfies g*ginv = I") {
  Chart c = spherical3();
  for (const Point& p : c.sample(16, 3)) {
    MetricData md = c.metric_data_at(p);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        double s = 0.0;
        for (int k = 0; k < 3; ++k) s += md.g[i * 3 + k] * md.ginv[k * 3 + j];
        CHECK(std::abs(s - (i == j ? 1 : 0)) < 1e-12);
      }
    // closed-form inverse of the diagonal metric
    CHECK(md.ginv[0] == Catch::Approx(1.0).margin(1e-14));
    CHECK(md.ginv[4] == Catch::Approx(1.0 / (p[0] * p[0])).epsilon(1e-12));
    double s2 = std::sin(p[1]) * std::sin(p[1]);
    CHECK(md.ginv[8] == Catch::Approx(1.0 / (p[0] * p[0] * s2)).epsilon(1e-12));
  }
}

TEST_CASE("cached metric partials match a finite-difference oracle") {
  Chart c = spherical3();
  Point p = {1.3, 0.9, 2.0};
  auto d1 = c.metric_partials_at(p, 1);
  const int m = 3;
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double exact = d1[(k * m + i) * m + j];
        double approx = fd_entry(c, i, j, k, p);
        CHECK(std::abs(exact - approx) < 1e-8 * std::max(1.0, std::abs(exact)));
      }

  // order-2 spot checks: d^2/dr^2 g_thth = 2, d^2/dth^2 g_phph = 2 r^2 cos(2 th)
  auto d2 = c.metric_partials_at(p, 2);
  auto at2 = [&](int k, int l, int i, int j) { return d2[((k * m + l) * m + i) * m + j]; };
  CHECK(at2(0, 0, 1, 1) == Catch::Approx(2.0).margin(1e-12));
  CHECK(at2(1, 1, 2, 2) ==
        Catch::Approx(2.0 * p[0] * p[0] * std::cos(2.0 * p[1])).epsilon(1e-12));
  // symmetry of mixed derivatives in the cache layout
  CHECK(at2(0, 1, 2, 2) == at2(1, 0, 2, 2));

  // order-3 spot check: d^3/dth^3 g_phph = -4 r^2 sin(2 th)
  auto d3 = c.metric_partials_at(p, 3);
  auto at3 = [&](int k, int l, int n, int i, int j) {
    return d3[(((k * m + l) * m + n) * m + i) * m + j];
  };
  CHECK(at3(1, 1, 1, 2, 2) ==
        Catch::Approx(-4.0 * p[0] * p[0] * std::sin(2.0 * p[1])).epsilon(1e-11));
  CHECK(at3(0, 1, 0, 2, 2) == at3(1, 0, 0, 2, 2));
}

TEST_CASE("sampler is deterministic, seed-sensitive, and respects margins") {
  Chart c = spherical3();
  auto a = c.sample(64, 42);
  auto b = c.sample(64, 42);
  CHECK(a == b);  // bit-identical

  auto d = c.sample(64, 43);
  CHECK(a != d);

  for (const Point& p : a) {
    for (int k = 0; k < 3; ++k) {
      const Interval& iv = c.domain(k);
      double w = iv.width();
      CHECK(p[k] >= iv.lo + 0.05 * w - 1e-12);
      CHECK(p[k] <= iv.hi - 0.05 * w + 1e-12);
    }
  }

  // points are distinct
  std::set<std::vector<double>> uniq(a.begin(), a.end());
  CHECK(uniq.size() == a.size());
}

TEST_CASE("symbolic Laplacian and gradient norm match closed forms") {
  std::vector<std::string> xyz = {"x", "y", "z"};
  Chart flat = Chart::diagonal("flat3", xyz,
                               {Expr::number(1), Expr::number(1), Expr::number(1)},
                               {{-1, 1}, {-1, 1}, {-1, 1}});
  Expr f = parse_expr("x^2 + y^2 + z^2", xyz);
  Expr lap = flat.laplacian_sym(f);
  Point p0 = {0.3, -0.2, 0.7};
  CHECK(lap.eval(p0) == Catch::Approx(6.0).margin(1e-12));

  // Same function expressed radially on the spherical chart: lap r^2 = 6.
  Chart sph = spherical3();
  Expr fr = parse_expr("r^2", sph.coords());
  Expr lap_r = sph.laplacian_sym(fr);
  Expr gn = sph.grad_norm2_sym(fr);
  for (const Point& p : sph.sample(8, 5)) {
    CHECK(lap_r.eval(p) == Catch::Approx(6.0).epsilon(1e-11));
    CHECK(gn.eval(p) == Catch::Approx(4.0 * p[0] * p[0]).epsilon(1e-11));
  }
}

TEST_CASE("symbolic inverse works for non-diagonal metrics") {
  std::vector<std::string> xyz = {"x", "y", "z"};
  auto n = [](double v) { return Expr::number(v); };
  // constant metric [[1,.5,0],[.5,2,0],[0,0,1]]
  Chart c("skew", xyz, {n(1), n(0.5), n(0), n(2), n(0), n(1)},
          {{-1, 1}, {-1, 1}, {-1, 1}});
  CHECK(!c.is_diagonal());
  Point p = {0, 0, 0};
  MetricData md = c.metric_data_at(p);
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double sym = c.inverse_metric_entry_sym(i, j).eval(p);
      CHECK(sym == Catch::Approx(md.ginv[i * 3 + j]).margin(1e-12));
    }
}
