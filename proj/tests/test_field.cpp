#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "etv/chart.hpp"
#include "etv/field.hpp"

using namespace etv;

namespace {

Chart flat3() {
  return Chart::diagonal("flat3", {"x", "y", "z"},
                         {Expr::number(1), Expr::number(1), Expr::number(1)},
                         {{-1, 1}, {-1, 1}, {-1, 1}});
}

Chart spherical3() {
  auto r = Expr::coord(0, "r");
  auto th = Expr::coord(1, "theta");
  return Chart::diagonal("spherical3", {"r", "theta", "phi"},
                         {Expr::number(1), r * r, r * r * sin(th) * sin(th)},
                         {{0.5, 2.0}, {0.4, 2.7}, {0.1, 3.0}});
}

}  // namespace

TEST_CASE("fd_partial matches exact derivatives of a smooth covector field") {
  Chart c = flat3();
  // T = (sin(x)cos(y), e^z, x^2 y)
  NumericField F = make_field(c, 1, [&](const Point& p) {
    PointTensor t(3, {Var::Co});
    t(0) = std::sin(p[0]) * std::cos(p[1]);
    t(1) = std::exp(p[2]);
    t(2) = p[0] * p[0] * p[1];
    return t;
  });
  Point p = {0.3, -0.2, 0.1};

  PointTensor dx = fd_partial(F, p, 0);
  CHECK(std::abs(dx(0) - std::cos(p[0]) * std::cos(p[1])) < 2e-8);
  CHECK(std::abs(dx(1) - 0.0) < 2e-8);
  CHECK(std::abs(dx(2) - 2 * p[0] * p[1]) < 2e-8);

  PointTensor dy = fd_partial(F, p, 1);
  CHECK(std::abs(dy(0) + std::sin(p[0]) * std::sin(p[1])) < 2e-8);
  CHECK(std::abs(dy(2) - p[0] * p[0]) < 2e-8);

  PointTensor dz = fd_partial(F, p, 2);
  CHECK(std::abs(dz(1) - std::exp(p[2])) < 2e-8);
}

TEST_CASE("fd_partial is 4th order: halving h shrinks the error about 16x") {
  Chart c = flat3();
  NumericField F = make_field(c, 0, [&](const Point& p) {
    return PointTensor::scalar(std::exp(p[0]) * std::sin(3 * p[1]));
  });
  Point p = {0.25, 0.4, 0.0};
  double exact = std::exp(p[0]) * std::sin(3 * p[1]);

  FDOptions coarse;
  coarse.step_frac = 0.04;
  FDOptions fine;
  fine.step_frac = 0.02;
  double e_coarse = std::abs(fd_partial(F, p, 0, coarse)() - exact);
  double e_fine = std::abs(fd_partial(F, p, 0, fine)() - exact);
  REQUIRE(e_coarse > 1e-12);  // otherwise the ratio is meaningless
  double ratio = e_coarse / e_fine;
  CHECK(ratio > 10.0);
  CHECK(ratio < 24.0);

  // one Richardson level beats the plain stencil at the same h
  FDOptions rich = coarse;
  rich.richardson = true;
  double e_rich = std::abs(fd_partial(F, p, 0, rich)() - exact);
  CHECK(e_rich < e_coarse);
}

TEST_CASE("stencil that would leave the domain throws StencilOutOfDomain") {
  Chart c = flat3();
  NumericField F = make_field(c, 0, [](const Point&) { return PointTensor::scalar(1.0); });
  Point edge = {0.99, 0.0, 0.0};  // h = 0.02 on width 2 puts x+2h at 1.03
  CHECK_THROWS_AS(fd_partial(F, edge, 0), StencilOutOfDomain);
  CHECK_NOTHROW(fd_partial(F, edge, 1));
  CHECK_THROWS_AS(fd_partial(F, Point{1.2, 0.0, 0.0}, 1), OutOfDomain);
}

TEST_CASE("covariant derivative of the metric field vanishes") {
  Chart c = spherical3();
  NumericField G = make_field(c, 2, [&](const Point& q) {
    MetricData md = c.metric_data_at(q);
    PointTensor g(3, {Var::Co, Var::Co});
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) g(i, j) = md.g[static_cast<std::size_t>(i) * 3 + j];
    return g;
  });
  FDOptions rich;
  rich.richardson = true;
  for (const Point& p : c.sample(6, 11)) {
    PointTensor nab = covariant_derivative(G, p, rich);
    CHECK(nab.max_abs() < 5e-9);
  }
}

TEST_CASE("covariant derivative of a scalar is its gradient, flat divergence is plain") {
  Chart c = flat3();
  NumericField F = make_field(c, 0, [&](const Point& p) {
    return PointTensor::scalar(p[0] * p[0] + 2 * p[1] * p[2]);
  });
  Point p = {0.1, 0.2, -0.3};
  PointTensor grad = covariant_derivative(F, p);
  CHECK(std::abs(grad(0) - 2 * p[0]) < 1e-10);
  CHECK(std::abs(grad(1) - 2 * p[2]) < 1e-10);
  CHECK(std::abs(grad(2) - 2 * p[1]) < 1e-10);

  // V_i = (x, y, z) has divergence 3 in flat coordinates
  NumericField V = make_field(c, 1, [&](const Point& q) {
    PointTensor t(3, {Var::Co});
    t(0) = q[0];
    t(1) = q[1];
    t(2) = q[2];
    return t;
  });
  MetricData md = c.metric_data_at(p);
  auto gamma = christoffel_values(md, c.metric_partials_at(p, 1));
  PointTensor div = divergence_last(V, p, gamma, md);
  CHECK(std::abs(div() - 3.0) < 1e-10);
}

TEST_CASE("christoffel_values reproduces the closed form on the round sphere chart") {
  auto th = Expr::coord(0, "theta");
  Chart s2xr = Chart::diagonal("polar3", {"theta", "phi", "s"},
                               {Expr::number(1), sin(th) * sin(th), Expr::number(1)},
                               {{0.3, 2.8}, {0.1, 3.0}, {-1, 1}});
  Point p = {1.1, 0.7, 0.0};
  MetricData md = s2xr.metric_data_at(p);
  auto gam = christoffel_values(md, s2xr.metric_partials_at(p, 1));
  auto at = [&](int k, int i, int j) { return gam[(static_cast<std::size_t>(k) * 3 + i) * 3 + j]; };
  // Gamma^theta_{phi phi} = -sin(theta)cos(theta), Gamma^phi_{theta phi} = cot(theta)
  CHECK(std::abs(at(0, 1, 1) + std::sin(p[0]) * std::cos(p[0])) < 1e-12);
  CHECK(std::abs(at(1, 0, 1) - std::cos(p[0]) / std::sin(p[0])) < 1e-12);
  CHECK(std::abs(at(2, 0, 0)) < 1e-14);
}
