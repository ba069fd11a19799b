#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "etv/chart.hpp"
#include "etv/curvature.hpp"
#include "etv/einstein_type.hpp"
#include "etv/levelset.hpp"

using namespace etv;

namespace {

ChartPtr flat3() {
  return std::make_shared<const Chart>(Chart::diagonal(
      "flat3", {"x", "y", "z"}, {Expr::number(1), Expr::number(1), Expr::number(1)},
      {{-1, 1}, {-1, 1}, {-1, 1}}));
}

ChartPtr sphere4() {
  auto r = Expr::coord(0, "r");
  auto t1 = Expr::coord(1, "t1");
  auto t2 = Expr::coord(2, "t2");
  auto sr = sin(r), s1 = sin(t1), s2 = sin(t2);
  return std::make_shared<const Chart>(Chart::diagonal(
      "sphere4", {"r", "t1", "t2", "t3"},
      {Expr::number(1), sr * sr, sr * sr * s1 * s1, sr * sr * s1 * s1 * s2 * s2},
      {{0.3, 2.8}, {0.3, 2.8}, {0.3, 2.8}, {0.1, 3.0}}));
}

ChartPtr horosphere3() {
  auto r = Expr::coord(0, "r");
  auto w = exp(Expr::number(2) * r);
  return std::make_shared<const Chart>(Chart::diagonal(
      "horosphere3", {"r", "x", "y"}, {Expr::number(1), w, w},
      {{-1, 1}, {-1, 1}, {-1, 1}}));
}

ChartPtr warp_generic4() {
  auto r = Expr::coord(0, "r");
  auto t1 = Expr::coord(1, "t1");
  auto t2 = Expr::coord(2, "t2");
  auto w = exp(Expr::number(0.6) * r);
  auto f2 = Expr::number(1) + t1 * t1 / Expr::number(4);
  auto f3 = Expr::number(1) + t2 * t2 / Expr::number(4);
  return std::make_shared<const Chart>(Chart(
      "warp_generic4", {"r", "t1", "t2", "t3"},
      {Expr::number(1), Expr::number(0), Expr::number(0), Expr::number(0),
       w, Expr::number(0), Expr::number(0),
       w * f2, Expr::number(0),
       w * f3},
      {{0.0, 1.0}, {-1, 1}, {-1, 1}, {-1, 1}}));
}

Expr sq_norm(int m) {
  Expr s = Expr::number(0);
  for (int i = 0; i < m; ++i) {
    Expr xi = Expr::coord(i, "x" + std::to_string(i));
    s = s + xi * xi;
  }
  return s / Expr::number(4);
}

EinsteinTypeStructure gaussian3() {
  return EinsteinTypeStructure(flat3(), 1.0, 1.0, 0.0, 0.0, Expr::number(0.5), sq_norm(3));
}

void check_frame_invariants(const EinsteinTypeStructure& s, const CurvatureBundle& B,
                            const AdaptedFrame& F) {
  const int m = B.m;
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double ip = detail::frame_ip(B, F.vec(a), F.vec(b));
      CHECK(std::abs(ip - (a == b ? 1.0 : 0.0)) < 1e-10);
    }
  HessData H = hess_data(B, s.f_cache());
  for (int a = 0; a < m - 1; ++a) {
    double dfa = 0.0;
    for (int i = 0; i < m; ++i)
      dfa += H.df[static_cast<std::size_t>(i)] * F.vec(a)[static_cast<std::size_t>(i)];
    CHECK(std::abs(dfa) < 1e-10 * F.grad_norm);
  }
}

}  // namespace

TEST_CASE("adapted frame: axis-aligned gradients recover coordinate axes") {
  auto c = flat3();
  EinsteinTypeStructure s(c, 1.0, 1.0, 0.0, 0.0, Expr::number(0), Expr::coord(2, "z"));
  Point p = {0.2, -0.4, 0.1};
  CurvatureBundle B = curvature_bundle(*c, p);
  AdaptedFrame F = adapted_frame_at(s, B);
  CHECK(F.grad_norm == Catch::Approx(1.0));
  CHECK(F.normal()[0] == Catch::Approx(0.0).margin(1e-14));
  CHECK(F.normal()[1] == Catch::Approx(0.0).margin(1e-14));
  CHECK(F.normal()[2] == Catch::Approx(1.0));
  check_frame_invariants(s, B, F);

  auto g = gaussian3();
  Point q = {1.0, 0.0, 0.0};
  CurvatureBundle Bq = curvature_bundle(g.chart(), q);
  AdaptedFrame Fq = adapted_frame_at(g, Bq);
  CHECK(Fq.normal()[0] == Catch::Approx(1.0));  // radial gradient
  CHECK(std::abs(Fq.normal()[1]) < 1e-14);
  CHECK(std::abs(Fq.normal()[2]) < 1e-14);
}

TEST_CASE("adapted frame: oblique gradient on a curved chart") {
  auto c = warp_generic4();
  Expr f = Expr::coord(1, "t1") + Expr::number(0.3) * Expr::coord(0, "r");
  auto s = EinsteinTypeStructure::ricci_soliton(c, f, 1.0);
  for (const Point& p : c->sample(5, 31)) {
    CurvatureBundle B = curvature_bundle(*c, p);
    AdaptedFrame F = adapted_frame_at(s, B);
    check_frame_invariants(s, B, F);

    // construction is deterministic
    AdaptedFrame F2 = adapted_frame_at(s, B);
    for (int a = 0; a < B.m; ++a)
      for (int i = 0; i < B.m; ++i)
        CHECK(F.vec(a)[static_cast<std::size_t>(i)] == F2.vec(a)[static_cast<std::size_t>(i)]);

    // warped metric, f = f(r): the normal is the radial direction when f
    // depends on r alone; here it tilts but stays in the (r, t1) plane
    CHECK(std::abs(F.normal()[2]) < 1e-12);
    CHECK(std::abs(F.normal()[3]) < 1e-12);
  }
}

TEST_CASE("critical points are rejected") {
  auto s4 = sphere4();
  auto e = EinsteinTypeStructure::einstein(s4);  // f constant
  Point p = s4->center();
  CHECK_THROWS_AS(adapted_frame_at(e, p), CriticalPoint);
  CHECK_THROWS_AS(second_fundamental_form_at(e, p), CriticalPoint);
  CHECK_THROWS_AS(d2_levelset_identity_residual_at(e, p), BetaZero);  // beta checked first

  auto g = gaussian3();
  Point origin = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(adapted_frame_at(g, origin), CriticalPoint);  // grad f = x/2 = 0
}

TEST_CASE("second fundamental form: planes and round spheres in flat space") {
  auto c = flat3();
  EinsteinTypeStructure planes(c, 1.0, 1.0, 0.0, 0.0, Expr::number(0), Expr::coord(2, "z"));
  Point p = {0.3, 0.1, -0.2};
  SecondForm sf = second_fundamental_form_at(planes, p);
  for (double v : sf.h) CHECK(std::abs(v) < 1e-14);
  CHECK(sf.traceless2 < 1e-28);

  // gaussian potential: level sets are spheres of radius r, h_ab = -(1/r) d_ab
  auto g = gaussian3();
  Point q = {0.6, -0.3, 0.45};
  double r = std::sqrt(0.6 * 0.6 + 0.3 * 0.3 + 0.45 * 0.45);
  SecondForm sg = second_fundamental_form_at(g, q);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      CHECK(std::abs(sg.hval(a, b) - (a == b ? -1.0 / r : 0.0)) < 1e-9);
  CHECK(sg.mean == Catch::Approx(-1.0 / r).epsilon(1e-9));
  CHECK(sg.traceless2 < 1e-18);

  // the structure route agrees: the defining equation holds exactly
  REQUIRE(sg.has_structure_route);
  CHECK(sg.routes_difference < 1e-9);
}

TEST_CASE("second fundamental form: horospheres have h_ab = delta_ab") {
  // g = dr^2 + e^{2r} delta, f = -2r: nu = -d_r and h_ab = (w'/w) delta_ab = delta_ab
  auto c = horosphere3();
  auto s = EinsteinTypeStructure::yamabe_quasi_soliton(c, Expr::number(-2) * Expr::coord(0, "r"),
                                                       2.0, Expr::number(4));
  for (const Point& p : c->sample(4, 7)) {
    SecondForm sf = second_fundamental_form_at(s, p);
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b)
        CHECK(std::abs(sf.hval(a, b) - (a == b ? 1.0 : 0.0)) < 1e-12);
    CHECK(sf.mean == Catch::Approx(1.0));
    // alpha = 0 reduces the structure route to -(rho S + lambda)/(beta |grad f|) d_ab = d_ab
    REQUIRE(sf.has_structure_route);
    CHECK(sf.routes_difference < 1e-12);
  }
}

TEST_CASE("traceless norm is independent of the tangent basis seed") {
  auto c = warp_generic4();
  Expr f = Expr::coord(1, "t1") + Expr::number(0.3) * Expr::coord(0, "r");
  auto s = EinsteinTypeStructure::ricci_soliton(c, f, 1.0);
  for (const Point& p : c->sample(4, 37)) {
    CurvatureBundle B = curvature_bundle(*c, p);
    SecondForm s0 = second_fundamental_form_at(s, B, 0);
    SecondForm s1 = second_fundamental_form_at(s, B, 1);
    SecondForm s2 = second_fundamental_form_at(s, B, 2);
    CHECK(s0.traceless2 == Catch::Approx(s1.traceless2).margin(1e-10));
    CHECK(s0.traceless2 == Catch::Approx(s2.traceless2).margin(1e-10));
    CHECK(s0.mean == Catch::Approx(s1.mean).margin(1e-10));
  }
}

TEST_CASE("norm identity splits |D|^2 into shear and mixed Ricci terms") {
  // gaussian: every term vanishes
  auto g = gaussian3();
  Point q = {0.6, -0.3, 0.45};
  auto split = d2_levelset_identity_residual_at(g, q);
  CHECK(split.applicable);
  CHECK(split.value.d2 < 1e-20);
  CHECK(split.value.shear < 1e-20);
  CHECK(split.value.mixed < 1e-20);

  // round-sphere almost soliton: D = 0 with curvature present
  auto s4 = sphere4();
  auto as = EinsteinTypeStructure::ricci_almost_soliton(
      s4, cos(Expr::coord(0, "r")), Expr::number(3) - cos(Expr::coord(0, "r")));
  for (const Point& p : s4->sample(4, 41)) {
    auto sp = d2_levelset_identity_residual_at(as, p);
    CHECK(sp.applicable);
    CHECK(sp.value.shear >= 0.0);
    CHECK(sp.value.mixed >= 0.0);
    CHECK(sp.value.normalized() < 1e-9);
  }
}

TEST_CASE("norm identity through the structure route is purely algebraic") {
  // With h_ab taken from the curvature side, the identity holds for any
  // metric and potential, whether or not the equation is satisfied.
  auto c = warp_generic4();
  Expr f = Expr::coord(1, "t1") + Expr::number(0.3) * Expr::coord(0, "r");
  auto s = EinsteinTypeStructure::ricci_soliton(c, f, 1.0);
  for (const Point& p : c->sample(6, 43)) {
    auto sp = d2_levelset_identity_residual_at(s, p, /*use_structure_h=*/true);
    CHECK_FALSE(sp.applicable);  // the equation does not hold here
    CHECK(sp.value.d2 > 1e-6);   // but the algebra closes anyway
    CHECK(sp.value.normalized() < 1e-10);

    // the Hessian route genuinely differs off the structure equation
    auto sh = d2_levelset_identity_residual_at(s, p, /*use_structure_h=*/false);
    CHECK(sh.value.normalized() > 1e-6);
  }
}

TEST_CASE("level sampling lands on the level to high accuracy") {
  auto s4 = sphere4();
  auto as = EinsteinTypeStructure::ricci_almost_soliton(
      s4, cos(Expr::coord(0, "r")), Expr::number(3) - cos(Expr::coord(0, "r")));
  double c = 0.07;
  auto pts = sample_level(as, c, 12, 5);
  REQUIRE(pts.size() >= 8);
  for (const Point& p : pts) {
    CHECK(std::abs(as.f_cache().value(p) - c) <= 1e-10);
    CHECK(std::abs(std::cos(p[0]) - c) <= 1e-10);
  }
}

TEST_CASE("property report: horospheres in hyperbolic space") {
  auto c = horosphere3();
  auto s = EinsteinTypeStructure::yamabe_quasi_soliton(c, Expr::number(-2) * Expr::coord(0, "r"),
                                                       2.0, Expr::number(4));
  auto pts = sample_level(s, -0.4, 10, 3);  // the level r = 0.2
  REQUIRE(pts.size() >= 6);
  LevelSetReport rep = levelset_property_report(s, pts);
  CHECK(rep.gate_passed);
  CHECK(rep.d_gate < 1e-10);
  CHECK(rep.structure_gate < 1e-10);
  for (const auto& prop : rep.properties) {
    INFO(prop.name);
    CHECK(prop.normalized() < 1e-9);
  }
  // flat horosphere fibers: the induced curvature itself vanishes
  for (const auto& prop : rep.properties)
    if (prop.name == "induced_einstein") CHECK(prop.raw < 1e-10);
}

TEST_CASE("property report: spheres inside the round sphere") {
  auto s4 = sphere4();
  auto as = EinsteinTypeStructure::ricci_almost_soliton(
      s4, cos(Expr::coord(0, "r")), Expr::number(3) - cos(Expr::coord(0, "r")));
  auto pts = sample_level(as, 0.07, 10, 9);
  REQUIRE(pts.size() >= 6);
  LevelSetReport rep = levelset_property_report(as, pts);
  CHECK(rep.gate_passed);
  for (const auto& prop : rep.properties) {
    INFO(prop.name);
    CHECK(prop.normalized() < 1e-9);
  }
  CHECK(rep.properties.back().name == "weyl_vanishes");  // present in dimension 4
}

TEST_CASE("property report flags structures that fail the gate") {
  auto c = warp_generic4();
  auto s = EinsteinTypeStructure::ricci_soliton(c, Expr::coord(1, "t1"), 1.0);
  auto pts = sample_level(s, 0.1, 8, 11);
  REQUIRE(!pts.empty());
  LevelSetReport rep = levelset_property_report(s, pts);
  CHECK_FALSE(rep.gate_passed);
  CHECK(rep.d_gate > 1e-4);
  CHECK(rep.structure_gate > 1e-3);
  CHECK(!rep.properties.empty());  // still informative

  LevelSetReport empty = levelset_property_report(s, {});
  CHECK(empty.points == 0);
  CHECK_FALSE(empty.gate_passed);
}
