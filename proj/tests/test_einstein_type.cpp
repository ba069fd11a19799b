#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <memory>

#include "etv/chart.hpp"
#include "etv/curvature.hpp"
#include "etv/einstein_type.hpp"

using namespace etv;

namespace {

ChartPtr flat3() {
  return std::make_shared<const Chart>(Chart::diagonal(
      "flat3", {"x", "y", "z"}, {Expr::number(1), Expr::number(1), Expr::number(1)},
      {{-1, 1}, {-1, 1}, {-1, 1}}));
}

ChartPtr flat4() {
  return std::make_shared<const Chart>(Chart::diagonal(
      "flat4", {"x1", "x2", "x3", "x4"},
      {Expr::number(1), Expr::number(1), Expr::number(1), Expr::number(1)},
      {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}));
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

// H^3 in horospherical coordinates: dr^2 + e^{2r}(dx^2 + dy^2)
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

// Flat metric rescaled by e^{2cx1}; together with f = x1 this solves the
// defining equation with a degenerate coefficient tuple.
ChartPtr conformal_flat4(double c) {
  auto x1 = Expr::coord(0, "x1");
  auto w = exp(Expr::number(2 * c) * x1);
  return std::make_shared<const Chart>(Chart::diagonal(
      "conformal_flat4", {"x1", "x2", "x3", "x4"}, {w, w, w, w},
      {{-1, 1}, {-1, 1}, {-1, 1}, {-1, 1}}));
}

Expr sq_norm(int m) {  // |x|^2 / 4
  Expr s = Expr::number(0);
  for (int i = 0; i < m; ++i) {
    Expr xi = Expr::coord(i, "x" + std::to_string(i));
    s = s + xi * xi;
  }
  return s / Expr::number(4);
}

EinsteinTypeStructure gaussian(ChartPtr c) {
  int m = c->dim();
  return EinsteinTypeStructure(std::move(c), 1.0, 1.0, 0.0, 0.0, Expr::number(0.5),
                               sq_norm(m));
}

}  // namespace

TEST_CASE("classification covers every coefficient regime") {
  auto c4 = flat4();
  Expr f = Expr::coord(0, "x1");
  Expr lam = Expr::number(0);

  CHECK(EinsteinTypeStructure(c4, 1, -2, 2, 0, lam, f).classify() == StructureClass::Degenerate);
  CHECK(EinsteinTypeStructure(c4, 1, -2, 2 + 1e-15, 0, lam, f).classify() ==
        StructureClass::Degenerate);
  CHECK(EinsteinTypeStructure(c4, 1, -2, 2.1, 0, lam, f).classify() ==
        StructureClass::Nondegenerate);
  CHECK(EinsteinTypeStructure(c4, 1, 1, 0, 0, lam, f).classify() ==
        StructureClass::Nondegenerate);
  CHECK(EinsteinTypeStructure(c4, 1, 0, 3, 0, lam, f).classify() == StructureClass::BetaZero);
  CHECK(EinsteinTypeStructure(c4, 0, 0, 1, 0, lam, f).classify() == StructureClass::BetaZero);
  CHECK(EinsteinTypeStructure(c4, 0, 1, 0, 1, lam, f).classify() == StructureClass::AlphaZero);
  CHECK(EinsteinTypeStructure(c4, 1, 1, 0, 0, lam, Expr::number(7)).classify() ==
        StructureClass::TrivialCheck);

  CHECK(std::string(class_name(StructureClass::Degenerate)) == "degenerate");
  CHECK(std::string(class_name(StructureClass::TrivialCheck)) == "trivial-check");

  CHECK_THROWS_AS(EinsteinTypeStructure(c4, 0, 0, 0, 1, lam, f), InvalidParameters);
}

TEST_CASE("the eight named special cases carry the expected coefficients") {
  auto c4 = sphere4();
  Expr f = cos(Expr::coord(0, "r"));
  Expr lam = Expr::number(1);

  auto e = EinsteinTypeStructure::einstein(c4);
  CHECK(e.alpha() == 1.0);
  CHECK(e.beta() == 0.0);
  CHECK(e.mu() == 0.0);
  CHECK(e.rho() == 0.25);
  CHECK(e.classify() == StructureClass::TrivialCheck);

  auto rs = EinsteinTypeStructure::ricci_soliton(c4, f, 2.0);
  CHECK(rs.alpha() == 1.0);
  CHECK(rs.beta() == 1.0);
  CHECK(rs.mu() == 0.0);
  CHECK(rs.rho() == 0.0);
  CHECK(rs.classify() == StructureClass::Nondegenerate);

  auto ras = EinsteinTypeStructure::ricci_almost_soliton(c4, f, lam);
  CHECK(ras.rho() == 0.0);
  CHECK(ras.classify() == StructureClass::Nondegenerate);

  auto ys = EinsteinTypeStructure::yamabe_soliton(c4, f, 2.0);
  CHECK(ys.alpha() == 0.0);
  CHECK(ys.beta() == 1.0);
  CHECK(ys.mu() == 0.0);
  CHECK(ys.rho() == 1.0);
  CHECK(ys.classify() == StructureClass::AlphaZero);

  auto yq = EinsteinTypeStructure::yamabe_quasi_soliton(c4, f, 2.0, lam);
  CHECK(yq.mu() == -0.5);
  CHECK(yq.rho() == 1.0);
  CHECK(yq.classify() == StructureClass::AlphaZero);

  auto cg = EinsteinTypeStructure::conformal_gradient_soliton(c4, f, lam);
  CHECK(cg.alpha() == 0.0);
  CHECK(cg.rho() == 0.0);

  auto qe = EinsteinTypeStructure::quasi_einstein(c4, f, 2.0, lam);
  CHECK(qe.mu() == -0.5);
  CHECK(qe.rho() == 0.0);
  CHECK(qe.classify() == StructureClass::Nondegenerate);

  auto re = EinsteinTypeStructure::rho_einstein(c4, f, 0.5, lam);
  CHECK(re.rho() == 0.5);

  CHECK_THROWS_AS(EinsteinTypeStructure::yamabe_quasi_soliton(c4, f, 0.0, lam),
                  InvalidParameters);
  CHECK_THROWS_AS(EinsteinTypeStructure::quasi_einstein(c4, f, 0.0, lam), InvalidParameters);
  CHECK_THROWS_AS(EinsteinTypeStructure::rho_einstein(c4, f, 0.0, lam), InvalidParameters);
}

TEST_CASE("gaussian structure on flat space solves the equation exactly") {
  for (ChartPtr c : {flat3(), flat4()}) {
    auto s = gaussian(c);
    BundleCache bc(s.chart());
    for (const Point& p : c->sample(6, 11)) {
      const CurvatureBundle& B = bc.at(p);
      CHECK(residual_at(s, B).max_abs() < 1e-12);
      CHECK(std::abs(traced_residual_at(s, B)) < 1e-12);
      CHECK(structure_residual_normalized(s, B) < 1e-12);

      for (int form : {1, 2, 3}) CHECK(d_tensor_at(s, B, form).t.max_abs() < 1e-12);
      CHECK(y_field_at(s, B).max_abs() < 1e-12);

      auto i1 = integrability1_residual_at(s, B);
      CHECK(i1.applicable);
      CHECK(i1.value.normalized() < 1e-12);
      auto sk = sk_identity_residual_at(s, B);
      CHECK(sk.applicable);
      CHECK(sk.value.normalized() < 1e-12);
      auto skf = sk_first_identity_residual_at(s, B);
      CHECK(skf.value.normalized() < 1e-12);
    }
    Point p = c->center();
    auto i2 = integrability2_residual_at(s, bc, p);
    CHECK(i2.applicable);
    CHECK(i2.value.normalized() < 1e-10);
    auto dy = d_norm_div_y_residual_at(s, bc, p);
    CHECK(dy.applicable);
    CHECK(dy.value.normalized() < 1e-10);
  }
}

TEST_CASE("a wrong lambda shows up verbatim in the residual") {
  auto c = flat3();
  EinsteinTypeStructure s(c, 1.0, 1.0, 0.0, 0.0, Expr::number(0.7), sq_norm(3));
  Point p = c->center();
  CurvatureBundle B = curvature_bundle(*c, p);
  CHECK(residual_at(s, B).max_abs() == Catch::Approx(0.2).margin(1e-12));
  CHECK(traced_residual_at(s, B) == Catch::Approx(-0.6).margin(1e-12));

  // the traced residual is the metric trace of the full residual
  PointTensor r = residual_at(s, B);
  double tr = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) tr += B.gu(i, j) * r(i, j);
  CHECK(tr == Catch::Approx(traced_residual_at(s, B)).margin(1e-10));
}

TEST_CASE("round sphere almost-soliton: cos of the polar angle") {
  auto c = sphere4();
  Expr r = Expr::coord(0, "r");
  // Ric + Hess f = (3 - cos r) g on the unit S^4
  auto s = EinsteinTypeStructure::ricci_almost_soliton(c, cos(r),
                                                       Expr::number(3) - cos(r));
  BundleCache bc(s.chart());
  for (const Point& p : c->sample(6, 13)) {
    const CurvatureBundle& B = bc.at(p);
    CHECK(structure_residual_normalized(s, B) < 1e-10);

    // Einstein background: D vanishes in every form
    CHECK(d_tensor_at(s, B, 1).t.max_abs() < 1e-10);
    CHECK(d_tensor_at(s, B, 2).t.max_abs() < 1e-10);
    CHECK(d_tensor_at(s, B, 3).t.max_abs() < 1e-10);

    auto i1 = integrability1_residual_at(s, B);
    CHECK(i1.applicable);
    CHECK(i1.value.normalized() < 1e-9);

    // S_k = 0 while 2 f_t R_tk = 6 f_k and 2(m-1) lambda_k = -6 f_k: the
    // identity closes through cancellation of genuinely nonzero terms.
    auto sk = sk_identity_residual_at(s, B);
    CHECK(sk.applicable);
    CHECK(sk.value.scale > 0.1);
    CHECK(sk.value.normalized() < 1e-9);
    auto skf = sk_first_identity_residual_at(s, B);
    CHECK(skf.value.scale > 0.1);
    CHECK(skf.value.normalized() < 1e-9);
  }
  Point p = c->center();
  auto i2 = integrability2_residual_at(s, bc, p);
  CHECK(i2.applicable);
  CHECK(i2.value.normalized() < 5e-4);
}

TEST_CASE("horospherical quasi yamabe structure on hyperbolic space") {
  auto c = horosphere3();
  double k = 2.0;
  Expr f = Expr::number(-k) * Expr::coord(0, "r");
  // Hess f - (1/k) df x df = -k g and S = -6, so lambda = 6 - k.
  auto s = EinsteinTypeStructure::yamabe_quasi_soliton(c, f, k, Expr::number(6 - k));
  CHECK(s.classify() == StructureClass::AlphaZero);

  BundleCache bc(s.chart());
  for (const Point& p : c->sample(6, 17)) {
    const CurvatureBundle& B = bc.at(p);
    CHECK(structure_residual_normalized(s, B) < 1e-12);
    CHECK(d_tensor_at(s, B, 1).t.max_abs() < 1e-12);

    // mu != 0 exercises every term of both scalar-gradient identities
    auto skf = sk_first_identity_residual_at(s, B);
    CHECK(skf.applicable);
    CHECK(skf.value.scale > 1.0);
    CHECK(skf.value.normalized() < 1e-12);

    CHECK(y_field_at(s, B).max_abs() < 1e-10);
    CHECK(y_orthogonality_residual_at(s, B) < 1e-10);
  }

  Point p = c->center();
  auto dn = d_norm_identity_residual_at(s, bc, p);
  CHECK(dn.applicable);
  CHECK(dn.value.normalized() < 1e-6);

  CHECK_THROWS_AS(d_tensor_at(s, bc.at(p), 3), AlphaZero);
}

TEST_CASE("beta-divided scalar identity with every term active") {
  // On the same horospherical structure the beta-divided form mixes four
  // nonzero contributions (8 + 0 - 24 + 16 = 0 in the radial slot).
  auto c = horosphere3();
  auto s = EinsteinTypeStructure::yamabe_quasi_soliton(c, Expr::number(-2) * Expr::coord(0, "r"),
                                                       2.0, Expr::number(4));
  BundleCache bc(s.chart());
  Point p = c->center();
  auto sk = sk_identity_residual_at(s, bc.at(p));
  CHECK(sk.applicable);
  CHECK(sk.value.scale > 10.0);
  CHECK(sk.value.normalized() < 1e-12);
}

TEST_CASE("unconditional contraction identities for the deviation tensor") {
  // These hold for any metric and potential, structure equation or not.
  auto c = warp_generic4();
  Expr f = Expr::coord(1, "t1");
  auto s = EinsteinTypeStructure::ricci_soliton(c, f, 1.0);
  BundleCache bc(s.chart());
  for (const Point& p : c->sample(6, 19)) {
    const CurvatureBundle& B = bc.at(p);
    const int m = B.m;
    HessData H = hess_data(B, s.f_cache());
    DTensor D = d_tensor_at(s, B, 1);
    CHECK(D.t.max_abs() > 1e-4);  // the background is not Einstein

    // skew in the last two slots, trace-free in every pair
    double skew = 0.0, tr = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k) skew = std::max(skew, std::abs(D.t(i, j, k) + D.t(i, k, j)));
    for (int k = 0; k < m; ++k) {
      double t1 = 0.0, t2 = 0.0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          t1 += B.gu(i, j) * D.t(i, j, k);
          t2 += B.gu(i, j) * D.t(k, i, j);
        }
      tr = std::max({tr, std::abs(t1), std::abs(t2)});
    }
    CHECK(skew < 1e-12);
    CHECK(tr < 1e-12);

    // the two curvature forms agree identically
    DTensor D2 = d_tensor_at(s, B, 2);
    double diff = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          diff = std::max(diff, std::abs(D.t(i, j, k) - D2.t(i, j, k)));
    CHECK(diff < 1e-11);

    // the Hessian form does not, off the structure equation
    DTensor D3 = d_tensor_at(s, B, 3);
    double diff3 = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          diff3 = std::max(diff3, std::abs(D.t(i, j, k) - D3.t(i, j, k)));
    CHECK(diff3 > 1e-6);

    CHECK(fi_d_contraction_residual_at(s, B).normalized() < 1e-8);
    CHECK(d_norm_contraction_residual_at(s, B).normalized() < 1e-8);
    CHECK(y_orthogonality_residual_at(s, B) < 1e-9);

    // Y in closed form: beta/(alpha(m-1)) [Ric(grad f, grad f) grad f
    //                                      - |grad f|^2 Ric(grad f, .)^sharp]
    PointTensor y = y_field_at(s, B);
    double ricff = 0.0;
    std::vector<double> V(static_cast<std::size_t>(m), 0.0);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        ricff += H.gradup[static_cast<std::size_t>(a)] * H.gradup[static_cast<std::size_t>(b)] *
                 B.Ric(a, b);
        V[static_cast<std::size_t>(a)] += H.gradup[static_cast<std::size_t>(b)] * B.Ric(b, a);
      }
    double ydiff = 0.0;
    for (int kk = 0; kk < m; ++kk) {
      double closed = (ricff * H.df[static_cast<std::size_t>(kk)] -
                       H.grad2 * V[static_cast<std::size_t>(kk)]) /
                      (m - 1);
      ydiff = std::max(ydiff, std::abs(y(kk) - closed));
    }
    CHECK(ydiff < 1e-10);
  }
}

TEST_CASE("identities are reported as informational off the structure equation") {
  auto c = warp_generic4();
  auto s = EinsteinTypeStructure::ricci_soliton(c, Expr::coord(1, "t1"), 1.0);
  BundleCache bc(s.chart());
  Point p = c->center();
  const CurvatureBundle& B = bc.at(p);

  CHECK(structure_residual_normalized(s, B) > 1e-2);
  auto i1 = integrability1_residual_at(s, B);
  CHECK_FALSE(i1.applicable);
  CHECK(i1.gate_residual > 1e-2);
  CHECK(std::isfinite(i1.value.normalized()));
  auto sk = sk_identity_residual_at(s, B);
  CHECK_FALSE(sk.applicable);

  // the soliton closed form for Y needs the structure to actually hold
  CHECK(ricci_soliton_y_alternative_residual_at(s, B).normalized() > 1e-8);
}

TEST_CASE("degenerate structure is conformally Einstein") {
  double cc = -0.3;  // g = e^{2 c x1} delta, f = x1, a = -c
  auto c = conformal_flat4(cc);
  double a = -cc;
  double beta = -2.0 * a;        // -(m-2) a
  double mu = 2.0 * a * a;       // (m-2) a^2
  auto x1 = Expr::coord(0, "x1");
  Expr lam = Expr::number(2.0 * a * a) * exp(Expr::number(2.0 * a) * x1);
  EinsteinTypeStructure s(c, 1.0, beta, mu, 1.0 / 3.0, lam, x1);

  CHECK(s.classify() == StructureClass::Degenerate);
  CHECK(std::abs(s.bracket()) < 1e-12);

  BundleCache bc(s.chart());
  for (const Point& p : c->sample(6, 23)) {
    CHECK(structure_residual_normalized(s, bc.at(p)) < 1e-12);
    // rescaling by e^{2af} undoes the conformal factor: the result is flat
    CHECK(conformal_einstein_residual_at(s, p).max_abs() < 1e-10);
  }

  auto g = gaussian(flat3());
  CHECK_THROWS_AS(g.conformal_chart(), NotDegenerate);
  CHECK_THROWS_AS(conformal_einstein_residual_at(g, flat3()->center()), NotDegenerate);
}

TEST_CASE("beta-zero identities on an Einstein background") {
  auto c = sphere4();
  // alpha Ric + mu df x df = (rho S + lambda) g with constant f: Einstein
  EinsteinTypeStructure s(c, 1.0, 0.0, 3.0, 0.0, Expr::number(3), Expr::number(1));
  BundleCache bc(s.chart());
  Point p = c->center();
  auto ids = beta_zero_identities_at(s, bc, p);
  CHECK(ids.applicable);
  for (const auto& r : ids.value) {
    INFO(r.name);
    CHECK(r.normalized() < 1e-7);
  }
  // mu != 0 adds the |C|^2 divergence identity
  CHECK(ids.value.size() == 4);

  auto rs = EinsteinTypeStructure::ricci_soliton(c, cos(Expr::coord(0, "r")), 1.0);
  CHECK_THROWS_AS(beta_zero_identities_at(rs, bc, p), WrongClass);
  EinsteinTypeStructure mu_only(c, 0.0, 0.0, 1.0, 0.0, Expr::number(0), Expr::number(1));
  CHECK_THROWS_AS(beta_zero_identities_at(mu_only, bc, p), WrongClass);
}

TEST_CASE("operations guard their coefficient preconditions") {
  auto c = flat3();
  Expr f = Expr::coord(0, "x");
  EinsteinTypeStructure beta0(c, 1.0, 0.0, 3.0, 0.0, Expr::number(0), f);
  BundleCache bc(beta0.chart());
  Point p = c->center();
  const CurvatureBundle& B = bc.at(p);

  CHECK_THROWS_AS(integrability1_residual_at(beta0, B), BetaZero);
  CHECK_THROWS_AS(integrability2_residual_at(beta0, bc, p), BetaZero);
  CHECK_THROWS_AS(sk_identity_residual_at(beta0, B), BetaZero);
  CHECK_THROWS_AS(d_norm_identity_residual_at(beta0, bc, p), BetaZero);
  CHECK_THROWS_AS(beta0.bracket(), BetaZero);
  CHECK_THROWS_AS(d_tensor_at(beta0, B, 4), InvalidParameters);
}
