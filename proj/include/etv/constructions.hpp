#pragma once

// Builders for the example corpus: warped-product charts, canonical solitons,
// constant-curvature space forms, and degenerate structures obtained from
// Einstein metrics by a conformal change.  Every constructed (chart, structure)
// pair is an exact solution of its defining equation up to floating-point
// noise, so the corpus doubles as a self-verifying oracle set.

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "etv/chart.hpp"
#include "etv/curvature.hpp"
#include "etv/einstein_type.hpp"
#include "etv/errors.hpp"
#include "etv/expr.hpp"

namespace etv {

// ---------------------------------------------------------------------------
// Warped-product charts  g = dr^2 + w(r)^2 g^fiber

enum class FiberKind { Flat, RoundSphere, Hyperbolic, Declared };

// The warp expression must be written in coordinate 0 (the radial variable).
// Declared fibers supply their own coordinate names, metric upper triangle and
// domain; the metric entries are written in the assembled chart's indexing,
// where index 0 is r and the fiber occupies indices 1..m-1.
struct WarpedSpec {
  std::string name;
  Expr warp = Expr::number(1.0);
  Interval radial{0.3, 2.8};
  FiberKind fiber = FiberKind::Flat;
  int fiber_dim = 2;
  std::vector<std::string> fiber_coords;  // Declared only
  std::vector<Expr> fiber_metric;         // Declared only: upper triangle
  std::vector<Interval> fiber_domain;     // optional override for any kind
};

namespace detail {

inline std::vector<std::string> numbered(const std::string& stem, int n, int first = 1) {
  std::vector<std::string> out;
  for (int k = 0; k < n; ++k) out.push_back(stem + std::to_string(first + k));
  return out;
}

inline bool is_zero_expr(const Expr& e) {
  if (!e.is_constant()) return false;
  Point none(1, 0.0);
  return e.eval(none) == 0.0;
}

}  // namespace detail

inline ChartPtr warped_chart(const WarpedSpec& spec) {
  const int n = spec.fiber_dim;
  const int m = n + 1;
  if (n < 2) throw DimensionError("warped chart needs fiber dimension at least 2");
  if (!(spec.radial.lo < spec.radial.hi)) throw DimensionError("empty radial interval");

  std::vector<std::string> coords{"r"};
  std::vector<Expr> fib;  // fiber upper triangle, n(n+1)/2 entries
  std::vector<Interval> domain{spec.radial};

  auto push_diag = [&](const std::vector<Expr>& diag) {
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) fib.push_back(i == j ? diag[static_cast<std::size_t>(i)] : Expr::number(0.0));
  };

  switch (spec.fiber) {
    case FiberKind::Flat: {
      for (const std::string& c : detail::numbered("x", n)) coords.push_back(c);
      push_diag(std::vector<Expr>(static_cast<std::size_t>(n), Expr::number(1.0)));
      for (int k = 0; k < n; ++k) domain.push_back({-1.0, 1.0});
      break;
    }
    case FiberKind::RoundSphere: {
      // Nested polar form g = dt1^2 + sin^2(t1) dt2^2 + ... away from the poles.
      std::vector<std::string> angles = detail::numbered("t", n);
      for (const std::string& c : angles) coords.push_back(c);
      std::vector<Expr> diag;
      for (int k = 0; k < n; ++k) {
        Expr e = Expr::number(1.0);
        for (int j = 0; j < k; ++j) {
          Expr s = sin(Expr::coord(1 + j, angles[static_cast<std::size_t>(j)]));
          e = e * s * s;
        }
        diag.push_back(e.simplified());
      }
      push_diag(diag);
      const double pi = 3.14159265358979323846;
      for (int k = 0; k < n; ++k) domain.push_back({0.3, pi - 0.3});
      break;
    }
    case FiberKind::Hyperbolic: {
      // Upper half-space model z^{-2} delta with z the last fiber coordinate.
      std::vector<std::string> names = detail::numbered("x", n - 1);
      names.push_back("z");
      for (const std::string& c : names) coords.push_back(c);
      Expr z = Expr::coord(n, "z");
      std::vector<Expr> diag(static_cast<std::size_t>(n), (Expr::number(1.0) / (z * z)).simplified());
      push_diag(diag);
      for (int k = 0; k < n - 1; ++k) domain.push_back({-1.0, 1.0});
      domain.push_back({0.5, 2.0});
      break;
    }
    case FiberKind::Declared: {
      if (static_cast<int>(spec.fiber_coords.size()) != n)
        throw InvalidParameters("declared fiber needs one coordinate name per fiber dimension");
      const std::size_t want = static_cast<std::size_t>(n) * (n + 1) / 2;
      if (spec.fiber_metric.size() != want)
        throw InvalidParameters("declared fiber needs " + std::to_string(want) + " upper-triangle entries");
      if (spec.fiber_domain.size() != static_cast<std::size_t>(n))
        throw InvalidParameters("declared fiber needs one domain interval per fiber coordinate");
      for (const std::string& c : spec.fiber_coords) coords.push_back(c);
      fib = spec.fiber_metric;
      for (const Interval& iv : spec.fiber_domain) domain.push_back(iv);
      break;
    }
  }

  if (spec.fiber != FiberKind::Declared && !spec.fiber_domain.empty()) {
    if (spec.fiber_domain.size() != static_cast<std::size_t>(n))
      throw InvalidParameters("fiber domain override needs one interval per fiber coordinate");
    for (int k = 0; k < n; ++k) domain[static_cast<std::size_t>(1 + k)] = spec.fiber_domain[static_cast<std::size_t>(k)];
  }

  // Sampled positivity check for the warp over the closed radial interval.
  {
    Point probe(static_cast<std::size_t>(m), 0.0);
    for (int k = 1; k < m; ++k)
      probe[static_cast<std::size_t>(k)] = 0.5 * (domain[static_cast<std::size_t>(k)].lo + domain[static_cast<std::size_t>(k)].hi);
    const int steps = 128;
    for (int i = 0; i <= steps; ++i) {
      double r = spec.radial.lo + (spec.radial.hi - spec.radial.lo) * i / steps;
      probe[0] = r;
      double w = spec.warp.eval(probe);
      if (!(w > 0.0))
        throw NonpositiveWarp("warp is not positive at r=" + std::to_string(r));
    }
  }

  std::vector<Expr> upper;
  upper.push_back(Expr::number(1.0));                          // g_rr
  for (int j = 1; j < m; ++j) upper.push_back(Expr::number(0.0));  // g_rj
  Expr w2 = (spec.warp * spec.warp).simplified();
  std::size_t k = 0;
  for (int i = 1; i < m; ++i)
    for (int j = i; j < m; ++j) {
      const Expr& e = fib[k++];
      upper.push_back(detail::is_zero_expr(e) ? Expr::number(0.0) : (w2 * e).simplified());
    }

  return std::make_shared<const Chart>(spec.name, std::move(coords), std::move(upper), std::move(domain));
}

// ---------------------------------------------------------------------------
// Canonical charts used throughout the corpus and the tests

inline ChartPtr flat_chart(int m, const std::string& name = "") {
  if (m < 3) throw DimensionError("flat chart needs dimension at least 3");
  std::vector<Expr> diag(static_cast<std::size_t>(m), Expr::number(1.0));
  std::vector<Interval> dom(static_cast<std::size_t>(m), Interval{-1.0, 1.0});
  std::string nm = name.empty() ? "flat" + std::to_string(m) : name;
  return std::make_shared<const Chart>(
      Chart::diagonal(nm, detail::numbered("x", m), std::move(diag), std::move(dom)));
}

// Unit sphere in geodesic polar coordinates: g = dr^2 + sin^2(r) g_{S^{m-1}}.
inline ChartPtr sphere_chart(int m, const std::string& name = "") {
  WarpedSpec spec;
  spec.name = name.empty() ? "sphere" + std::to_string(m) : name;
  spec.warp = sin(Expr::coord(0, "r"));
  spec.radial = {0.3, 2.8};
  spec.fiber = FiberKind::RoundSphere;
  spec.fiber_dim = m - 1;
  return warped_chart(spec);
}

// Unit hyperbolic space in geodesic polar coordinates: warp sinh(r).
inline ChartPtr hyperbolic_polar_chart(int m, const std::string& name = "") {
  WarpedSpec spec;
  spec.name = name.empty() ? "hyperbolic" + std::to_string(m) + "_polar" : name;
  spec.warp = sinh(Expr::coord(0, "r"));
  spec.radial = {0.3, 2.2};
  spec.fiber = FiberKind::RoundSphere;
  spec.fiber_dim = m - 1;
  return warped_chart(spec);
}

// Unit hyperbolic space in horospherical coordinates: g = dr^2 + e^{2r} delta.
inline ChartPtr horosphere_chart(int m, const std::string& name = "") {
  WarpedSpec spec;
  spec.name = name.empty() ? "hyperbolic" + std::to_string(m) : name;
  spec.warp = exp(Expr::coord(0, "r"));
  spec.radial = {-1.0, 1.0};
  spec.fiber = FiberKind::Flat;
  spec.fiber_dim = m - 1;
  return warped_chart(spec);
}

// ---------------------------------------------------------------------------
// Warped structures with alpha = 0:  Hess f + mu df (x) df = phi g
//
// For a radial potential f the metric g = dr^2 + w(r)^2 g^Sigma with
// w = (f'(r)/f'(0)) e^{mu f(r)} solves the equation for ANY fiber metric,
// with phi = (lap f + mu |grad f|^2)/m.  The fiber enters the curvature but
// not the defining equation, so a generic fiber yields structures whose
// Weyl and difference tensors are genuinely nonzero.

struct Alpha0Spec {
  std::string name;
  Expr potential;  // f(r), written in coordinate 0
  double mu = 0.0;
  Interval radial{0.1, 1.2};
  FiberKind fiber = FiberKind::Flat;
  int fiber_dim = 2;
  std::vector<std::string> fiber_coords;
  std::vector<Expr> fiber_metric;
  std::vector<Interval> fiber_domain;
};

inline EinsteinTypeStructure alpha0_warped_structure(const Alpha0Spec& spec) {
  const int m = spec.fiber_dim + 1;
  Expr fp = spec.potential.diff(0).simplified();

  Point origin(1, 0.0);
  double slope0 = fp.eval(origin);
  if (std::abs(slope0) < 1e-12)
    throw ZeroInitialSlope("potential has vanishing slope at r=0");

  // The derivation needs f' nonvanishing (same sign as at the base) across
  // the chart interval; a sign flip would also make the warp nonpositive.
  {
    const int steps = 256;
    double lo = std::min(spec.radial.lo, 0.0), hi = std::max(spec.radial.hi, 0.0);
    Point probe(1, 0.0);
    for (int i = 0; i <= steps; ++i) {
      probe[0] = lo + (hi - lo) * i / steps;
      double v = fp.eval(probe);
      if (std::abs(v) < 1e-12 || v * slope0 < 0.0)
        throw SignChange("potential slope vanishes or changes sign at r=" + std::to_string(probe[0]));
    }
  }

  WarpedSpec ws;
  ws.name = spec.name.empty() ? "alpha0_warp" : spec.name;
  ws.warp = ((fp / Expr::number(slope0)) * exp(Expr::number(spec.mu) * spec.potential)).simplified();
  ws.radial = spec.radial;
  ws.fiber = spec.fiber;
  ws.fiber_dim = spec.fiber_dim;
  ws.fiber_coords = spec.fiber_coords;
  ws.fiber_metric = spec.fiber_metric;
  ws.fiber_domain = spec.fiber_domain;
  ChartPtr chart = warped_chart(ws);

  Expr lambda = ((chart->laplacian_sym(spec.potential) +
                  Expr::number(spec.mu) * chart->grad_norm2_sym(spec.potential)) /
                 Expr::number(static_cast<double>(m)))
                    .simplified();
  return EinsteinTypeStructure(chart, 0.0, 1.0, spec.mu, 0.0, lambda, spec.potential);
}

// ---------------------------------------------------------------------------
// Gaussian soliton: flat R^m with f = lambda0 |x|^2 / 2, so Hess f = lambda0 g.

inline EinsteinTypeStructure gaussian_soliton(int m, double lambda0) {
  ChartPtr chart = flat_chart(m, "gaussian" + std::to_string(m));
  Expr f = Expr::number(0.0);
  for (int i = 0; i < m; ++i) {
    Expr xi = Expr::coord(i, chart->coords()[static_cast<std::size_t>(i)]);
    f = f + Expr::number(0.5 * lambda0) * xi * xi;
  }
  return EinsteinTypeStructure::ricci_soliton(chart, f.simplified(), lambda0);
}

// ---------------------------------------------------------------------------
// Degenerate structures from Einstein metrics.
//
// If E is Einstein with Ric = Lambda E, then g = e^{-2af} E carries the
// structure (alpha, beta, mu, rho) = (1, -(m-2)a, (m-2)a^2, 1/(m-1)) with
// lambda = -a lap_g f - (Lambda/(m-1)) e^{2af}, and beta^2 = (m-2) alpha mu
// holds exactly, so the structure is degenerate and e^{2af} g = E recovers
// the Einstein metric as the conformal chart.

inline EinsteinTypeStructure degenerate_from_einstein(ChartPtr einstein, const Expr& f, double a) {
  if (a == 0.0) throw InvalidParameters("conformal exponent a must be nonzero");
  const int m = einstein->dim();

  {
    BundleCache bc(*einstein);
    double worst = 0.0;
    for (const Point& p : einstein->sample(32, 77)) {
      const CurvatureBundle& B = bc.at(p);
      double lam = B.S / m, num = 0.0, scale = 1.0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          num = std::max(num, std::abs(B.Ric(i, j) - lam * B.g(i, j)));
          scale = std::max(scale, std::abs(B.Ric(i, j)));
        }
      worst = std::max(worst, num / scale);
    }
    if (worst > 1e-8)
      throw NotEinstein("chart '" + einstein->name() + "' is not Einstein (residual " +
                        std::to_string(worst) + ")");
  }

  double Lambda;
  {
    BundleCache bc(*einstein);
    Point p = einstein->sample(1, 78).front();
    Lambda = bc.at(p).S / m;
  }

  Expr conf = exp(Expr::number(-2.0 * a) * f).simplified();
  std::vector<Expr> upper;
  for (int i = 0; i < m; ++i)
    for (int j = i; j < m; ++j) {
      const Expr& e = einstein->metric_entry(i, j);
      upper.push_back(detail::is_zero_expr(e) ? Expr::number(0.0) : (conf * e).simplified());
    }
  auto host = std::make_shared<const Chart>(einstein->name() + "_degenerate", einstein->coords(),
                                            std::move(upper), einstein->domain());

  Expr lambda = (Expr::number(-a) * host->laplacian_sym(f) -
                 Expr::number(Lambda / (m - 1)) * exp(Expr::number(2.0 * a) * f))
                    .simplified();
  double beta = -(m - 2) * a;
  double mu = (m - 2) * a * a;
  return EinsteinTypeStructure(host, 1.0, beta, mu, 1.0 / (m - 1), lambda, f);
}

// ---------------------------------------------------------------------------
// Named corpus

struct CorpusEntry {
  std::string name;
  std::string summary;
  ChartPtr chart;
  std::shared_ptr<const EinsteinTypeStructure> structure;  // null for chart-only entries
};

namespace detail {

// Generic non-Einstein fiber shared by the off-shell chart and the alpha=0
// builders; its scalar curvature varies over the fiber, which keeps the Weyl
// and difference tensors of the total space away from zero.
inline void bumpy_fiber(Alpha0Spec& spec) {
  spec.fiber = FiberKind::Declared;
  spec.fiber_dim = 3;
  spec.fiber_coords = {"q1", "q2", "q3"};
  Expr q1 = Expr::coord(1, "q1"), q2 = Expr::coord(2, "q2");
  spec.fiber_metric = {Expr::number(1.0), Expr::number(0.0), Expr::number(0.0),
                       (Expr::number(1.0) + q1 * q1 / Expr::number(4.0)).simplified(), Expr::number(0.0),
                       (Expr::number(1.0) + q2 * q2 / Expr::number(4.0)).simplified()};
  spec.fiber_domain = {{-1.0, 1.0}, {-1.0, 1.0}, {-1.0, 1.0}};
}

inline CorpusEntry chart_entry(std::string name, std::string summary, ChartPtr c) {
  return CorpusEntry{std::move(name), std::move(summary), std::move(c), nullptr};
}

inline CorpusEntry structure_entry(std::string name, std::string summary, EinsteinTypeStructure s) {
  auto sp = std::make_shared<const EinsteinTypeStructure>(std::move(s));
  return CorpusEntry{std::move(name), std::move(summary), sp->chart_ptr(), sp};
}

inline std::vector<CorpusEntry> build_corpus() {
  std::vector<CorpusEntry> out;
  Expr r = Expr::coord(0, "r");

  out.push_back(chart_entry("flat3", "Euclidean R^3", flat_chart(3)));
  out.push_back(chart_entry("flat4", "Euclidean R^4", flat_chart(4)));
  out.push_back(chart_entry("sphere3", "unit S^3, geodesic polar", sphere_chart(3)));
  out.push_back(chart_entry("sphere4", "unit S^4, geodesic polar", sphere_chart(4)));
  out.push_back(chart_entry("hyperbolic3", "unit H^3, horospherical", horosphere_chart(3)));

  {
    Alpha0Spec fib;
    bumpy_fiber(fib);
    WarpedSpec ws;
    ws.name = "warp_generic4";
    ws.warp = (Expr::number(1.0) + r * r / Expr::number(10.0)).simplified();
    ws.radial = {0.2, 1.8};
    ws.fiber = FiberKind::Declared;
    ws.fiber_dim = 3;
    ws.fiber_coords = fib.fiber_coords;
    ws.fiber_metric = fib.fiber_metric;
    ws.fiber_domain = fib.fiber_domain;
    out.push_back(chart_entry("warp_generic4", "generic warped product, no structure holds", warped_chart(ws)));
  }

  out.push_back(structure_entry("gaussian3", "Gaussian shrinker on R^3", gaussian_soliton(3, 0.5)));
  out.push_back(structure_entry("gaussian4", "Gaussian shrinker on R^4", gaussian_soliton(4, 0.5)));

  {
    ChartPtr s4 = sphere_chart(4);
    out.push_back(structure_entry("sphere4_einstein", "round S^4 as an Einstein structure",
                                  EinsteinTypeStructure::einstein(s4)));
    out.push_back(structure_entry(
        "sphere4_almost", "Ricci almost soliton on S^4, f = cos r",
        EinsteinTypeStructure::ricci_almost_soliton(s4, cos(r), (Expr::number(3.0) - cos(r)).simplified())));
    out.push_back(structure_entry("sphere4_degenerate", "degenerate structure conformal to round S^4",
                                  degenerate_from_einstein(s4, cos(r), 1.0)));
  }

  out.push_back(structure_entry(
      "hyperbolic4_almost", "Ricci almost soliton on H^4, f = cosh r",
      EinsteinTypeStructure::ricci_almost_soliton(hyperbolic_polar_chart(4), cosh(r),
                                                  (cosh(r) - Expr::number(3.0)).simplified())));

  {
    ChartPtr f3 = flat_chart(3);
    Expr x1 = Expr::coord(0, "x1"), x2 = Expr::coord(1, "x2"), x3 = Expr::coord(2, "x3");
    Expr half_r2 = (Expr::number(0.5) * (x1 * x1 + x2 * x2 + x3 * x3)).simplified();
    out.push_back(structure_entry("flat3_yamabe", "Yamabe soliton on R^3, f = |x|^2/2",
                                  EinsteinTypeStructure::yamabe_soliton(f3, half_r2, 1.0)));
    out.push_back(structure_entry("flat3_rho_einstein", "rho-Einstein structure on R^3, rho = 1/2",
                                  EinsteinTypeStructure::rho_einstein(f3, half_r2, 0.5, Expr::number(1.0))));
    out.push_back(structure_entry(
        "flat3_conformal", "conformal gradient soliton on R^3, Hess f = g",
        EinsteinTypeStructure::conformal_gradient_soliton(f3, half_r2, Expr::number(1.0))));
  }

  out.push_back(structure_entry(
      "hyperbolic3_yamabe_quasi", "quasi Yamabe soliton on horospherical H^3, f = -2r",
      EinsteinTypeStructure::yamabe_quasi_soliton(horosphere_chart(3), Expr::number(-2.0) * r, 2.0,
                                                  Expr::number(4.0))));
  out.push_back(structure_entry(
      "hyperbolic4_quasi_einstein", "quasi-Einstein structure on horospherical H^4, f = -2r",
      EinsteinTypeStructure::quasi_einstein(horosphere_chart(4), Expr::number(-2.0) * r, 2.0,
                                            Expr::number(-5.0))));

  out.push_back(structure_entry("flat4_degenerate", "degenerate structure conformal to flat R^4",
                                degenerate_from_einstein(flat_chart(4), Expr::coord(0, "x1"), 1.0)));

  auto alpha0 = [](std::string name, Expr f, double mu) {
    Alpha0Spec spec;
    spec.name = std::move(name);
    spec.potential = std::move(f);
    spec.mu = mu;
    spec.radial = {0.1, 1.2};
    bumpy_fiber(spec);
    return alpha0_warped_structure(spec);
  };
  Expr f_exp = (exp(r) - Expr::number(1.0)).simplified();
  Expr f_poly = (r + r * r * r / Expr::number(3.0)).simplified();
  out.push_back(structure_entry("alpha0_warp_exp", "warped alpha=0 structure, f = e^r - 1, mu = 0",
                                alpha0("alpha0_warp_exp", f_exp, 0.0)));
  out.push_back(structure_entry("alpha0_warp_exp_mu", "warped alpha=0 structure, f = e^r - 1, mu = 1/2",
                                alpha0("alpha0_warp_exp_mu", f_exp, 0.5)));
  out.push_back(structure_entry("alpha0_warp_poly", "warped alpha=0 structure, f = r + r^3/3, mu = 0",
                                alpha0("alpha0_warp_poly", f_poly, 0.0)));
  out.push_back(structure_entry("alpha0_warp_poly_mu", "warped alpha=0 structure, f = r + r^3/3, mu = 1/2",
                                alpha0("alpha0_warp_poly_mu", f_poly, 0.5)));

  return out;
}

}  // namespace detail

inline const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> entries = detail::build_corpus();
  return entries;
}

inline const CorpusEntry& corpus_entry(std::string_view name) {
  for (const CorpusEntry& e : corpus())
    if (e.name == name) return e;
  throw UnknownCorpusEntry("unknown corpus entry '" + std::string(name) + "'");
}

inline std::vector<std::string> corpus_names() {
  std::vector<std::string> out;
  for (const CorpusEntry& e : corpus()) out.push_back(e.name);
  return out;
}

}  // namespace etv
