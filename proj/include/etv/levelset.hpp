#ifndef ETV_LEVELSET_HPP
#define ETV_LEVELSET_HPP

// Geometry of regular level sets of the potential: orthonormal frames adapted
// to a level hypersurface, its second fundamental form and mean curvature,
// the identity relating |D|^2 to the traceless second form and the mixed
// Ricci components, and the property report for level sets of structures
// with D = 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "etv/chart.hpp"
#include "etv/curvature.hpp"
#include "etv/einstein_type.hpp"
#include "etv/errors.hpp"

namespace etv {

inline constexpr double kRegularEps = 1e-8;

// Orthonormal frame e_1 ... e_m at a point with e_1 ... e_{m-1} tangent to
// the level set of f and e_m = grad f / |grad f|.
struct AdaptedFrame {
  int m = 0;
  std::vector<std::vector<double>> e;  // e[k][i]: coordinate components of e_{k+1}
  double grad_norm = 0.0;

  const std::vector<double>& vec(int k) const { return e[static_cast<std::size_t>(k)]; }
  const std::vector<double>& normal() const { return e.back(); }
};

namespace detail {
inline double frame_ip(const CurvatureBundle& B, const std::vector<double>& u,
                       const std::vector<double>& v) {
  double s = 0.0;
  for (int i = 0; i < B.m; ++i)
    for (int j = 0; j < B.m; ++j)
      s += B.g(i, j) * u[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(j)];
  return s;
}
}  // namespace detail

// Deterministic construction: the normal direction first, then Gram-Schmidt
// over the coordinate axes with the axis most parallel to the gradient
// dropped. `seed` rotates the order in which axes are fed in, giving an
// independent tangent basis for basis-invariance checks.
inline AdaptedFrame adapted_frame_at(const EinsteinTypeStructure& s, const CurvatureBundle& B,
                                     unsigned seed = 0, double eps = kRegularEps) {
  const int m = B.m;
  HessData H = hess_data(B, s.f_cache());
  double gn = std::sqrt(std::max(0.0, H.grad2));
  if (gn < eps)
    throw CriticalPoint("|grad f| = " + std::to_string(gn) + " below the regularity threshold at " +
                        detail::point_str(B.p));

  AdaptedFrame F;
  F.m = m;
  F.grad_norm = gn;
  std::vector<double> em(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) em[static_cast<std::size_t>(i)] = H.gradup[static_cast<std::size_t>(i)] / gn;

  // |g(d_i, e_m)| = |f_i| / gn: drop the axis that is most parallel
  int drop = 0;
  for (int i = 1; i < m; ++i)
    if (std::abs(H.df[static_cast<std::size_t>(i)]) > std::abs(H.df[static_cast<std::size_t>(drop)]))
      drop = i;

  std::vector<int> order;
  for (int i = 0; i < m; ++i)
    if (i != drop) order.push_back(i);
  if (!order.empty())
    std::rotate(order.begin(), order.begin() + (seed % order.size()), order.end());

  std::vector<std::vector<double>> tang;
  for (int axis : order) {
    std::vector<double> v(static_cast<std::size_t>(m), 0.0);
    v[static_cast<std::size_t>(axis)] = 1.0;
    double c = detail::frame_ip(B, v, em);
    for (int i = 0; i < m; ++i) v[static_cast<std::size_t>(i)] -= c * em[static_cast<std::size_t>(i)];
    for (const auto& prev : tang) {
      double d = detail::frame_ip(B, v, prev);
      for (int i = 0; i < m; ++i) v[static_cast<std::size_t>(i)] -= d * prev[static_cast<std::size_t>(i)];
    }
    double n2 = detail::frame_ip(B, v, v);
    if (n2 < 1e-20)
      throw DomainError("degenerate adapted frame at " + detail::point_str(B.p));
    double inv = 1.0 / std::sqrt(n2);
    for (double& x : v) x *= inv;
    tang.push_back(std::move(v));
  }

  F.e = std::move(tang);
  F.e.push_back(std::move(em));
  return F;
}

inline AdaptedFrame adapted_frame_at(const EinsteinTypeStructure& s, const Point& p,
                                     unsigned seed = 0, double eps = kRegularEps) {
  return adapted_frame_at(s, curvature_bundle(s.chart(), p), seed, eps);
}

// Second fundamental form of the level set through p, in the adapted frame.
// h[a*(m-1)+b] = -(1/|grad f|) Hess f(e_a, e_b); the structure route replaces
// the Hessian through the defining equation and is filled when beta != 0.
struct SecondForm {
  AdaptedFrame frame;
  std::vector<double> h;
  std::vector<double> h_structure;
  bool has_structure_route = false;
  double mean = 0.0;        // (1/(m-1)) h_aa
  double traceless2 = 0.0;  // |h_ab - h delta_ab|^2
  double routes_difference = 0.0;

  double hval(int a, int b) const {
    return h[static_cast<std::size_t>(a) * static_cast<std::size_t>(frame.m - 1) +
             static_cast<std::size_t>(b)];
  }
};

inline SecondForm second_fundamental_form_at(const EinsteinTypeStructure& s,
                                             const CurvatureBundle& B, unsigned seed = 0,
                                             double eps = kRegularEps) {
  const int m = B.m;
  const int n = m - 1;
  HessData H = hess_data(B, s.f_cache());
  SecondForm out;
  out.frame = adapted_frame_at(s, B, seed, eps);
  const double gn = out.frame.grad_norm;

  out.h.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double fab = 0.0;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j)
          fab += H.hess[detail::ix2(m, i, j)] * out.frame.vec(a)[static_cast<std::size_t>(i)] *
                 out.frame.vec(b)[static_cast<std::size_t>(j)];
      out.h[static_cast<std::size_t>(a) * n + b] = -fab / gn;
    }

  double tr = 0.0;
  for (int a = 0; a < n; ++a) tr += out.h[static_cast<std::size_t>(a) * n + a];
  out.mean = tr / n;
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      double v = out.h[static_cast<std::size_t>(a) * n + b] - (a == b ? out.mean : 0.0);
      out.traceless2 += v * v;
    }

  if (s.beta() != 0.0) {
    out.has_structure_route = true;
    out.h_structure.assign(static_cast<std::size_t>(n) * n, 0.0);
    double lam = s.lambda_cache().value(B.p);
    double rhs = s.rho() * B.S + lam;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double rab = 0.0;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j)
            rab += B.Ric(i, j) * out.frame.vec(a)[static_cast<std::size_t>(i)] *
                   out.frame.vec(b)[static_cast<std::size_t>(j)];
        double v = (s.alpha() * rab - (a == b ? rhs : 0.0)) / (s.beta() * gn);
        out.h_structure[static_cast<std::size_t>(a) * n + b] = v;
        out.routes_difference =
            std::max(out.routes_difference, std::abs(v - out.h[static_cast<std::size_t>(a) * n + b]));
      }
  }
  return out;
}

inline SecondForm second_fundamental_form_at(const EinsteinTypeStructure& s, const Point& p,
                                             unsigned seed = 0, double eps = kRegularEps) {
  return second_fundamental_form_at(s, curvature_bundle(s.chart(), p), seed, eps);
}

// |D|^2 = (beta/alpha)^2 (2|grad f|^4/(m-2)^2) |h_ab - h delta_ab|^2
//         + (2|grad f|^2/((m-1)(m-2))) R_am R_am
struct D2LevelsetSplit {
  double d2 = 0.0;     // |D|^2
  double shear = 0.0;  // traceless second-form term
  double mixed = 0.0;  // mixed Ricci term
  double residual() const { return std::abs(d2 - shear - mixed); }
  double scale() const { return std::max({std::abs(d2), std::abs(shear), std::abs(mixed)}); }
  double normalized() const { return residual() / std::max(1.0, scale()); }
};

inline Gated<D2LevelsetSplit> d2_levelset_identity_residual_at(const EinsteinTypeStructure& s,
                                                               const CurvatureBundle& B,
                                                               bool use_structure_h = false,
                                                               double gate = kDefaultGate,
                                                               double eps = kRegularEps) {
  if (s.alpha() == 0.0) throw AlphaZero("the level-set norm identity needs alpha != 0");
  if (s.beta() == 0.0) throw BetaZero("the level-set norm identity needs beta != 0");
  const int m = B.m;
  const int n = m - 1;
  SecondForm sf = second_fundamental_form_at(s, B, 0, eps);
  const double gn = sf.frame.grad_norm;

  double traceless2 = sf.traceless2;
  if (use_structure_h) {
    double tr = 0.0;
    for (int a = 0; a < n; ++a) tr += sf.h_structure[static_cast<std::size_t>(a) * n + a];
    double mean = tr / n;
    traceless2 = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double v = sf.h_structure[static_cast<std::size_t>(a) * n + b] - (a == b ? mean : 0.0);
        traceless2 += v * v;
      }
  }

  double ram2 = 0.0;
  for (int a = 0; a < n; ++a) {
    double r = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        r += B.Ric(i, j) * sf.frame.vec(a)[static_cast<std::size_t>(i)] *
             sf.frame.normal()[static_cast<std::size_t>(j)];
    ram2 += r * r;
  }

  D2LevelsetSplit v;
  v.d2 = norm2(d_tensor_at(s, B, 1).t, B.md);
  double ba = s.beta() / s.alpha();
  v.shear = ba * ba * 2.0 * gn * gn * gn * gn / ((m - 2) * (m - 2)) * traceless2;
  v.mixed = 2.0 * gn * gn / (static_cast<double>(m - 1) * (m - 2)) * ram2;

  double gr = structure_residual_normalized(s, B);
  return {gr <= gate, gr, v};
}

inline Gated<D2LevelsetSplit> d2_levelset_identity_residual_at(const EinsteinTypeStructure& s,
                                                               const Point& p,
                                                               bool use_structure_h = false,
                                                               double gate = kDefaultGate,
                                                               double eps = kRegularEps) {
  return d2_levelset_identity_residual_at(s, curvature_bundle(s.chart(), p), use_structure_h,
                                          gate, eps);
}

// Points with f = c, found by scanning coordinate lines through domain
// samples for sign changes and bisecting to |f - c| <= tol.
inline std::vector<Point> sample_level(const EinsteinTypeStructure& s, double c, int count,
                                       unsigned seed = 1, double tol = 1e-10) {
  const Chart& ch = s.chart();
  const int m = ch.dim();
  const ScalarCache& fc = s.f_cache();
  std::vector<Point> out;
  std::vector<Point> seeds = ch.sample(count * 8, seed);
  for (const Point& sp : seeds) {
    if (static_cast<int>(out.size()) >= count) break;
    for (int axis = 0; axis < m; ++axis) {
      double lo = ch.domain()[static_cast<std::size_t>(axis)].lo;
      double hi = ch.domain()[static_cast<std::size_t>(axis)].hi;
      double w = hi - lo;
      lo += 0.02 * w;
      hi -= 0.02 * w;
      auto phi = [&](double t) {
        Point q = sp;
        q[static_cast<std::size_t>(axis)] = t;
        return fc.value(q) - c;
      };
      const int steps = 32;
      double a = lo, fa = phi(lo), b = 0.0;
      bool found = false;
      for (int i = 1; i <= steps; ++i) {
        double t = lo + (static_cast<double>(i) / steps) * (hi - lo);
        double v = phi(t);
        if ((fa < 0.0) != (v < 0.0) || fa == 0.0) {
          b = t;
          found = true;
          break;
        }
        a = t;
        fa = v;
      }
      if (!found) continue;
      double root = a;
      for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (a + b);
        double vm = phi(mid);
        root = mid;
        if (std::abs(vm) <= tol) break;
        if ((fa < 0.0) != (vm < 0.0)) {
          b = mid;
        } else {
          a = mid;
          fa = vm;
        }
      }
      if (std::abs(phi(root)) > tol) continue;
      Point q = sp;
      q[static_cast<std::size_t>(axis)] = root;
      out.push_back(q);
      break;  // one root per seed keeps the sample spread over the level set
    }
  }
  return out;
}

// Level-set property report: each conclusion of the D = 0 theorem measured
// across a sample of one level set, gated on |D| and on the defining
// equation actually holding there.
struct LevelSetReport {
  bool gate_passed = false;
  double d_gate = 0.0;          // max |D| over the sample
  double structure_gate = 0.0;  // max normalized defining-equation residual
  int points = 0;
  std::vector<NamedResidual> properties;
};

inline LevelSetReport levelset_property_report(const EinsteinTypeStructure& s,
                                               const std::vector<Point>& level,
                                               double d_gate_tol = 1e-6,
                                               double structure_gate_tol = 1e-6,
                                               double eps = kRegularEps) {
  LevelSetReport rep;
  rep.points = static_cast<int>(level.size());
  if (level.empty()) return rep;

  const Chart& ch = s.chart();
  BundleCache bc(ch);
  const int m = ch.dim();
  const int n = m - 1;

  double g2lo = std::numeric_limits<double>::infinity(), g2hi = -g2lo;
  double hlo = g2lo, hhi = -g2lo;
  double slo = g2lo, shi = -g2lo;
  double llo = g2lo, lhi = -g2lo;
  double ram = 0.0, ram_scale = 0.0;
  double umb = 0.0, umb_scale = 0.0;
  double block = 0.0, block_scale = 0.0;
  double ind = 0.0, ind_scale = 0.0;
  double cot = 0.0, weyl = 0.0;

  for (const Point& p : level) {
    const CurvatureBundle& B = bc.at(p);
    HessData H = hess_data(B, s.f_cache());
    SecondForm sf = second_fundamental_form_at(s, B, 0, eps);
    const AdaptedFrame& F = sf.frame;

    rep.d_gate = std::max(rep.d_gate,
                          std::sqrt(std::max(0.0, norm2(d_tensor_at(s, B, 1).t, B.md))));
    rep.structure_gate = std::max(rep.structure_gate, structure_residual_normalized(s, B));

    g2lo = std::min(g2lo, H.grad2);
    g2hi = std::max(g2hi, H.grad2);
    hlo = std::min(hlo, sf.mean);
    hhi = std::max(hhi, sf.mean);
    slo = std::min(slo, B.S);
    shi = std::max(shi, B.S);
    double lam = s.lambda_cache().value(p);
    llo = std::min(llo, lam);
    lhi = std::max(lhi, lam);

    // Ricci in the adapted frame
    std::vector<double> rf(static_cast<std::size_t>(m) * m, 0.0);
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double v = 0.0;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j)
            v += B.Ric(i, j) * F.vec(a)[static_cast<std::size_t>(i)] *
                 F.vec(b)[static_cast<std::size_t>(j)];
        rf[detail::ix2(m, a, b)] = v;
        ram_scale = std::max(ram_scale, std::abs(v));
      }
    for (int a = 0; a < n; ++a) ram = std::max(ram, std::abs(rf[detail::ix2(m, a, n)]));

    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        umb = std::max(umb, std::abs(sf.hval(a, b) - (a == b ? sf.mean : 0.0)));
        umb_scale = std::max(umb_scale, std::abs(sf.hval(a, b)));
      }

    // R_ab = (S - R_mm)/(m-1) delta_ab on the tangent block
    double rmm = rf[detail::ix2(m, n, n)];
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double want = (a == b) ? (B.S - rmm) / n : 0.0;
        block = std::max(block, std::abs(rf[detail::ix2(m, a, b)] - want));
        block_scale = std::max({block_scale, std::abs(want), std::abs(rf[detail::ix2(m, a, b)])});
      }

    // induced Ricci via the Gauss equation:
    //   Ric^L_ab = R_ab - R_mamb + (m-1) h h_ab - (h h)_ab
    std::vector<double> rmamb(static_cast<std::size_t>(n) * n, 0.0);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double v = 0.0;
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j)
            for (int k = 0; k < m; ++k)
              for (int t = 0; t < m; ++t)
                v += B.R4(i, j, k, t) * F.normal()[static_cast<std::size_t>(i)] *
                     F.vec(a)[static_cast<std::size_t>(j)] * F.normal()[static_cast<std::size_t>(k)] *
                     F.vec(b)[static_cast<std::size_t>(t)];
        rmamb[static_cast<std::size_t>(a) * n + b] = v;
      }
    std::vector<double> ric_ind(static_cast<std::size_t>(n) * n, 0.0);
    double tr_ind = 0.0;
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double hh = 0.0;
        for (int cix = 0; cix < n; ++cix) hh += sf.hval(a, cix) * sf.hval(cix, b);
        double v = rf[detail::ix2(m, a, b)] - rmamb[static_cast<std::size_t>(a) * n + b] +
                   n * sf.mean * sf.hval(a, b) - hh;
        ric_ind[static_cast<std::size_t>(a) * n + b] = v;
        if (a == b) tr_ind += v;
      }
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double want = (a == b) ? tr_ind / n : 0.0;
        ind = std::max(ind, std::abs(ric_ind[static_cast<std::size_t>(a) * n + b] - want));
        ind_scale = std::max(ind_scale, std::abs(ric_ind[static_cast<std::size_t>(a) * n + b]));
      }

    cot = std::max(cot, std::sqrt(std::max(0.0, norm2(B.cotton_tensor(), B.md))));
    if (m == 4) weyl = std::max(weyl, std::sqrt(std::max(0.0, norm2(B.weyl_tensor(), B.md))));
  }

  rep.gate_passed = rep.d_gate <= d_gate_tol && rep.structure_gate <= structure_gate_tol;
  auto& P = rep.properties;
  P.push_back({"grad_norm_constancy", "|grad f|^2 constant on the level set", g2hi - g2lo,
               std::max(std::abs(g2hi), std::abs(g2lo))});
  P.push_back({"ric_mixed_vanishes", "Ric(e_a, e_m) = 0", ram, ram_scale});
  P.push_back({"umbilicity", "h_ab = h delta_ab", umb, umb_scale});
  P.push_back({"mean_curvature_constancy", "h constant on the level set", hhi - hlo,
               std::max(std::abs(hhi), std::abs(hlo))});
  P.push_back({"scalar_curvature_constancy", "S constant on the level set", shi - slo,
               std::max(std::abs(shi), std::abs(slo))});
  P.push_back({"lambda_constancy", "lambda constant on the level set", lhi - llo,
               std::max(std::abs(lhi), std::abs(llo))});
  P.push_back({"ricci_block_form", "R_ab = (S - R_mm)/(m-1) delta_ab", block, block_scale});
  P.push_back({"induced_einstein", "the level set is Einstein (Gauss equation)", ind, ind_scale});
  P.push_back({"cotton_vanishes", "D = 0 forces C = 0", cot, 1.0});
  if (m == 4) P.push_back({"weyl_vanishes", "in dimension four D = 0 forces W = 0", weyl, 1.0});
  return rep;
}

}  // namespace etv

#endif
