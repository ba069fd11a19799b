#ifndef ETV_CURVATURE_HPP
#define ETV_CURVATURE_HPP

// The curvature stack at a point: Christoffel, Riemann, Ricci, scalar
// curvature, Schouten, Einstein, Weyl, Cotton, Bach, and the identity suite
// relating them.
//
// Conventions (pinned):
//   Gamma^k_{ij} = 1/2 g^{ks} (d_i g_{sj} + d_j g_{si} - d_s g_{ij})
//   R^s_{jkt}    = d_k Gamma^s_{tj} - d_t Gamma^s_{kj}
//                  + Gamma^s_{ka} Gamma^a_{tj} - Gamma^s_{ta} Gamma^a_{kj}
//   R_{ijkt}     = g_{is} R^s_{jkt},  Ric_{jt} = R^s_{jst},  S = g^{jt} Ric_{jt}
//   (unit round sphere then has Ric = (m-1) g, S = m(m-1))
//   A = Ric - S/(2(m-1)) g,  E = Ric - (S/2) g
//   C_{ijk} = A_{ij;k} - A_{ik;j}   (covariant-derivative slot appended last)
//   B_{ij} = 1/(m-2) (C_{jik,k} + R_{kt} W_{ikjt})
//
// Everything through Cotton is computed from symbolic metric partials
// (orders <= 3) by exact chain rule, so those residuals sit at round-off.
// Divergences and second covariant derivatives use 4th-order finite
// differences of the exact fields.

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "etv/chart.hpp"
#include "etv/field.hpp"
#include "etv/tensor.hpp"

namespace etv {

namespace detail {
inline std::size_t ix2(int m, int a, int b) {
  return static_cast<std::size_t>(a) * m + b;
}
inline std::size_t ix3(int m, int a, int b, int c) {
  return (static_cast<std::size_t>(a) * m + b) * m + c;
}
inline std::size_t ix4(int m, int a, int b, int c, int d) {
  return ((static_cast<std::size_t>(a) * m + b) * m + c) * m + d;
}
inline std::size_t ix5(int m, int a, int b, int c, int d, int e) {
  return (((static_cast<std::size_t>(a) * m + b) * m + c) * m + d) * m + e;
}
}  // namespace detail

// A scalar function with symbolic partial derivatives up to third order,
// deduplicated by symmetry of mixed partials.
class ScalarCache {
 public:
  ScalarCache() = default;
  ScalarCache(Expr f, int m) : f_(std::move(f)), m_(m) {
    u1_.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) u1_.push_back(f_.diff(i).simplified());
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) u2_.push_back(u1_[static_cast<std::size_t>(i)].diff(j).simplified());
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j)
        for (int k = j; k < m; ++k)
          u3_.push_back(u2_[tri2(i, j)].diff(k).simplified());
  }

  const Expr& expr() const { return f_; }
  int dim() const { return m_; }
  double value(const Point& p) const { return f_.eval(p); }

  // Flat symmetric arrays: d1 (m), d2 (m^2), d3 (m^3).
  void derivatives(const Point& p, std::vector<double>& d1, std::vector<double>& d2,
                   std::vector<double>& d3) const {
    const int m = m_;
    d1.assign(static_cast<std::size_t>(m), 0.0);
    d2.assign(static_cast<std::size_t>(m) * m, 0.0);
    d3.assign(static_cast<std::size_t>(m) * m * m, 0.0);
    for (int i = 0; i < m; ++i) d1[static_cast<std::size_t>(i)] = u1_[static_cast<std::size_t>(i)].eval(p);
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        double v = u2_[tri2(i, j)].eval(p);
        d2[detail::ix2(m, i, j)] = v;
        d2[detail::ix2(m, j, i)] = v;
      }
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j)
        for (int k = j; k < m; ++k) {
          double v = u3_[tri3(i, j, k)].eval(p);
          int perm[6][3] = {{i, j, k}, {i, k, j}, {j, i, k}, {j, k, i}, {k, i, j}, {k, j, i}};
          for (auto& q : perm) d3[detail::ix3(m, q[0], q[1], q[2])] = v;
        }
  }

 private:
  std::size_t tri2(int i, int j) const {  // i <= j
    return static_cast<std::size_t>(i) * m_ - static_cast<std::size_t>(i) * (i - 1) / 2 +
           static_cast<std::size_t>(j - i);
  }
  std::size_t tri3(int i, int j, int k) const {  // i <= j <= k
    std::size_t n = 0;
    for (int a = 0; a < i; ++a) n += static_cast<std::size_t>(m_ - a) * (m_ - a + 1) / 2;
    for (int b = i; b < j; ++b) n += static_cast<std::size_t>(m_ - b);
    return n + static_cast<std::size_t>(k - j);
  }

  Expr f_ = Expr::number(0.0);
  int m_ = 0;
  std::vector<Expr> u1_, u2_, u3_;
};

struct CurvatureBundle {
  int m = 0;
  Point p;
  MetricData md;
  std::vector<double> dg, d2g, d3g;       // [k][i][j], [k][l][i][j], [k][l][n][i][j]
  std::vector<double> dginv, d2ginv;      // same derivative layout
  std::vector<double> gamma;              // [k][i][j] = Gamma^k_{ij}
  std::vector<double> dgamma;             // [r][k][i][j] = d_r Gamma^k_{ij}
  std::vector<double> d2gamma;            // [t][r][k][i][j]
  std::vector<double> riem_up;            // [s][j][k][t] = R^s_{jkt}
  std::vector<double> driem_up;           // [r][s][j][k][t]
  std::vector<double> riem4;              // [i][j][k][t] = R_{ijkt}
  std::vector<double> driem4;             // [r][i][j][k][t]
  std::vector<double> ric, dric;          // [j][t], [r][j][t]
  double S = 0.0;
  std::vector<double> dS;                 // [r]  (gradient of a scalar: covariant)
  std::vector<double> nabla_ric;          // [i][j][k] = R_{ij;k}
  std::vector<double> nabla_riem;         // [i][j][k][t][l] = R_{ijkt;l}
  std::vector<double> schouten;           // [i][j]
  std::vector<double> nabla_schouten;     // [i][j][k]
  std::vector<double> cotton;             // [i][j][k] = A_{ij;k} - A_{ik;j}
  std::vector<double> weyl;               // [i][j][k][t]
  std::vector<double> einstein;           // [i][j]

  double g(int i, int j) const { return md.g[detail::ix2(m, i, j)]; }
  double gu(int i, int j) const { return md.ginv[detail::ix2(m, i, j)]; }
  double Gam(int k, int i, int j) const { return gamma[detail::ix3(m, k, i, j)]; }
  double R4(int i, int j, int k, int t) const { return riem4[detail::ix4(m, i, j, k, t)]; }
  double Ric(int i, int j) const { return ric[detail::ix2(m, i, j)]; }
  double A(int i, int j) const { return schouten[detail::ix2(m, i, j)]; }
  double W(int i, int j, int k, int t) const { return weyl[detail::ix4(m, i, j, k, t)]; }
  double C(int i, int j, int k) const { return cotton[detail::ix3(m, i, j, k)]; }
  double NRic(int i, int j, int k) const { return nabla_ric[detail::ix3(m, i, j, k)]; }
  double NA(int i, int j, int k) const { return nabla_schouten[detail::ix3(m, i, j, k)]; }
  double NRiem(int i, int j, int k, int t, int l) const {
    return nabla_riem[detail::ix5(m, i, j, k, t, l)];
  }

  PointTensor ricci_tensor() const { return as_tensor(ric, 2); }
  PointTensor schouten_tensor() const { return as_tensor(schouten, 2); }
  PointTensor einstein_tensor() const { return as_tensor(einstein, 2); }
  PointTensor riemann_tensor() const { return as_tensor(riem4, 4); }
  PointTensor weyl_tensor() const { return as_tensor(weyl, 4); }
  PointTensor cotton_tensor() const { return as_tensor(cotton, 3); }

 private:
  PointTensor as_tensor(const std::vector<double>& a, int rank) const {
    PointTensor t(m, std::vector<Var>(static_cast<std::size_t>(rank), Var::Co));
    t.data() = a;
    return t;
  }
};

inline CurvatureBundle curvature_bundle(const Chart& chart, const Point& p) {
  using detail::ix2;
  using detail::ix3;
  using detail::ix4;
  using detail::ix5;

  CurvatureBundle B;
  const int m = chart.dim();
  B.m = m;
  B.p = p;
  B.md = chart.metric_data_at(p);
  B.dg = chart.metric_partials_at(p, 1);
  B.d2g = chart.metric_partials_at(p, 2);
  B.d3g = chart.metric_partials_at(p, 3);

  const std::size_t m2 = static_cast<std::size_t>(m) * m;
  const std::size_t m3 = m2 * m;
  const std::size_t m4 = m3 * m;
  const std::size_t m5 = m4 * m;

  // d g^{ab} = -g^{ac} (d g_{cd}) g^{db}
  B.dginv.assign(m3, 0.0);
  for (int r = 0; r < m; ++r)
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        double s = 0.0;
        for (int c = 0; c < m; ++c)
          for (int d = 0; d < m; ++d)
            s += B.gu(a, c) * B.dg[ix3(m, r, c, d)] * B.gu(d, b);
        B.dginv[ix3(m, r, a, b)] = -s;
      }

  B.d2ginv.assign(m4, 0.0);
  for (int r = 0; r < m; ++r)
    for (int t = 0; t < m; ++t)
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) {
          double s = 0.0;
          for (int c = 0; c < m; ++c)
            for (int d = 0; d < m; ++d) {
              s += B.dginv[ix3(m, t, a, c)] * B.dg[ix3(m, r, c, d)] * B.gu(d, b);
              s += B.gu(a, c) * B.d2g[ix4(m, t, r, c, d)] * B.gu(d, b);
              s += B.gu(a, c) * B.dg[ix3(m, r, c, d)] * B.dginv[ix3(m, t, d, b)];
            }
          B.d2ginv[ix4(m, t, r, a, b)] = -s;
        }

  // Christoffel and its first two coordinate derivatives.
  auto Asym = [&](int s, int i, int j) {
    return B.dg[ix3(m, i, s, j)] + B.dg[ix3(m, j, s, i)] - B.dg[ix3(m, s, i, j)];
  };
  auto dAsym = [&](int r, int s, int i, int j) {
    return B.d2g[ix4(m, r, i, s, j)] + B.d2g[ix4(m, r, j, s, i)] - B.d2g[ix4(m, r, s, i, j)];
  };
  auto d2Asym = [&](int t, int r, int s, int i, int j) {
    return B.d3g[ix5(m, t, r, i, s, j)] + B.d3g[ix5(m, t, r, j, s, i)] -
           B.d3g[ix5(m, t, r, s, i, j)];
  };

  B.gamma.assign(m3, 0.0);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double s = 0.0;
        for (int t = 0; t < m; ++t) s += B.gu(k, t) * Asym(t, i, j);
        B.gamma[ix3(m, k, i, j)] = 0.5 * s;
      }

  B.dgamma.assign(m4, 0.0);
  for (int r = 0; r < m; ++r)
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) {
          double s = 0.0;
          for (int t = 0; t < m; ++t)
            s += B.dginv[ix3(m, r, k, t)] * Asym(t, i, j) + B.gu(k, t) * dAsym(r, t, i, j);
          B.dgamma[ix4(m, r, k, i, j)] = 0.5 * s;
        }

  B.d2gamma.assign(m5, 0.0);
  for (int t = 0; t < m; ++t)
    for (int r = 0; r < m; ++r)
      for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) {
            double s = 0.0;
            for (int a = 0; a < m; ++a) {
              s += B.d2ginv[ix4(m, t, r, k, a)] * Asym(a, i, j);
              s += B.dginv[ix3(m, r, k, a)] * dAsym(t, a, i, j);
              s += B.dginv[ix3(m, t, k, a)] * dAsym(r, a, i, j);
              s += B.gu(k, a) * d2Asym(t, r, a, i, j);
            }
            B.d2gamma[ix5(m, t, r, k, i, j)] = 0.5 * s;
          }

  // Riemann (1,3) and its coordinate derivative.
  B.riem_up.assign(m4, 0.0);
  for (int s = 0; s < m; ++s)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t) {
          double v = B.dgamma[ix4(m, k, s, t, j)] - B.dgamma[ix4(m, t, s, k, j)];
          for (int a = 0; a < m; ++a)
            v += B.Gam(s, k, a) * B.Gam(a, t, j) - B.Gam(s, t, a) * B.Gam(a, k, j);
          B.riem_up[ix4(m, s, j, k, t)] = v;
        }

  B.driem_up.assign(m5, 0.0);
  for (int r = 0; r < m; ++r)
    for (int s = 0; s < m; ++s)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int t = 0; t < m; ++t) {
            double v = B.d2gamma[ix5(m, r, k, s, t, j)] - B.d2gamma[ix5(m, r, t, s, k, j)];
            for (int a = 0; a < m; ++a) {
              v += B.dgamma[ix4(m, r, s, k, a)] * B.Gam(a, t, j);
              v += B.Gam(s, k, a) * B.dgamma[ix4(m, r, a, t, j)];
              v -= B.dgamma[ix4(m, r, s, t, a)] * B.Gam(a, k, j);
              v -= B.Gam(s, t, a) * B.dgamma[ix4(m, r, a, k, j)];
            }
            B.driem_up[ix5(m, r, s, j, k, t)] = v;
          }

  B.riem4.assign(m4, 0.0);
  B.driem4.assign(m5, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t) {
          double v = 0.0;
          for (int s = 0; s < m; ++s) v += B.g(i, s) * B.riem_up[ix4(m, s, j, k, t)];
          B.riem4[ix4(m, i, j, k, t)] = v;
          for (int r = 0; r < m; ++r) {
            double w = 0.0;
            for (int s = 0; s < m; ++s)
              w += B.dg[ix3(m, r, i, s)] * B.riem_up[ix4(m, s, j, k, t)] +
                   B.g(i, s) * B.driem_up[ix5(m, r, s, j, k, t)];
            B.driem4[ix5(m, r, i, j, k, t)] = w;
          }
        }

  // Ricci, scalar curvature, their derivatives.
  B.ric.assign(m2, 0.0);
  B.dric.assign(m3, 0.0);
  for (int j = 0; j < m; ++j)
    for (int t = 0; t < m; ++t) {
      double v = 0.0;
      for (int s = 0; s < m; ++s) v += B.riem_up[ix4(m, s, j, s, t)];
      B.ric[ix2(m, j, t)] = v;
      for (int r = 0; r < m; ++r) {
        double w = 0.0;
        for (int s = 0; s < m; ++s) w += B.driem_up[ix5(m, r, s, j, s, t)];
        B.dric[ix3(m, r, j, t)] = w;
      }
    }

  B.S = 0.0;
  B.dS.assign(static_cast<std::size_t>(m), 0.0);
  for (int j = 0; j < m; ++j)
    for (int t = 0; t < m; ++t) {
      B.S += B.gu(j, t) * B.Ric(j, t);
      for (int r = 0; r < m; ++r)
        B.dS[static_cast<std::size_t>(r)] += B.dginv[ix3(m, r, j, t)] * B.Ric(j, t) +
                                             B.gu(j, t) * B.dric[ix3(m, r, j, t)];
    }

  // Covariant derivatives (derivative slot last).
  B.nabla_ric.assign(m3, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        double v = B.dric[ix3(m, k, i, j)];
        for (int s = 0; s < m; ++s)
          v -= B.Gam(s, k, i) * B.Ric(s, j) + B.Gam(s, k, j) * B.Ric(i, s);
        B.nabla_ric[ix3(m, i, j, k)] = v;
      }

  B.nabla_riem.assign(m5, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t)
          for (int l = 0; l < m; ++l) {
            double v = B.driem4[ix5(m, l, i, j, k, t)];
            for (int s = 0; s < m; ++s) {
              v -= B.Gam(s, l, i) * B.R4(s, j, k, t);
              v -= B.Gam(s, l, j) * B.R4(i, s, k, t);
              v -= B.Gam(s, l, k) * B.R4(i, j, s, t);
              v -= B.Gam(s, l, t) * B.R4(i, j, k, s);
            }
            B.nabla_riem[ix5(m, i, j, k, t, l)] = v;
          }

  // Schouten, Cotton, Einstein, Weyl.
  const double c1 = 1.0 / (2.0 * (m - 1));
  B.schouten.assign(m2, 0.0);
  B.einstein.assign(m2, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      B.schouten[ix2(m, i, j)] = B.Ric(i, j) - c1 * B.S * B.g(i, j);
      B.einstein[ix2(m, i, j)] = B.Ric(i, j) - 0.5 * B.S * B.g(i, j);
    }

  B.nabla_schouten.assign(m3, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        B.nabla_schouten[ix3(m, i, j, k)] =
            B.NRic(i, j, k) - c1 * B.dS[static_cast<std::size_t>(k)] * B.g(i, j);

  B.cotton.assign(m3, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        B.cotton[ix3(m, i, j, k)] = B.NA(i, j, k) - B.NA(i, k, j);

  B.weyl.assign(m4, 0.0);
  if (m >= 4) {
    const double c2 = 1.0 / (m - 2);
    const double c3 = B.S / (static_cast<double>(m - 1) * (m - 2));
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int t = 0; t < m; ++t) {
            double v = B.R4(i, j, k, t);
            v -= c2 * (B.Ric(i, k) * B.g(j, t) - B.Ric(i, t) * B.g(j, k) +
                       B.Ric(j, t) * B.g(i, k) - B.Ric(j, k) * B.g(i, t));
            v += c3 * (B.g(i, k) * B.g(j, t) - B.g(i, t) * B.g(j, k));
            B.weyl[ix4(m, i, j, k, t)] = v;
          }
  }
  // m = 3: Weyl vanishes identically; leave the zeros in place.

  return B;
}

// Memoizes bundles per exact point so finite-difference stencils shared by
// several checks are paid for once.
class BundleCache {
 public:
  explicit BundleCache(const Chart& c) : chart_(&c) {}

  const Chart& chart() const { return *chart_; }

  const CurvatureBundle& at(const Point& p) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = memo_.find(p);
    if (it != memo_.end()) return *it->second;
    if (memo_.size() > 8192) memo_.clear();  // bound the footprint
    auto b = std::make_unique<CurvatureBundle>(curvature_bundle(*chart_, p));
    const CurvatureBundle& ref = *b;
    memo_.emplace(p, std::move(b));
    return ref;
  }

 private:
  const Chart* chart_;
  mutable std::mutex mu_;
  mutable std::map<Point, std::unique_ptr<CurvatureBundle>> memo_;
};

// ---------------------------------------------------------------------------
// Point API wrappers

inline PointTensor christoffel_at(const Chart& c, const Point& p) {
  CurvatureBundle B = curvature_bundle(c, p);
  PointTensor t(B.m, {Var::Contra, Var::Co, Var::Co});
  t.data() = B.gamma;
  return t;
}
inline PointTensor riemann_at(const Chart& c, const Point& p) {
  return curvature_bundle(c, p).riemann_tensor();
}
inline PointTensor ricci_at(const Chart& c, const Point& p) {
  return curvature_bundle(c, p).ricci_tensor();
}
inline double scalar_at(const Chart& c, const Point& p) { return curvature_bundle(c, p).S; }
inline PointTensor schouten_at(const Chart& c, const Point& p) {
  return curvature_bundle(c, p).schouten_tensor();
}
inline PointTensor einstein_at(const Chart& c, const Point& p) {
  return curvature_bundle(c, p).einstein_tensor();
}
inline PointTensor weyl_at(const Chart& c, const Point& p) {
  return curvature_bundle(c, p).weyl_tensor();
}
inline PointTensor cotton_at(const Chart& c, const Point& p) {
  return curvature_bundle(c, p).cotton_tensor();
}

// ---------------------------------------------------------------------------
// Fields over a bundle cache (for finite-difference derivatives)

namespace detail {

inline NumericField bundle_field(const BundleCache& bc, int rank,
                                 std::vector<double> CurvatureBundle::*member) {
  return make_field(bc.chart(), rank, [&bc, member, rank](const Point& q) {
    const CurvatureBundle& B = bc.at(q);
    PointTensor t(B.m, std::vector<Var>(static_cast<std::size_t>(rank), Var::Co));
    t.data() = B.*member;
    return t;
  });
}

}  // namespace detail

// C_{ijk;l} of the exact Cotton tensor, slots [i][j][k][l].
inline PointTensor nabla_cotton_at(const BundleCache& bc, const Point& p,
                                   const FDOptions& opt = {}) {
  const CurvatureBundle& B = bc.at(p);
  NumericField F = detail::bundle_field(bc, 3, &CurvatureBundle::cotton);
  return covariant_derivative(F, p, B.gamma, opt);
}

// Divergence in the last Cotton slot: (div C)_{ij} = C_{ijk,k}.
inline PointTensor div_cotton_last_at(const BundleCache& bc, const Point& p,
                                      const FDOptions& opt = {}) {
  const CurvatureBundle& B = bc.at(p);
  PointTensor nab = nabla_cotton_at(bc, p, opt);
  return contract(nab, 2, 3, B.md);
}

// Divergence in the first Cotton slot: C_{kij,k}.
inline PointTensor div_cotton_first_at(const BundleCache& bc, const Point& p,
                                       const FDOptions& opt = {}) {
  const CurvatureBundle& B = bc.at(p);
  PointTensor nab = nabla_cotton_at(bc, p, opt);
  return contract(nab, 0, 3, B.md);
}

// Second covariant derivative of Ricci: [i][j][k][t] = R_{ij,kt}
// (k the inner derivative, t the outer one).
inline PointTensor second_cov_ricci_at(const BundleCache& bc, const Point& p,
                                       const FDOptions& opt = {}) {
  const CurvatureBundle& B = bc.at(p);
  NumericField F = detail::bundle_field(bc, 3, &CurvatureBundle::nabla_ric);
  return covariant_derivative(F, p, B.gamma, opt);
}

// Hessian of the scalar curvature: S_{ij}.
inline PointTensor hess_scalar_curvature_at(const BundleCache& bc, const Point& p,
                                            const FDOptions& opt = {}) {
  const CurvatureBundle& B = bc.at(p);
  NumericField F = detail::bundle_field(bc, 1, &CurvatureBundle::dS);
  return covariant_derivative(F, p, B.gamma, opt);
}

// Cotton from the Weyl divergence: C_{ijk} = (m-2)/(m-3) g^{ts} W_{tikj;s}.
inline PointTensor cotton_from_weyl_div_at(const BundleCache& bc, const Point& p,
                                           const FDOptions& opt = {}) {
  const CurvatureBundle& B = bc.at(p);
  const int m = B.m;
  if (m < 4)
    throw DimensionError("the Weyl-divergence form of the Cotton tensor needs dimension >= 4");
  NumericField F = detail::bundle_field(bc, 4, &CurvatureBundle::weyl);
  PointTensor nw = covariant_derivative(F, p, B.gamma, opt);  // [t][i][k][j][s]
  PointTensor out(m, {Var::Co, Var::Co, Var::Co});
  const double c = static_cast<double>(m - 2) / (m - 3);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        double v = 0.0;
        for (int t = 0; t < m; ++t)
          for (int s = 0; s < m; ++s) v += B.gu(t, s) * nw(t, i, k, j, s);
        out(i, j, k) = c * v;
      }
  return out;
}

inline PointTensor cotton_from_weyl_div_at(const Chart& c, const Point& p,
                                           const FDOptions& opt = {}) {
  BundleCache bc(c);
  return cotton_from_weyl_div_at(bc, p, opt);
}

// Bach tensor B_{ij} = 1/(m-2) (C_{jik,k} + R_{kt} W_{ikjt}).
inline PointTensor bach_at(const BundleCache& bc, const Point& p, const FDOptions& opt = {}) {
  const CurvatureBundle& B = bc.at(p);
  const int m = B.m;
  PointTensor nab = nabla_cotton_at(bc, p, opt);  // C_{ijk;l}
  PointTensor out(m, {Var::Co, Var::Co});
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double v = 0.0;
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t) v += B.gu(k, t) * nab(j, i, k, t);  // C_{jik,k}
      double alg = 0.0;
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t)
          for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b)
              alg += B.gu(k, a) * B.gu(t, b) * B.Ric(a, b) * B.W(i, k, j, t);
      out(i, j) = (v + alg) / (m - 2);
    }
  return out;
}

inline PointTensor bach_at(const Chart& c, const Point& p, const FDOptions& opt = {}) {
  BundleCache bc(c);
  return bach_at(bc, p, opt);
}

// ---------------------------------------------------------------------------
// Hessian data for a scalar function on the chart

struct HessData {
  double f = 0.0;
  std::vector<double> df;      // f_i (covariant gradient = coordinate partials)
  std::vector<double> gradup;  // f^i = g^{is} f_s
  std::vector<double> hess;    // f_{ij} = d_i d_j f - Gamma^s_{ij} f_s
  std::vector<double> third;   // f_{ijk} = (nabla Hess f)_{ij;k}
  double lap = 0.0;            // Delta f = g^{ij} f_{ij}
  double grad2 = 0.0;          // |nabla f|^2
};

inline HessData hess_data(const CurvatureBundle& B, const ScalarCache& fc) {
  using detail::ix2;
  using detail::ix3;
  const int m = B.m;
  HessData H;
  H.f = fc.value(B.p);
  std::vector<double> d1, d2, d3;
  fc.derivatives(B.p, d1, d2, d3);
  H.df = d1;

  H.gradup.assign(static_cast<std::size_t>(m), 0.0);
  for (int i = 0; i < m; ++i)
    for (int s = 0; s < m; ++s) H.gradup[static_cast<std::size_t>(i)] += B.gu(i, s) * d1[static_cast<std::size_t>(s)];

  H.hess.assign(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double v = d2[ix2(m, i, j)];
      for (int s = 0; s < m; ++s) v -= B.Gam(s, i, j) * d1[static_cast<std::size_t>(s)];
      H.hess[ix2(m, i, j)] = v;
    }

  // d_k f_{ij}, then the two connection corrections of the (0,2) slots.
  H.third.assign(static_cast<std::size_t>(m) * m * m, 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        double v = d3[ix3(m, k, i, j)];
        for (int s = 0; s < m; ++s)
          v -= B.dgamma[detail::ix4(m, k, s, i, j)] * d1[static_cast<std::size_t>(s)] +
               B.Gam(s, i, j) * d2[ix2(m, k, s)];
        for (int s = 0; s < m; ++s)
          v -= B.Gam(s, k, i) * H.hess[ix2(m, s, j)] + B.Gam(s, k, j) * H.hess[ix2(m, i, s)];
        H.third[ix3(m, i, j, k)] = v;
      }

  H.lap = 0.0;
  H.grad2 = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      H.lap += B.gu(i, j) * H.hess[ix2(m, i, j)];
      H.grad2 += B.gu(i, j) * d1[static_cast<std::size_t>(i)] * d1[static_cast<std::size_t>(j)];
    }
  return H;
}

// ---------------------------------------------------------------------------
// Identity suite

struct NamedResidual {
  std::string name;
  std::string anchor;  // the formula being checked
  double raw = 0.0;    // max absolute residual at the point
  double scale = 0.0;  // magnitude of the terms entering it
  double normalized() const { return raw / std::max(1.0, scale); }
};

namespace detail {
inline void track(double v, double& mx) {
  v = std::abs(v);
  if (v > mx) mx = v;
}
}  // namespace detail

inline NamedResidual riemann_antisymmetry_residual(const CurvatureBundle& B) {
  double r = 0.0, sc = 0.0;
  for (int i = 0; i < B.m; ++i)
    for (int j = 0; j < B.m; ++j)
      for (int k = 0; k < B.m; ++k)
        for (int t = 0; t < B.m; ++t) {
          detail::track(B.R4(i, j, k, t), sc);
          detail::track(B.R4(i, j, k, t) + B.R4(j, i, k, t), r);
          detail::track(B.R4(i, j, k, t) + B.R4(i, j, t, k), r);
        }
  return {"riemann_antisymmetry", "R_ijkt = -R_jikt = -R_ijtk", r, sc};
}

inline NamedResidual riemann_pair_symmetry_residual(const CurvatureBundle& B) {
  double r = 0.0, sc = 0.0;
  for (int i = 0; i < B.m; ++i)
    for (int j = 0; j < B.m; ++j)
      for (int k = 0; k < B.m; ++k)
        for (int t = 0; t < B.m; ++t) {
          detail::track(B.R4(i, j, k, t), sc);
          detail::track(B.R4(i, j, k, t) - B.R4(k, t, i, j), r);
        }
  return {"riemann_pair_symmetry", "R_ijkt = R_ktij", r, sc};
}

inline NamedResidual first_bianchi_residual(const CurvatureBundle& B) {
  double r = 0.0, sc = 0.0;
  for (int i = 0; i < B.m; ++i)
    for (int j = 0; j < B.m; ++j)
      for (int k = 0; k < B.m; ++k)
        for (int t = 0; t < B.m; ++t) {
          detail::track(B.R4(i, j, k, t), sc);
          detail::track(B.R4(i, j, k, t) + B.R4(i, k, t, j) + B.R4(i, t, j, k), r);
        }
  return {"first_bianchi", "R_ijkt + R_iktj + R_itjk = 0", r, sc};
}

inline NamedResidual second_bianchi_residual(const CurvatureBundle& B) {
  double r = 0.0, sc = 0.0;
  for (int i = 0; i < B.m; ++i)
    for (int j = 0; j < B.m; ++j)
      for (int k = 0; k < B.m; ++k)
        for (int t = 0; t < B.m; ++t)
          for (int l = 0; l < B.m; ++l) {
            detail::track(B.NRiem(i, j, k, t, l), sc);
            detail::track(
                B.NRiem(i, j, k, t, l) + B.NRiem(i, j, t, l, k) + B.NRiem(i, j, l, k, t), r);
          }
  return {"second_bianchi", "R_ijkt,l + R_ijtl,k + R_ijlk,t = 0", r, sc};
}

inline NamedResidual hessian_symmetry_residual(const CurvatureBundle& B, const HessData& H) {
  double r = 0.0, sc = 0.0;
  for (int i = 0; i < B.m; ++i)
    for (int j = 0; j < B.m; ++j) {
      detail::track(H.hess[detail::ix2(B.m, i, j)], sc);
      detail::track(H.hess[detail::ix2(B.m, i, j)] - H.hess[detail::ix2(B.m, j, i)], r);
    }
  return {"hessian_symmetry", "f_ij = f_ji", r, sc};
}

// f_ijk = f_ikj + f_t R_tijk  (sum over t through the inverse metric)
inline NamedResidual third_commutation_residual(const CurvatureBundle& B, const HessData& H) {
  const int m = B.m;
  double r = 0.0, sc = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        double curv = 0.0;
        for (int t = 0; t < m; ++t)
          for (int s = 0; s < m; ++s)
            curv += B.gu(t, s) * H.df[static_cast<std::size_t>(s)] * B.R4(t, i, j, k);
        double lhs = H.third[detail::ix3(m, i, j, k)];
        double rhs = H.third[detail::ix3(m, i, k, j)] + curv;
        detail::track(lhs, sc);
        detail::track(rhs, sc);
        detail::track(lhs - rhs, r);
      }
  return {"third_derivative_commutation", "f_ijk = f_ikj + f_t R_tijk", r, sc};
}

inline NamedResidual traced_commutation_residual(const CurvatureBundle& B, const HessData& H) {
  const int m = B.m;
  double r = 0.0, sc = 0.0;
  for (int i = 0; i < m; ++i) {
    double f_itt = 0.0, f_tti = 0.0, ricci_term = 0.0;
    for (int t = 0; t < m; ++t)
      for (int a = 0; a < m; ++a) {
        f_itt += B.gu(t, a) * H.third[detail::ix3(m, i, t, a)];
        f_tti += B.gu(t, a) * H.third[detail::ix3(m, t, a, i)];
        ricci_term += B.gu(t, a) * H.df[static_cast<std::size_t>(a)] * B.Ric(t, i);
      }
    detail::track(f_itt, sc);
    detail::track(f_tti + ricci_term, sc);
    detail::track(f_itt - f_tti - ricci_term, r);
  }
  return {"traced_commutation", "f_itt = f_tti + f_t R_ti", r, sc};
}

inline NamedResidual schur_residual(const CurvatureBundle& B) {
  const int m = B.m;
  double r = 0.0, sc = 0.0;
  for (int i = 0; i < m; ++i) {
    double div = 0.0;
    for (int k = 0; k < m; ++k)
      for (int a = 0; a < m; ++a) div += B.gu(k, a) * B.NRic(i, k, a);
    detail::track(B.dS[static_cast<std::size_t>(i)], sc);
    detail::track(2.0 * div, sc);
    detail::track(B.dS[static_cast<std::size_t>(i)] - 2.0 * div, r);
  }
  return {"schur", "S_k = 2 R_tk,t", r, sc};
}

inline NamedResidual cotton_cyclic_residual(const CurvatureBundle& B) {
  const int m = B.m;
  double r = 0.0, sc = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        detail::track(B.C(i, j, k), sc);
        detail::track(B.C(i, j, k) + B.C(j, k, i) + B.C(k, i, j), r);
      }
  return {"cotton_cyclic", "C_ijk + C_jki + C_kij = 0", r, sc};
}

inline NamedResidual cotton_trace_residual(const CurvatureBundle& B) {
  const int m = B.m;
  double r = 0.0, sc = 0.0;
  for (int k = 0; k < m; ++k) {
    double t12 = 0.0, t13 = 0.0, t23 = 0.0;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        t12 += B.gu(a, b) * B.C(a, b, k);
        t13 += B.gu(a, b) * B.C(a, k, b);
        t23 += B.gu(a, b) * B.C(k, a, b);
      }
    detail::track(t12, r);
    detail::track(t13, r);
    detail::track(t23, r);
  }
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) detail::track(B.C(i, j, k), sc);
  return {"cotton_traces", "g^ij C_ijk = g^ik C_ijk = g^jk C_ijk = 0", r, sc};
}

inline NamedResidual weyl_trace_residual(const CurvatureBundle& B) {
  const int m = B.m;
  double r = 0.0, sc = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t) detail::track(B.W(i, j, k, t), sc);
  // contract every index pair that is not forced to zero by antisymmetry
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      double t13 = 0.0, t14 = 0.0, t23 = 0.0, t24 = 0.0;
      for (int s = 0; s < m; ++s)
        for (int u = 0; u < m; ++u) {
          t13 += B.gu(s, u) * B.W(s, a, u, b);
          t14 += B.gu(s, u) * B.W(s, a, b, u);
          t23 += B.gu(s, u) * B.W(a, s, u, b);
          t24 += B.gu(s, u) * B.W(a, s, b, u);
        }
      detail::track(t13, r);
      detail::track(t14, r);
      detail::track(t23, r);
      detail::track(t24, r);
    }
  return {"weyl_traces", "every trace of W vanishes", r, sc};
}

inline NamedResidual kn_reconstruction_residual(const CurvatureBundle& B) {
  // In dimension 3 this reduces to R = A (KN) g with W = 0, which is exact.
  const int m = B.m;
  double r = 0.0, sc = 0.0;
  const double c = 1.0 / (m - 2);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t) {
          double kn = B.A(i, k) * B.g(j, t) + B.A(j, t) * B.g(i, k) -
                      B.A(i, t) * B.g(j, k) - B.A(j, k) * B.g(i, t);
          double rhs = B.W(i, j, k, t) + c * kn;
          detail::track(B.R4(i, j, k, t), sc);
          detail::track(rhs, sc);
          detail::track(B.R4(i, j, k, t) - rhs, r);
        }
  return {"kulkarni_nomizu_reconstruction", "R = W + 1/(m-2) A (KN) g", r, sc};
}

inline NamedResidual schouten_trace_residual(const CurvatureBundle& B) {
  const int m = B.m;
  double tr = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) tr += B.gu(i, j) * B.A(i, j);
  double want = (m - 2) * B.S / (2.0 * (m - 1));
  double sc = std::max(std::abs(tr), std::abs(want));
  return {"schouten_trace", "tr A = (m-2) S / (2(m-1))", std::abs(tr - want), sc};
}

// R_ij,kt - R_ij,tk = R_likt R_lj + R_ljkt R_li  (finite differences)
inline NamedResidual ricci_commutation_residual(const BundleCache& bc, const Point& p,
                                                const FDOptions& opt = {}) {
  const CurvatureBundle& B = bc.at(p);
  const int m = B.m;
  PointTensor d2r = second_cov_ricci_at(bc, p, opt);
  double r = 0.0, sc = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t) {
          double lhs = d2r(i, j, k, t) - d2r(i, j, t, k);
          double rhs = 0.0;
          for (int l = 0; l < m; ++l)
            for (int a = 0; a < m; ++a)
              rhs += B.gu(l, a) *
                     (B.R4(l, i, k, t) * B.Ric(a, j) + B.R4(l, j, k, t) * B.Ric(a, i));
          detail::track(lhs, sc);
          detail::track(rhs, sc);
          detail::track(lhs - rhs, r);
        }
  return {"ricci_derivative_commutation", "R_ij,kt - R_ij,tk = R_likt R_lj + R_ljkt R_li", r,
          sc};
}

inline NamedResidual div_cotton_symmetry_residual(const BundleCache& bc, const Point& p,
                                                  const FDOptions& opt = {}) {
  PointTensor div = div_cotton_last_at(bc, p, opt);
  const int m = div.dim();
  double r = 0.0, sc = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      detail::track(div(i, j), sc);
      detail::track(div(i, j) - div(j, i), r);
    }
  return {"div_cotton_symmetry", "C_ijk,k = C_jik,k", r, sc};
}

inline NamedResidual div_cotton_first_residual(const BundleCache& bc, const Point& p,
                                               const FDOptions& opt = {}) {
  const CurvatureBundle& B = bc.at(p);
  PointTensor div = div_cotton_first_at(bc, p, opt);
  double r = div.max_abs();
  double sc = 0.0;
  for (double v : B.cotton) detail::track(v, sc);
  return {"div_cotton_first_slot", "C_kij,k = 0", r, sc};
}

// C_ijk,k = R_ij,kk - (m-2)/(2(m-1)) S_ij + R_tk R_itjk - R_it R_tj
//           - 1/(2(m-1)) Delta S g_ij
inline NamedResidual diver_cotton_formula_residual(const BundleCache& bc, const Point& p,
                                                  const FDOptions& opt = {}) {
  const CurvatureBundle& B = bc.at(p);
  const int m = B.m;
  PointTensor divC = div_cotton_last_at(bc, p, opt);
  PointTensor d2r = second_cov_ricci_at(bc, p, opt);
  PointTensor hessS = hess_scalar_curvature_at(bc, p, opt);
  double lapS = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) lapS += B.gu(i, j) * hessS(i, j);

  double r = 0.0, sc = 0.0;
  const double cS = static_cast<double>(m - 2) / (2.0 * (m - 1));
  const double cL = 1.0 / (2.0 * (m - 1));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double lapRic = 0.0;
      for (int k = 0; k < m; ++k)
        for (int t = 0; t < m; ++t) lapRic += B.gu(k, t) * d2r(i, j, k, t);
      double quad = 0.0, square = 0.0;
      for (int t = 0; t < m; ++t)
        for (int k = 0; k < m; ++k) {
          double ric_up = 0.0;  // R^{tk} in coordinates
          for (int a = 0; a < m; ++a)
            for (int b = 0; b < m; ++b) ric_up += B.gu(t, a) * B.gu(k, b) * B.Ric(a, b);
          quad += ric_up * B.R4(i, t, j, k);
          square += B.gu(t, k) * B.Ric(i, t) * B.Ric(k, j);
        }
      double rhs = lapRic - cS * hessS(i, j) + quad - square - cL * lapS * B.g(i, j);
      detail::track(divC(i, j), sc);
      detail::track(rhs, sc);
      detail::track(divC(i, j) - rhs, r);
    }
  return {"div_cotton_formula",
          "C_ijk,k = R_ij,kk - (m-2)/(2(m-1)) S_ij + R_tk R_itjk - R_it R_tj - DeltaS g_ij/(2(m-1))",
          r, sc};
}

inline NamedResidual cotton_two_definitions_residual(const BundleCache& bc, const Point& p,
                                                     const FDOptions& opt = {}) {
  const CurvatureBundle& B = bc.at(p);
  PointTensor alt = cotton_from_weyl_div_at(bc, p, opt);
  double r = 0.0, sc = 0.0;
  const int m = B.m;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k) {
        detail::track(B.C(i, j, k), sc);
        detail::track(alt(i, j, k), sc);
        detail::track(B.C(i, j, k) - alt(i, j, k), r);
      }
  return {"cotton_two_definitions", "C_ijk = (m-2)/(m-3) W_tikj,t", r, sc};
}

inline NamedResidual bach_symmetry_residual(const BundleCache& bc, const Point& p,
                                            const FDOptions& opt = {}) {
  PointTensor b = bach_at(bc, p, opt);
  const CurvatureBundle& B = bc.at(p);
  const int m = B.m;
  double r = 0.0, sc = 0.0, tr = 0.0;
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      detail::track(b(i, j), sc);
      detail::track(b(i, j) - b(j, i), r);
      tr += B.gu(i, j) * b(i, j);
    }
  detail::track(tr, r);
  return {"bach_symmetry_trace", "B_ij = B_ji and g^ij B_ij = 0", r, sc};
}

// The full identity suite at one point. `f` (optional) feeds the Hessian
// commutation checks; FD-based checks are skipped when `with_fd` is false.
inline std::vector<NamedResidual> identity_suite_at(const BundleCache& bc, const Point& p,
                                                    const ScalarCache* f = nullptr,
                                                    bool with_fd = true,
                                                    const FDOptions& opt = {}) {
  const CurvatureBundle& B = bc.at(p);
  std::vector<NamedResidual> out;
  out.push_back(riemann_antisymmetry_residual(B));
  out.push_back(riemann_pair_symmetry_residual(B));
  out.push_back(first_bianchi_residual(B));
  out.push_back(second_bianchi_residual(B));
  out.push_back(schur_residual(B));
  out.push_back(cotton_cyclic_residual(B));
  out.push_back(cotton_trace_residual(B));
  out.push_back(weyl_trace_residual(B));
  out.push_back(kn_reconstruction_residual(B));
  out.push_back(schouten_trace_residual(B));
  if (f != nullptr) {
    HessData H = hess_data(B, *f);
    out.push_back(hessian_symmetry_residual(B, H));
    out.push_back(third_commutation_residual(B, H));
    out.push_back(traced_commutation_residual(B, H));
  }
  if (with_fd) {
    out.push_back(ricci_commutation_residual(bc, p, opt));
    out.push_back(div_cotton_symmetry_residual(bc, p, opt));
    out.push_back(div_cotton_first_residual(bc, p, opt));
    out.push_back(diver_cotton_formula_residual(bc, p, opt));
    if (B.m >= 4) out.push_back(cotton_two_definitions_residual(bc, p, opt));
    out.push_back(bach_symmetry_residual(bc, p, opt));
  }
  return out;
}

}  // namespace etv

#endif
