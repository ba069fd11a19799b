#ifndef ETV_FIELD_HPP
#define ETV_FIELD_HPP

// Numeric tensor fields over a chart and finite-difference machinery.
// Derivative index convention throughout the library: the derivative slot is
// appended LAST, i.e. (nabla T)_{i1..ik j} = T_{i1..ik, j}.

#include <cmath>
#include <functional>
#include <vector>

#include "etv/chart.hpp"
#include "etv/tensor.hpp"

namespace etv {

struct FDOptions {
  double step_frac = 1e-2;  // stencil step per coordinate: h_k = step_frac * width_k
  bool richardson = false;  // one extrapolation level: (16 D(h/2) - D(h)) / 15
};

// A fully covariant (0,k) field evaluated pointwise.
struct NumericField {
  const Chart* chart = nullptr;
  int rank = 0;
  std::function<PointTensor(const Point&)> eval;
};

inline NumericField make_field(const Chart& c, int rank,
                               std::function<PointTensor(const Point&)> f) {
  return NumericField{&c, rank, std::move(f)};
}

// Christoffel symbols Gamma^k_{ij} from a metric value and its first
// partials (dg laid out [k][i][j] = d_k g_ij). Result layout [k][i][j].
inline std::vector<double> christoffel_values(const MetricData& md,
                                              const std::vector<double>& dg) {
  const int m = md.m;
  std::vector<double> gam(static_cast<std::size_t>(m) * m * m, 0.0);
  for (int k = 0; k < m; ++k)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double s = 0.0;
        for (int t = 0; t < m; ++t) {
          double a = dg[(static_cast<std::size_t>(i) * m + t) * m + j] +
                     dg[(static_cast<std::size_t>(j) * m + t) * m + i] -
                     dg[(static_cast<std::size_t>(t) * m + i) * m + j];
          s += md.ginv[static_cast<std::size_t>(k) * m + t] * a;
        }
        gam[(static_cast<std::size_t>(k) * m + i) * m + j] = 0.5 * s;
      }
  return gam;
}

namespace detail {

inline void check_stencil(const Chart& c, const Point& p, int dir, double h) {
  const Interval& iv = c.domain(dir);
  if (p[static_cast<std::size_t>(dir)] - 2 * h < iv.lo ||
      p[static_cast<std::size_t>(dir)] + 2 * h > iv.hi)
    throw StencilOutOfDomain("finite-difference stencil leaves the domain in coordinate " +
                             c.coords()[static_cast<std::size_t>(dir)] + " at " +
                             point_str(p));
}

inline PointTensor fd_partial_step(const NumericField& F, const Point& p, int dir, double h) {
  Point q = p;
  auto shift = [&](double d) {
    q[static_cast<std::size_t>(dir)] = p[static_cast<std::size_t>(dir)] + d;
    return F.eval(q);
  };
  // 4th-order central stencil
  PointTensor r = shift(-2 * h);
  r *= -1.0;
  r += shift(2 * h);
  r *= -1.0;
  PointTensor mid = shift(h);
  mid -= shift(-h);
  mid *= 8.0;
  r += mid;
  r *= 1.0 / (12.0 * h);
  return r;
}

}  // namespace detail

// Partial derivative of every component along coordinate `dir`.
inline PointTensor fd_partial(const NumericField& F, const Point& p, int dir,
                              const FDOptions& opt = {}) {
  const Chart& c = *F.chart;
  c.require_inside(p);
  double h = opt.step_frac * c.domain(dir).width();
  detail::check_stencil(c, p, dir, h);
  PointTensor d = detail::fd_partial_step(F, p, dir, h);
  if (opt.richardson) {
    PointTensor d2 = detail::fd_partial_step(F, p, dir, h / 2);
    d2 *= 16.0 / 15.0;
    d *= 1.0 / 15.0;
    d2 -= d;
    return d2;
  }
  return d;
}

// All coordinate partials, appended as a trailing covariant slot.
inline PointTensor fd_all_partials(const NumericField& F, const Point& p,
                                   const FDOptions& opt = {}) {
  const int m = F.chart->dim();
  std::vector<Var> vars(static_cast<std::size_t>(F.rank) + 1, Var::Co);
  PointTensor out(m, vars);
  for (int dir = 0; dir < m; ++dir) {
    PointTensor d = fd_partial(F, p, dir, opt);
    const std::size_t n = d.data().size();
    for (std::size_t i = 0; i < n; ++i) out.data()[i * m + static_cast<std::size_t>(dir)] = d.data()[i];
  }
  return out;
}

// Covariant derivative of a (0,k) field: the partial-derivative tensor minus
// one Christoffel correction per slot. `gamma` is laid out [s][i][j].
inline PointTensor covariant_derivative(const NumericField& F, const Point& p,
                                        const std::vector<double>& gamma,
                                        const FDOptions& opt = {}) {
  const int m = F.chart->dim();
  const int k = F.rank;
  PointTensor out = fd_all_partials(F, p, opt);
  if (k == 0) return out;  // gradient of a scalar needs no correction
  PointTensor value = F.eval(p);

  std::vector<int> idx(static_cast<std::size_t>(k) + 1, 0);
  do {
    int j = idx.back();
    double corr = 0.0;
    std::vector<int> src(idx.begin(), idx.end() - 1);
    for (int slot = 0; slot < k; ++slot) {
      int orig = src[static_cast<std::size_t>(slot)];
      for (int s = 0; s < m; ++s) {
        src[static_cast<std::size_t>(slot)] = s;
        corr += gamma[(static_cast<std::size_t>(s) * m + j) * m + orig] * value.at(src);
      }
      src[static_cast<std::size_t>(slot)] = orig;
    }
    out.at(idx) -= corr;
  } while (detail::advance(idx, m));
  return out;
}

// Self-contained overload: computes Christoffel symbols from the chart.
inline PointTensor covariant_derivative(const NumericField& F, const Point& p,
                                        const FDOptions& opt = {}) {
  MetricData md = F.chart->metric_data_at(p);
  std::vector<double> dg = F.chart->metric_partials_at(p, 1);
  return covariant_derivative(F, p, christoffel_values(md, dg), opt);
}

// Divergence in the LAST index of a (0,k) field, k >= 1:
//   (div T)_{i1..i(k-1)} = g^{ab} (nabla T)_{i1..i(k-1) a ; b}
inline PointTensor divergence_last(const NumericField& F, const Point& p,
                                   const std::vector<double>& gamma, const MetricData& md,
                                   const FDOptions& opt = {}) {
  if (F.rank < 1) throw DimensionError("divergence needs rank >= 1");
  PointTensor nab = covariant_derivative(F, p, gamma, opt);
  return contract(nab, F.rank - 1, F.rank, md);
}

}  // namespace etv

#endif
