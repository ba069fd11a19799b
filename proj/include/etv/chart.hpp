#ifndef ETV_CHART_HPP
#define ETV_CHART_HPP

// A coordinate chart: named coordinates, a symmetric symbolic metric, and a
// box domain. Symbolic partial derivatives of the metric up to order 3 are
// differentiated once at construction; evaluation afterwards is pure and safe
// to run concurrently.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "etv/errors.hpp"
#include "etv/expr.hpp"
#include "etv/tensor.hpp"

namespace etv {

using Point = std::vector<double>;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  double width() const { return hi - lo; }
};

namespace detail {

inline std::string point_str(const Point& p) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < p.size(); ++i) os << (i ? ", " : "") << p[i];
  os << ")";
  return os.str();
}

// Van der Corput radical inverse in the given base.
inline double radical_inverse(std::uint64_t n, std::uint32_t base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (n > 0) {
    r += f * static_cast<double>(n % base);
    n /= base;
    f *= inv;
  }
  return r;
}

}  // namespace detail

class Chart {
 public:
  // `upper` lists the metric entries g_ij for i <= j in row-major order:
  // g_00, g_01, ..., g_0{m-1}, g_11, g_12, ...  (m(m+1)/2 entries).
  Chart(std::string name, std::vector<std::string> coords, std::vector<Expr> upper,
        std::vector<Interval> domain)
      : name_(std::move(name)), coords_(std::move(coords)), domain_(std::move(domain)) {
    m_ = static_cast<int>(coords_.size());
    if (m_ < 3) throw DimensionError("chart dimension must be at least 3");
    if (domain_.size() != coords_.size())
      throw DimensionError("domain interval count does not match dimension");
    for (const Interval& iv : domain_)
      if (!(iv.lo < iv.hi)) throw DimensionError("empty domain interval");
    const std::size_t want = static_cast<std::size_t>(m_) * (m_ + 1) / 2;
    if (upper.size() != want)
      throw DimensionError("expected " + std::to_string(want) + " upper-triangle metric entries");

    g_.resize(static_cast<std::size_t>(m_) * m_);
    std::size_t k = 0;
    for (int i = 0; i < m_; ++i)
      for (int j = i; j < m_; ++j) {
        g_[flat2(i, j)] = upper[k];
        g_[flat2(j, i)] = upper[k];
        ++k;
      }
    build_partial_cache();
  }

  static Chart diagonal(std::string name, std::vector<std::string> coords,
                        std::vector<Expr> diag, std::vector<Interval> domain) {
    int m = static_cast<int>(coords.size());
    if (static_cast<int>(diag.size()) != m)
      throw DimensionError("diagonal metric needs one entry per coordinate");
    std::vector<Expr> upper;
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) upper.push_back(i == j ? diag[i] : Expr::number(0.0));
    return Chart(std::move(name), std::move(coords), std::move(upper), std::move(domain));
  }

  const std::string& name() const { return name_; }
  int dim() const { return m_; }
  const std::vector<std::string>& coords() const { return coords_; }
  const Interval& domain(int k) const { return domain_.at(static_cast<std::size_t>(k)); }
  const std::vector<Interval>& domain() const { return domain_; }
  const Expr& metric_entry(int i, int j) const { return g_[flat2(i, j)]; }

  bool contains(const Point& p) const {
    if (static_cast<int>(p.size()) != m_) return false;
    for (int k = 0; k < m_; ++k)
      if (p[k] < domain_[k].lo || p[k] > domain_[k].hi) return false;
    return true;
  }

  void require_inside(const Point& p) const {
    if (!contains(p))
      throw OutOfDomain("point " + detail::point_str(p) + " outside domain of chart '" +
                        name_ + "'");
  }

  Point center() const {
    Point c(static_cast<std::size_t>(m_));
    for (int k = 0; k < m_; ++k) c[k] = 0.5 * (domain_[k].lo + domain_[k].hi);
    return c;
  }

  // Metric value with positive-definiteness check (Cholesky pivots).
  MetricData metric_data_at(const Point& p) const {
    require_inside(p);
    MetricData md;
    md.m = m_;
    md.g.resize(static_cast<std::size_t>(m_) * m_);
    for (int i = 0; i < m_; ++i)
      for (int j = i; j < m_; ++j) {
        double v = g_[flat2(i, j)].eval(p);
        md.g[flat2(i, j)] = v;
        md.g[flat2(j, i)] = v;
      }
    cholesky_invert(md, p);
    return md;
  }

  PointTensor metric_at(const Point& p) const {
    MetricData md = metric_data_at(p);
    PointTensor t(m_, {Var::Co, Var::Co});
    t.data() = md.g;
    return t;
  }

  PointTensor inverse_metric_at(const Point& p) const {
    MetricData md = metric_data_at(p);
    PointTensor t(m_, {Var::Contra, Var::Contra});
    t.data() = md.ginv;
    return t;
  }

  // Cached symbolic partials of the metric, evaluated at p. Layouts:
  //   order 1: [k][i][j]       -> m^3
  //   order 2: [k][l][i][j]    -> m^4
  //   order 3: [k][l][n][i][j] -> m^5
  std::vector<double> metric_partials_at(const Point& p, int order) const {
    require_inside(p);
    const PartialCache* pc = nullptr;
    switch (order) {
      case 1: pc = &d1_; break;
      case 2: pc = &d2_; break;
      case 3: pc = &d3_; break;
      default: throw DimensionError("metric partial order must be 1, 2, or 3");
    }
    std::vector<double> uniq(pc->unique.size());
    for (std::size_t u = 0; u < uniq.size(); ++u) uniq[u] = pc->unique[u].eval(p);
    std::vector<double> out(pc->map.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = uniq[static_cast<std::size_t>(pc->map[i])];
    return out;
  }

  // Deterministic low-discrepancy interior samples. The same (count, seed,
  // margin) triple always yields the same points; margin is the fraction of
  // each interval kept clear at both ends.
  std::vector<Point> sample(int count, std::uint64_t seed, double margin = 0.05) const {
    static constexpr std::array<std::uint32_t, 8> primes = {2, 3, 5, 7, 11, 13, 17, 19};
    if (m_ > static_cast<int>(primes.size()))
      throw DimensionError("sampler supports dimension up to 8");
    std::uint64_t offset = 1000 + (seed % (1u << 20)) * 7919;
    std::vector<Point> pts;
    pts.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
      Point p(static_cast<std::size_t>(m_));
      for (int k = 0; k < m_; ++k) {
        double u = detail::radical_inverse(offset + static_cast<std::uint64_t>(i),
                                           primes[static_cast<std::size_t>(k)]);
        p[k] = domain_[k].lo + (margin + u * (1.0 - 2.0 * margin)) * domain_[k].width();
      }
      pts.push_back(std::move(p));
    }
    return pts;
  }

  bool is_diagonal() const {
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j)
        if (i != j && !is_zero(g_[flat2(i, j)])) return false;
    return true;
  }

  // Symbolic inverse metric entry. Diagonal fast path; otherwise adjugate
  // over determinant (fine for the small dimensions this library targets).
  Expr inverse_metric_entry_sym(int i, int j) const {
    if (is_diagonal())
      return i == j ? Expr::number(1.0) / g_[flat2(i, i)] : Expr::number(0.0);
    Expr det = determinant_sym();
    // adjugate: (-1)^{i+j} * minor(j,i); metric symmetry makes minor(j,i)=minor(i,j)
    Expr cof = minor_sym(j, i);
    if ((i + j) % 2 != 0) cof = -cof;
    return (cof / det).simplified();
  }

  // Symbolic Laplace-Beltrami of f on this chart:
  //   lap f = g^{ij} (d_i d_j f - Gamma^k_ij d_k f)
  Expr laplacian_sym(const Expr& f) const {
    std::vector<Expr> df(static_cast<std::size_t>(m_));
    for (int k = 0; k < m_; ++k) df[static_cast<std::size_t>(k)] = f.diff(k).simplified();
    Expr acc = Expr::number(0.0);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) {
        Expr gij = inverse_metric_entry_sym(i, j);
        if (is_zero(gij)) continue;
        Expr term = df[static_cast<std::size_t>(i)].diff(j);
        for (int k = 0; k < m_; ++k) {
          Expr gam = christoffel_sym(k, i, j);
          if (is_zero(gam)) continue;
          term = term - gam * df[static_cast<std::size_t>(k)];
        }
        acc = acc + gij * term;
      }
    return acc.simplified();
  }

  // Symbolic |grad f|^2 = g^{ij} d_i f d_j f.
  Expr grad_norm2_sym(const Expr& f) const {
    Expr acc = Expr::number(0.0);
    for (int i = 0; i < m_; ++i)
      for (int j = 0; j < m_; ++j) {
        Expr gij = inverse_metric_entry_sym(i, j);
        if (is_zero(gij)) continue;
        acc = acc + gij * f.diff(i) * f.diff(j);
      }
    return acc.simplified();
  }

  Expr christoffel_sym(int k, int i, int j) const {
    Expr acc = Expr::number(0.0);
    for (int s = 0; s < m_; ++s) {
      Expr gks = inverse_metric_entry_sym(k, s);
      if (is_zero(gks)) continue;
      Expr inner = g_[flat2(s, j)].diff(i) + g_[flat2(s, i)].diff(j) - g_[flat2(i, j)].diff(s);
      acc = acc + Expr::number(0.5) * gks * inner;
    }
    return acc.simplified();
  }

 private:
  std::string name_;
  std::vector<std::string> coords_;
  std::vector<Interval> domain_;
  int m_ = 0;
  std::vector<Expr> g_;  // m*m, symmetric by construction

  // Derivatives are stored as a deduplicated expression list plus an index
  // map in the full [deriv...][i][j] layout, so symmetric positions share one
  // differentiation and one evaluation.
  struct PartialCache {
    std::vector<Expr> unique;
    std::vector<int> map;
  };
  PartialCache d1_, d2_, d3_;

  std::size_t flat2(int i, int j) const {
    return static_cast<std::size_t>(i) * m_ + static_cast<std::size_t>(j);
  }

  static bool is_zero(const Expr& e) {
    return e.node()->kind == ExprKind::Number && e.node()->value == 0.0;
  }

  void build_partial_cache() {
    const int m = m_;
    auto pair_id = [m](int i, int j) {
      if (i > j) std::swap(i, j);
      return i * m + j;  // sparse but unique
    };

    // order 1: unique key (k, i<=j)
    {
      std::vector<int> key_to_uid(static_cast<std::size_t>(m * m * m), -1);
      d1_.map.resize(static_cast<std::size_t>(m * m * m));
      for (int k = 0; k < m; ++k)
        for (int i = 0; i < m; ++i)
          for (int j = 0; j < m; ++j) {
            int key = k * m * m + pair_id(i, j);
            int& uid = key_to_uid[static_cast<std::size_t>(key)];
            if (uid < 0) {
              uid = static_cast<int>(d1_.unique.size());
              d1_.unique.push_back(g_[flat2(i, j)].diff(k).simplified());
            }
            d1_.map[(static_cast<std::size_t>(k) * m + i) * m + j] = uid;
          }
    }

    // order 2: unique key (sorted(k,l), i<=j); differentiate the order-1 entry
    auto sorted2 = [](int a, int b) {
      if (a > b) std::swap(a, b);
      return std::pair<int, int>(a, b);
    };
    {
      std::vector<int> key_to_uid(static_cast<std::size_t>(m * m * m * m), -1);
      d2_.map.resize(static_cast<std::size_t>(m * m * m * m));
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l)
          for (int i = 0; i < m; ++i)
            for (int j = 0; j < m; ++j) {
              auto [a, b] = sorted2(k, l);
              int key = (a * m + b) * m * m + pair_id(i, j);
              int& uid = key_to_uid[static_cast<std::size_t>(key)];
              if (uid < 0) {
                uid = static_cast<int>(d2_.unique.size());
                int uid1 = d1_.map[(static_cast<std::size_t>(a) * m + i) * m + j];
                d2_.unique.push_back(d1_.unique[static_cast<std::size_t>(uid1)].diff(b).simplified());
              }
              d2_.map[((static_cast<std::size_t>(k) * m + l) * m + i) * m + j] = uid;
            }
    }

    // order 3: unique key (sorted(k,l,n), i<=j)
    {
      std::vector<int> key_to_uid(static_cast<std::size_t>(m * m * m * m * m), -1);
      d3_.map.resize(static_cast<std::size_t>(m * m * m * m * m));
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l)
          for (int n = 0; n < m; ++n)
            for (int i = 0; i < m; ++i)
              for (int j = 0; j < m; ++j) {
                std::array<int, 3> d = {k, l, n};
                std::sort(d.begin(), d.end());
                int key = ((d[0] * m + d[1]) * m + d[2]) * m * m + pair_id(i, j);
                int& uid = key_to_uid[static_cast<std::size_t>(key)];
                if (uid < 0) {
                  uid = static_cast<int>(d3_.unique.size());
                  int uid2 = d2_.map[((static_cast<std::size_t>(d[0]) * m + d[1]) * m + i) * m + j];
                  d3_.unique.push_back(
                      d2_.unique[static_cast<std::size_t>(uid2)].diff(d[2]).simplified());
                }
                d3_.map[(((static_cast<std::size_t>(k) * m + l) * m + n) * m + i) * m + j] = uid;
              }
    }
  }

  void cholesky_invert(MetricData& md, const Point& p) const {
    const int m = m_;
    std::vector<double> L(md.g);  // lower factor in place
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j <= i; ++j) {
        double s = L[flat2(i, j)];
        for (int k = 0; k < j; ++k) s -= L[flat2(i, k)] * L[flat2(j, k)];
        if (i == j) {
          if (s <= 0.0)
            throw NotPositiveDefinite("metric not positive definite at " +
                                      detail::point_str(p) + " (pivot " +
                                      std::to_string(i) + " = " + std::to_string(s) + ")");
          L[flat2(i, i)] = std::sqrt(s);
        } else {
          L[flat2(i, j)] = s / L[flat2(j, j)];
        }
      }
      for (int j = i + 1; j < m; ++j) L[flat2(i, j)] = 0.0;
    }
    md.det = 1.0;
    for (int i = 0; i < m; ++i) md.det *= L[flat2(i, i)] * L[flat2(i, i)];

    // ginv = (L L^T)^{-1} column by column
    md.ginv.assign(static_cast<std::size_t>(m) * m, 0.0);
    std::vector<double> y(static_cast<std::size_t>(m));
    for (int c = 0; c < m; ++c) {
      for (int i = 0; i < m; ++i) {
        double s = (i == c) ? 1.0 : 0.0;
        for (int k = 0; k < i; ++k) s -= L[flat2(i, k)] * y[static_cast<std::size_t>(k)];
        y[static_cast<std::size_t>(i)] = s / L[flat2(i, i)];
      }
      for (int i = m - 1; i >= 0; --i) {
        double s = y[static_cast<std::size_t>(i)];
        for (int k = i + 1; k < m; ++k) s -= L[flat2(k, i)] * md.ginv[flat2(k, c)];
        md.ginv[flat2(i, c)] = s / L[flat2(i, i)];
      }
    }

    // sanity: g*ginv == I to 1e-12 relative
    double worst = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        double s = 0.0;
        for (int k = 0; k < m; ++k) s += md.g[flat2(i, k)] * md.ginv[flat2(k, j)];
        worst = std::max(worst, std::abs(s - (i == j ? 1.0 : 0.0)));
      }
    double scale = 0.0;
    for (double v : md.g) scale = std::max(scale, std::abs(v));
    if (worst > 1e-12 * std::max(1.0, scale))
      throw Error("metric inversion lost accuracy at " + detail::point_str(p));
  }

  Expr determinant_sym() const { return det_rec(index_list()); }

  std::vector<int> index_list() const {
    std::vector<int> idx(static_cast<std::size_t>(m_));
    for (int i = 0; i < m_; ++i) idx[static_cast<std::size_t>(i)] = i;
    return idx;
  }

  Expr minor_sym(int di, int dj) const {
    std::vector<int> rows, cols;
    for (int i = 0; i < m_; ++i)
      if (i != di) rows.push_back(i);
    for (int j = 0; j < m_; ++j)
      if (j != dj) cols.push_back(j);
    return det_sub(rows, cols);
  }

  Expr det_rec(const std::vector<int>& idx) const { return det_sub(idx, idx); }

  Expr det_sub(const std::vector<int>& rows, const std::vector<int>& cols) const {
    const std::size_t n = rows.size();
    if (n == 1) return g_[flat2(rows[0], cols[0])];
    Expr acc = Expr::number(0.0);
    for (std::size_t c = 0; c < n; ++c) {
      std::vector<int> sub_cols;
      for (std::size_t j = 0; j < n; ++j)
        if (j != c) sub_cols.push_back(cols[j]);
      std::vector<int> sub_rows(rows.begin() + 1, rows.end());
      Expr term = g_[flat2(rows[0], cols[c])] * det_sub(sub_rows, sub_cols);
      acc = (c % 2 == 0) ? acc + term : acc - term;
    }
    return acc.simplified();
  }
};

using ChartPtr = std::shared_ptr<const Chart>;

}  // namespace etv

#endif
