#ifndef ETV_TENSOR_HPP
#define ETV_TENSOR_HPP

// Dense tensors at a single point, with a covariant/contravariant tag per
// slot. All storage is row-major over indices 0..m-1.

#include <cstdint>
#include <string>
#include <vector>

#include "etv/errors.hpp"

namespace etv {

enum class Var : std::uint8_t { Co, Contra };

// Symmetric metric value and its inverse at one point.
struct MetricData {
  int m = 0;
  std::vector<double> g;     // m*m
  std::vector<double> ginv;  // m*m
  double det = 0.0;
};

class PointTensor {
 public:
  PointTensor() = default;
  PointTensor(int m, std::vector<Var> vars)
      : m_(m), vars_(std::move(vars)) {
    if (m < 1) throw DimensionError("tensor dimension must be positive");
    std::size_t n = 1;
    for (std::size_t s = 0; s < vars_.size(); ++s) n *= static_cast<std::size_t>(m);
    a_.assign(n, 0.0);
  }

  static PointTensor scalar(double v) {
    PointTensor t(1, {});
    t.a_[0] = v;
    return t;
  }

  int dim() const { return m_; }
  int rank() const { return static_cast<int>(vars_.size()); }
  const std::vector<Var>& vars() const { return vars_; }
  std::vector<double>& data() { return a_; }
  const std::vector<double>& data() const { return a_; }

  template <class... I>
  double& operator()(I... idx) {
    return a_[offset({static_cast<int>(idx)...})];
  }
  template <class... I>
  double operator()(I... idx) const {
    return a_[offset({static_cast<int>(idx)...})];
  }

  double& at(const std::vector<int>& idx) { return a_[offset(idx)]; }
  double at(const std::vector<int>& idx) const { return a_[offset(idx)]; }

  bool same_shape(const PointTensor& o) const {
    return m_ == o.m_ && vars_ == o.vars_;
  }

  PointTensor& operator+=(const PointTensor& o) {
    require_same(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] += o.a_[i];
    return *this;
  }
  PointTensor& operator-=(const PointTensor& o) {
    require_same(o);
    for (std::size_t i = 0; i < a_.size(); ++i) a_[i] -= o.a_[i];
    return *this;
  }
  PointTensor& operator*=(double c) {
    for (double& v : a_) v *= c;
    return *this;
  }

  friend PointTensor operator+(PointTensor a, const PointTensor& b) { return a += b; }
  friend PointTensor operator-(PointTensor a, const PointTensor& b) { return a -= b; }
  friend PointTensor operator*(PointTensor a, double c) { return a *= c; }
  friend PointTensor operator*(double c, PointTensor a) { return a *= c; }

  double max_abs() const {
    double r = 0.0;
    for (double v : a_) {
      double av = v < 0 ? -v : v;
      if (av > r) r = av;
    }
    return r;
  }

 private:
  int m_ = 0;
  std::vector<Var> vars_;
  std::vector<double> a_;

  std::size_t offset(const std::vector<int>& idx) const {
    if (static_cast<int>(idx.size()) != rank())
      throw DimensionError("tensor index count does not match rank");
    std::size_t off = 0;
    for (int v : idx) {
      if (v < 0 || v >= m_) throw DimensionError("tensor index out of range");
      off = off * static_cast<std::size_t>(m_) + static_cast<std::size_t>(v);
    }
    return off;
  }

  void require_same(const PointTensor& o) const {
    if (!same_shape(o)) throw DimensionError("tensor shapes differ");
  }
};

namespace detail {

// Odometer-style iteration over all multi-indices of a rank-r tensor.
inline bool advance(std::vector<int>& idx, int m) {
  for (int s = static_cast<int>(idx.size()) - 1; s >= 0; --s) {
    if (++idx[s] < m) return true;
    idx[s] = 0;
  }
  return false;
}

}  // namespace detail

// Raise a covariant slot through the inverse metric. No-op tag change rules:
// the slot must currently be covariant.
inline PointTensor raise_slot(const PointTensor& t, int slot, const MetricData& md) {
  if (slot < 0 || slot >= t.rank()) throw DimensionError("raise: slot out of range");
  if (t.vars()[slot] == Var::Contra) throw DimensionError("raise: slot already contravariant");
  std::vector<Var> vars = t.vars();
  vars[slot] = Var::Contra;
  PointTensor out(t.dim(), vars);
  int m = t.dim();
  std::vector<int> idx(t.rank(), 0);
  if (t.rank() == 0) return t;
  do {
    double s = 0.0;
    std::vector<int> src = idx;
    for (int b = 0; b < m; ++b) {
      src[slot] = b;
      s += md.ginv[static_cast<std::size_t>(idx[slot]) * m + b] * t.at(src);
    }
    out.at(idx) = s;
  } while (detail::advance(idx, m));
  return out;
}

inline PointTensor lower_slot(const PointTensor& t, int slot, const MetricData& md) {
  if (slot < 0 || slot >= t.rank()) throw DimensionError("lower: slot out of range");
  if (t.vars()[slot] == Var::Co) throw DimensionError("lower: slot already covariant");
  std::vector<Var> vars = t.vars();
  vars[slot] = Var::Co;
  PointTensor out(t.dim(), vars);
  int m = t.dim();
  std::vector<int> idx(t.rank(), 0);
  if (t.rank() == 0) return t;
  do {
    double s = 0.0;
    std::vector<int> src = idx;
    for (int b = 0; b < m; ++b) {
      src[slot] = b;
      s += md.g[static_cast<std::size_t>(idx[slot]) * m + b] * t.at(src);
    }
    out.at(idx) = s;
  } while (detail::advance(idx, m));
  return out;
}

// Metric-aware contraction of two slots. Opposite variances contract
// directly; equal variances go through the metric (ginv for Co/Co, g for
// Contra/Contra).
inline PointTensor contract(const PointTensor& t, int s1, int s2, const MetricData& md) {
  if (s1 == s2 || s1 < 0 || s2 < 0 || s1 >= t.rank() || s2 >= t.rank())
    throw DimensionError("contract: bad slot pair");
  if (s1 > s2) std::swap(s1, s2);
  int m = t.dim();
  const std::vector<double>* w = nullptr;  // null: direct Kronecker pairing
  if (t.vars()[s1] == t.vars()[s2])
    w = t.vars()[s1] == Var::Co ? &md.ginv : &md.g;

  std::vector<Var> vars;
  for (int s = 0; s < t.rank(); ++s)
    if (s != s1 && s != s2) vars.push_back(t.vars()[s]);
  PointTensor out(m, vars);

  std::vector<int> oidx(vars.size(), 0);
  bool more = true;
  while (more) {
    std::vector<int> src(t.rank(), 0);
    double sum = 0.0;
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        if (!w && a != b) continue;
        int q = 0;
        for (int s = 0; s < t.rank(); ++s) {
          if (s == s1)
            src[s] = a;
          else if (s == s2)
            src[s] = b;
          else
            src[s] = oidx[q++];
        }
        double weight = w ? (*w)[static_cast<std::size_t>(a) * m + b] : 1.0;
        sum += weight * t.at(src);
      }
    }
    out.at(oidx) = sum;
    more = !oidx.empty() && detail::advance(oidx, m);
    if (oidx.empty()) break;
  }
  return out;
}

inline PointTensor outer(const PointTensor& a, const PointTensor& b) {
  if (a.dim() != b.dim()) throw DimensionError("outer: dimension mismatch");
  std::vector<Var> vars = a.vars();
  vars.insert(vars.end(), b.vars().begin(), b.vars().end());
  PointTensor out(a.dim(), vars);
  const std::size_t nb = b.data().size();
  for (std::size_t i = 0; i < a.data().size(); ++i)
    for (std::size_t j = 0; j < nb; ++j)
      out.data()[i * nb + j] = a.data()[i] * b.data()[j];
  return out;
}

// Full metric norm-square: contract the tensor against its metric dual.
// Nonnegative for a positive-definite metric.
inline double norm2(const PointTensor& t, const MetricData& md) {
  if (t.rank() == 0) return t.data()[0] * t.data()[0];
  PointTensor dual = t;
  for (int s = 0; s < t.rank(); ++s)
    dual = t.vars()[s] == Var::Co ? raise_slot(dual, s, md) : lower_slot(dual, s, md);
  double sum = 0.0;
  for (std::size_t i = 0; i < t.data().size(); ++i) sum += t.data()[i] * dual.data()[i];
  return sum;
}

}  // namespace etv

#endif
