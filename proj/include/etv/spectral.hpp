#pragma once

// Finite-horizon surrogates for the spectral side of the theory: the critical
// curve of a radial area function, the growth diagnostic for the oscillation
// condition, and the first Dirichlet eigenvalue of radial Schrodinger-type
// operators -(1/v)(v u')' + q u.  All asymptotic statements are reported as
// finite-horizon diagnostics, never as proofs.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "etv/errors.hpp"
#include "etv/expr.hpp"

namespace etv {

using RadialFn = std::function<double(double)>;

// Adapter: a one-variable Expr in coordinate 0 as a callable of r.
inline RadialFn radial_fn(const Expr& e) {
  return [e](double r) {
    std::vector<double> p(1, r);
    return e.eval(p);
  };
}

namespace detail {

// Adaptive Gauss-Kronrod (G7/K15) quadrature with bisection refinement.
inline double gk15(const RadialFn& f, double a, double b, double& err) {
  static const double xgk[8] = {0.9914553711208126, 0.9491079123427585, 0.8648644233597691,
                                0.7415311855993944, 0.5860872354676911, 0.4058451513773972,
                                0.2077849550078985, 0.0};
  static const double wgk[8] = {0.0229353220105292, 0.0630920926299785, 0.1047900103222502,
                                0.1406532597155259, 0.1690047266392679, 0.1903505780647854,
                                0.2044329400752989, 0.2094821410847278};
  static const double wg[4] = {0.1294849661688697, 0.2797053914892767, 0.3818300505051189,
                               0.4179591836734694};
  double c = 0.5 * (a + b), h = 0.5 * (b - a);
  double fc = f(c);
  double kron = wgk[7] * fc, gauss = wg[3] * fc;
  for (int k = 0; k < 7; ++k) {
    double fv = f(c - h * xgk[k]) + f(c + h * xgk[k]);
    kron += wgk[k] * fv;
    if (k % 2 == 1) gauss += wg[k / 2] * fv;
  }
  err = std::abs(kron - gauss) * h;
  return kron * h;
}

inline double adaptive_quad(const RadialFn& f, double a, double b, double tol, int depth = 0) {
  double err = 0.0;
  double whole = gk15(f, a, b, err);
  // The 1e-14 floor stops refinement once the G7/K15 gap is roundoff noise,
  // which a purely relative tolerance never detects on a near-zero integrand.
  if (err <= tol || err <= 1e-14 * (1.0 + std::abs(whole)) || depth >= 30) return whole;
  double c = 0.5 * (a + b);
  return adaptive_quad(f, a, c, 0.5 * tol, depth + 1) +
         adaptive_quad(f, c, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

inline double integrate(const RadialFn& f, double a, double b, double rel_tol = 1e-9) {
  if (!(a < b)) return a == b ? 0.0 : -integrate(f, b, a, rel_tol);
  double err = 0.0;
  double rough = detail::gk15(f, a, b, err);
  double tol = rel_tol * std::max(std::abs(rough), 1e-12);
  return detail::adaptive_quad(f, a, b, tol);
}

// ---------------------------------------------------------------------------
// Critical curve  chi(r) = { 2 vhat(r) * integral_r^inf ds/vhat(s) }^{-2}
//
// The infinite integral is truncated at r_inf; `tail` is the caller's
// estimate of the remainder over (r_inf, inf), 0 when negligible.

struct TailSpec {
  double r_inf;
  double tail = 0.0;
};

namespace detail {

inline RadialFn reciprocal(const RadialFn& vhat) {
  return [&vhat](double s) {
    double v = vhat(s);
    if (!(v > 0.0)) throw InvalidParameters("vhat must be positive on the integration range");
    return 1.0 / v;
  };
}

// Integrability screen: over geometrically growing windows the partial
// integrals of 1/vhat must decay, or the defining integral diverges.
// Heuristic with threshold 0.98: borderline exponents sigma near 1 in
// vhat ~ r^sigma cannot be separated numerically.
inline void screen_integrable(const RadialFn& inv, double r, double r_inf) {
  double prev = -1.0, lo = r;
  int windows = 0;
  while (2.0 * lo <= r_inf) {
    double w = integrate(inv, lo, 2.0 * lo);
    if (windows >= 2 && prev > 0.0 && w >= 0.98 * prev)
      throw NotIntegrable("1/vhat does not decay; the critical-curve integral diverges");
    prev = w;
    lo *= 2.0;
    ++windows;
  }
}

// chi from a precomputed value of integral_r^inf ds/vhat(s).
inline double chi_from_tail(const RadialFn& vhat, double r, double tail_integral) {
  double denom = 2.0 * vhat(r) * tail_integral;
  return 1.0 / (denom * denom);
}

}  // namespace detail

inline double critical_curve(const RadialFn& vhat, double r, const TailSpec& tail) {
  if (!(tail.r_inf > r)) throw InvalidParameters("truncation radius must exceed r");
  RadialFn inv = detail::reciprocal(vhat);
  detail::screen_integrable(inv, r, tail.r_inf);
  return detail::chi_from_tail(vhat, r, integrate(inv, r, tail.r_inf) + tail.tail);
}

inline double critical_curve(const Expr& vhat, double r, const TailSpec& tail) {
  return critical_curve(radial_fn(vhat), r, tail);
}

// ---------------------------------------------------------------------------
// Oscillation-condition diagnostic: the trajectory of
//   I(r) = integral_R^r ( sqrt|q(s)| - sqrt(chi(s)) ) ds
// on a finite horizon.  A verdict of "diverging" means the partial integral
// is still growing at the horizon; it is a numeric diagnostic, not a proof.

struct Condition254Report {
  double R = 0.0;
  double r_max = 0.0;
  std::vector<double> r;         // log-spaced grid from R to r_max
  std::vector<double> integral;  // I at each grid radius
  double slope_last_decade = 0.0;
  std::string verdict;  // "diverging" | "bounded" | "inconclusive at horizon"
  std::string note = "finite-horizon diagnostic, not a proof of the asymptotic condition";
};

inline Condition254Report condition_254_report(const RadialFn& q, const RadialFn& vhat, double R,
                                               double r_max, const TailSpec& tail) {
  if (!(0.0 < R && R < r_max)) throw InvalidParameters("need 0 < R < r_max");
  if (!(tail.r_inf >= r_max)) throw InvalidParameters("truncation radius must reach past r_max");

  // The hypothesis requires q <= 0; reject a sampled positive value.
  for (int i = 0; i <= 512; ++i) {
    double s = R * std::pow(r_max / R, i / 512.0);
    if (q(s) > 1e-12)
      throw SignViolation("coefficient q is positive at r=" + std::to_string(s));
  }

  RadialFn inv = detail::reciprocal(vhat);
  detail::screen_integrable(inv, R, tail.r_inf);

  Condition254Report rep;
  rep.R = R;
  rep.r_max = r_max;
  const int cells = 64;

  // Suffix integrals of 1/vhat from each grid radius out to the truncation
  // point, so chi inside a cell only needs one short local quadrature.
  std::vector<double> grid(static_cast<std::size_t>(cells) + 1), suffix(static_cast<std::size_t>(cells) + 1);
  for (int i = 0; i <= cells; ++i)
    grid[static_cast<std::size_t>(i)] = R * std::pow(r_max / R, static_cast<double>(i) / cells);
  suffix[static_cast<std::size_t>(cells)] = integrate(inv, r_max, tail.r_inf) + tail.tail;
  for (int i = cells - 1; i >= 0; --i)
    suffix[static_cast<std::size_t>(i)] =
        suffix[static_cast<std::size_t>(i) + 1] +
        integrate(inv, grid[static_cast<std::size_t>(i)], grid[static_cast<std::size_t>(i) + 1]);

  double acc = 0.0;
  rep.r.push_back(R);
  rep.integral.push_back(0.0);
  for (int i = 1; i <= cells; ++i) {
    double a = grid[static_cast<std::size_t>(i - 1)], b = grid[static_cast<std::size_t>(i)];
    double suffix_b = suffix[static_cast<std::size_t>(i)];
    RadialFn integrand = [&](double s) {
      double tail_integral = integrate(inv, s, b) + suffix_b;
      return std::sqrt(std::abs(q(s))) - std::sqrt(detail::chi_from_tail(vhat, s, tail_integral));
    };
    acc += integrate(integrand, a, b);
    rep.r.push_back(b);
    rep.integral.push_back(acc);
  }

  // Growth over the last decade of the horizon, measured against the scale
  // of the trajectory.
  double decade_lo = std::max(R, r_max / 10.0);
  double i_lo = acc;
  for (std::size_t k = 0; k < rep.r.size(); ++k)
    if (rep.r[k] >= decade_lo) {
      i_lo = rep.integral[k];
      break;
    }
  double gain = acc - i_lo;
  rep.slope_last_decade = gain / std::log(r_max / decade_lo);
  double scale = std::max(1.0, std::abs(acc));
  if (gain > 0.02 * scale)
    rep.verdict = "diverging";
  else if (gain <= 0.002 * scale)
    rep.verdict = "bounded";
  else
    rep.verdict = "inconclusive at horizon";
  return rep;
}

inline Condition254Report condition_254_report(const Expr& q, const Expr& vhat, double R,
                                               double r_max, const TailSpec& tail) {
  return condition_254_report(radial_fn(q), radial_fn(vhat), R, r_max, tail);
}

// ---------------------------------------------------------------------------
// First Dirichlet eigenvalue of  L u = -(1/v)(v u')' + q u  on (0, R).
//
// Dirichlet refers to the outer boundary r = R; the origin carries the
// natural regularity condition (zero flux, automatic when v(0) = 0 as for
// genuine radial area functions; a strictly positive v degenerates it to a
// Neumann wall).  Vertex-centered second-order scheme, symmetrized by the
// similarity transform z = sqrt(v) u; smallest eigenvalue by Sturm bisection.

struct RadialModel {
  int m = 3;
  RadialFn v;  // boundary-area function, > 0 on (0, R]
  RadialFn q;  // potential coefficient
};

// Radialized stability-operator coefficient (mu/beta)(m lambda + (m rho - alpha) S).
inline Expr stability_coefficient(int m, double alpha, double beta, double mu, double rho,
                                  const Expr& lambda_bar, const Expr& s_bar) {
  if (beta == 0.0) throw BetaZero("stability coefficient needs beta != 0");
  return (Expr::number(mu / beta) *
          (Expr::number(static_cast<double>(m)) * lambda_bar +
           Expr::number(m * rho - alpha) * s_bar))
      .simplified();
}

namespace detail {

// Number of eigenvalues of the symmetric tridiagonal (diag, off) below x.
inline int sturm_count(const std::vector<double>& diag, const std::vector<double>& off, double x) {
  int count = 0;
  double d = 1.0;
  for (std::size_t i = 0; i < diag.size(); ++i) {
    double b2 = i == 0 ? 0.0 : off[i - 1] * off[i - 1];
    d = diag[i] - x - b2 / d;
    if (d == 0.0) d = 1e-300;
    if (d < 0.0) ++count;
  }
  return count;
}

}  // namespace detail

inline double lambda1_radial(const RadialModel& model, double R, int n_grid) {
  if (n_grid < 100) throw InvalidParameters("eigenvalue grid needs at least 100 cells");
  if (!(R > 0.0)) throw InvalidParameters("radius must be positive");
  const double h = R / n_grid;  // interior nodes r_i = i h, i = 1..n_grid-1, u(R) = 0

  std::vector<double> vmid(static_cast<std::size_t>(n_grid) + 1), vnode(static_cast<std::size_t>(n_grid));
  for (int i = 0; i <= n_grid; ++i) {
    double r = (i - 0.5) * h;  // face between nodes i-1 and i
    vmid[static_cast<std::size_t>(i)] = r <= 0.0 ? 0.0 : model.v(r);
  }
  for (int i = 1; i < n_grid; ++i) {
    vnode[static_cast<std::size_t>(i)] = model.v(i * h);
    if (!(vnode[static_cast<std::size_t>(i)] > 0.0))
      throw NotPositiveDefinite("area function must be positive on the interior grid");
    if (vmid[static_cast<std::size_t>(i)] < 0.0 || vmid[static_cast<std::size_t>(i + 1)] < 0.0)
      throw NotPositiveDefinite("area function must be nonnegative at cell faces");
  }

  // Interior unknowns u_1..u_{n_grid-1}; u(0) couples through the regularity
  // condition u_0 = u_1 (zero slope at the origin), u_{n_grid} = 0.
  const int size = n_grid - 1;
  std::vector<double> diag(static_cast<std::size_t>(size)), off(static_cast<std::size_t>(size) - 1);
  for (int i = 1; i < n_grid; ++i) {
    double vl = vmid[static_cast<std::size_t>(i)], vr = vmid[static_cast<std::size_t>(i) + 1];
    double vi = vnode[static_cast<std::size_t>(i)];
    double a = (vl + vr) / (vi * h * h) + model.q(i * h);
    if (i == 1) a -= vl / (vi * h * h);  // reflected origin removes the left flux
    diag[static_cast<std::size_t>(i - 1)] = a;
    if (i < n_grid - 1)
      off[static_cast<std::size_t>(i - 1)] =
          -vr / (h * h * std::sqrt(vi * vnode[static_cast<std::size_t>(i) + 1]));
  }

  // Gershgorin bracket, then bisect for the smallest eigenvalue.
  double lo = diag[0], hi = diag[0];
  for (int i = 0; i < size; ++i) {
    double radius = 0.0;
    if (i > 0) radius += std::abs(off[static_cast<std::size_t>(i - 1)]);
    if (i < size - 1) radius += std::abs(off[static_cast<std::size_t>(i)]);
    lo = std::min(lo, diag[static_cast<std::size_t>(i)] - radius);
    hi = std::max(hi, diag[static_cast<std::size_t>(i)] + radius);
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo)) + 1e-13; ++iter) {
    double mid = 0.5 * (lo + hi);
    if (detail::sturm_count(diag, off, mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace etv
