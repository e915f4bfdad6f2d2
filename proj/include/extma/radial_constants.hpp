#pragma once

// Matching constants of the radial barrier families: mu_1, mu_2, their
// inversion d(c), and the n = 2 log coefficient A_d.

#include <cmath>
#include <functional>
#include <stdexcept>

#include "extma/quadrature.hpp"
#include "extma/rhs.hpp"

namespace extma {

namespace detail {

// (s^n + P)^{1/n} - s without cancellation.
inline double root_gap(double s, double P, int n) {
  const double q = P / std::pow(s, n);
  if (std::fabs(q) < 0.5)
    return s * std::expm1(std::log1p(q) / n);
  return std::pow(std::pow(s, n) + P, 1.0 / n) - s;
}

}  // namespace detail

// mu(d) = beta_off - lower^2/2
//         + int_lower^inf ((int_1^s n t^{n-1} f dt + d)^{1/n} - s) ds.
// The improper integral is split at S = 1000 * lower and closed with the
// analytic first-order tail; n >= 3 only.
inline double mu_constant(const RightHandSide& f, int n, double d,
                          double lower, double beta_off) {
  if (n < 3)
    throw std::domain_error("mu: n = 2 uses log_coefficient instead");
  if (!f.radial()) throw std::invalid_argument("mu: rhs must be radial");
  const double F_low = std::pow(lower, n) - 1.0 + f.excess_moment(n, 1.0, lower) + d;
  if (F_low <= 0.0)
    throw std::runtime_error("mu: degenerate shooting parameter at s = lower");
  const double S = 1000.0 * lower;
  QuadratureOptions opt;
  opt.rel_tol = 1e-12;
  opt.abs_tol = 1e-14;
  const double main = integrate(
      [&](double s) {
        const double P = d - 1.0 + f.excess_moment(n, 1.0, s);
        return detail::root_gap(s, P, n);
      },
      lower, S, opt);
  const double tail = (d - 1.0) / (n * (n - 2)) * std::pow(S, 2.0 - n) +
                      f.excess_moment_tail(n, S);
  return beta_off - 0.5 * lower * lower + main + tail;
}

inline double mu1(const RightHandSide& f_major, int n, double d, double r_bar,
                  double beta1) {
  return mu_constant(f_major, n, d, r_bar, beta1);
}

inline double mu2(const RightHandSide& f_minor, int n, double d,
                  double beta2) {
  return mu_constant(f_minor, n, d, 2.0, beta2);
}

// Invert a strictly increasing d -> mu(d) for mu(d) = c. d_min is the
// smallest admissible shooting parameter.
inline double solve_d_for_c(const std::function<double(double)>& mu, double c,
                            double d_min = 1e-8) {
  const double tol = std::max(1e-10, 1e-12 * std::fabs(c));
  double lo = d_min, mu_lo = mu(lo);
  if (c < mu_lo - tol)
    throw std::runtime_error("solve_d_for_c: c <= c_* (below admissible range)");
  if (std::fabs(mu_lo - c) <= tol) return lo;
  double hi = std::max(1.0, 2.0 * lo), mu_hi = mu(hi);
  int doublings = 0;
  while (mu_hi < c) {
    lo = hi;
    mu_lo = mu_hi;
    hi *= 2.0;
    mu_hi = mu(hi);
    if (++doublings > 60)
      throw std::runtime_error("solve_d_for_c: root not bracketed after 60 doublings");
  }
  // bisection with a secant proposal each step
  for (int it = 0; it < 200; ++it) {
    double mid = 0.5 * (lo + hi);
    if (mu_hi > mu_lo) {
      const double sec = lo + (c - mu_lo) * (hi - lo) / (mu_hi - mu_lo);
      if (sec > lo && sec < hi) mid = sec;
    }
    const double mu_mid = mu(mid);
    if (std::fabs(mu_mid - c) <= tol) return mid;
    if (mu_mid < c) {
      lo = mid;
      mu_lo = mu_mid;
    } else {
      hi = mid;
      mu_hi = mu_mid;
    }
  }
  throw std::runtime_error("solve_d_for_c: no convergence");
}

// n = 2 log coefficient: A_d = d - 1 + int_1^inf 2t (f(t)-1) dt.
inline double log_coefficient(const RightHandSide& f, double d) {
  if (!f.radial())
    throw std::invalid_argument("log_coefficient: rhs must be radial");
  return d - 1.0 + f.excess_moment_total(2);
}

}  // namespace extma
