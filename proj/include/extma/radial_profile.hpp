#pragma once

// Radial solutions of det(D^2 u) = f(r) via quadrature of
//   u(r) = base + int_{r0}^r ( int_{lo}^s n t^{n-1} f(t) dt + d )^{1/n} ds,
// with lo = 1 for the exterior families and lo = 0 (d = 0) for the global
// formula.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "extma/quadrature.hpp"
#include "extma/rhs.hpp"

namespace extma {

// det(D^2 h) for a radial h: h''(r) (h'(r)/r)^{n-1}.
inline double radial_det(double u_prime, double u_second, double r, int n) {
  if (r <= 0.0) throw std::domain_error("radial_det: r <= 0");
  return u_second * std::pow(u_prime / r, n - 1);
}

struct TailModel {
  double quadratic = 0.5;   // coefficient of r^2, fixed by the equation
  double log_coeff = 0.0;   // fitted coefficient of log r
  double constant = 0.0;    // fitted constant
  double residual_exponent = 0.0;  // decay rate of what is left
};

class RadialProfile {
 public:
  // Exterior family when r0 >= 1 (inner integral from 1); global formula
  // when r0 == 0 (inner integral from 0, requires d == 0).
  RadialProfile(RightHandSide f, int n, double d, double r0, double base,
                double r_max = 2e4)
      : f_(std::move(f)), n_(n), d_(d), r0_(r0), base_(base) {
    if (!f_.radial()) throw std::invalid_argument("RadialProfile: rhs not radial");
    if (n != 2 && n != 3) throw std::invalid_argument("RadialProfile: n in {2,3}");
    if (d < 0.0) throw std::invalid_argument("RadialProfile: d < 0");
    if (r0 == 0.0) {
      if (d != 0.0)
        throw std::invalid_argument("RadialProfile: global form requires d = 0");
      lo_ = 0.0;
    } else if (r0 >= 1.0) {
      lo_ = 1.0;
    } else {
      throw std::invalid_argument("RadialProfile: r0 must be 0 or >= 1");
    }
    const double F0 = shooting(std::max(r0_, lo_));
    if (F0 < -1e-14)
      throw std::runtime_error(
          "degenerate shooting parameter: inner integral + d is " +
          std::to_string(F0) + " at s = " + std::to_string(std::max(r0_, lo_)));
    build_grid(r_max);
  }

  int n() const { return n_; }
  double d() const { return d_; }
  double r0() const { return r0_; }
  double r_max() const { return grid_.back(); }
  const RightHandSide& f() const { return f_; }
  const std::vector<double>& grid() const { return grid_; }
  const std::vector<double>& values() const { return u_; }

  // F(s) = int_{lo}^s n t^{n-1} f dt + d
  double shooting(double s) const {
    return std::pow(s, n_) - std::pow(lo_, n_) + f_.excess_moment(n_, lo_, s) + d_;
  }

  double derivative(double r) const {
    const double F = shooting(r);
    if (F <= 0.0) return 0.0;
    return std::pow(F, 1.0 / n_);
  }

  double second_derivative(double r) const {
    const double F = shooting(r);
    if (F <= 0.0)
      throw std::domain_error("second_derivative at degenerate radius");
    return f_.radial_value(r) * std::pow(r, n_ - 1) *
           std::pow(F, 1.0 / n_ - 1.0);
  }

  double value(double r) const {
    if (r < r0_ - 1e-9 * (1.0 + r0_) || r > grid_.back() * (1.0 + 1e-12))
      throw std::domain_error("RadialProfile::value: r outside [r0, r_max]");
    r = std::max(r, grid_.front());
    auto it = std::upper_bound(grid_.begin(), grid_.end(), r);
    const size_t i = (it == grid_.begin()) ? 0 : (it - grid_.begin() - 1);
    return u_[i] + integrate([this](double s) { return derivative(s); },
                             grid_[i], r, quad_opts());
  }

  // Fit u - r^2/2 against {log r, 1} over the last decade of the grid and
  // estimate the decay exponent of the remainder.
  TailModel tail_model() const {
    TailModel t;
    const double hi = grid_.back(), lolim = hi / 10.0;
    std::vector<double> rs, ws;
    for (size_t i = 0; i < grid_.size(); ++i) {
      if (grid_[i] >= lolim) {
        rs.push_back(grid_[i]);
        ws.push_back(u_[i] - 0.5 * grid_[i] * grid_[i]);
      }
    }
    // least squares w ~ a log r + b
    double sxx = 0, sx = 0, sxy = 0, sy = 0;
    const double m = static_cast<double>(rs.size());
    for (size_t i = 0; i < rs.size(); ++i) {
      const double x = std::log(rs[i]);
      sxx += x * x;
      sx += x;
      sxy += x * ws[i];
      sy += ws[i];
    }
    const double det = m * sxx - sx * sx;
    t.log_coeff = (m * sxy - sx * sy) / det;
    t.constant = (sxx * sy - sx * sxy) / det;
    // remainder slope on log-log axes
    double rxx = 0, rx = 0, rxy = 0, ry = 0;
    int cnt = 0;
    for (size_t i = 0; i < rs.size(); ++i) {
      const double res =
          std::fabs(ws[i] - t.log_coeff * std::log(rs[i]) - t.constant);
      if (res < 1e-14) continue;
      const double x = std::log(rs[i]), y = std::log(res);
      rxx += x * x;
      rx += x;
      rxy += x * y;
      ry += y;
      ++cnt;
    }
    if (cnt >= 2) {
      const double dd = cnt * rxx - rx * rx;
      t.residual_exponent = -(cnt * rxy - rx * ry) / dd;
    }
    return t;
  }

 private:
  static QuadratureOptions quad_opts() {
    QuadratureOptions o;
    o.rel_tol = 1e-12;
    o.abs_tol = 1e-13;
    return o;
  }

  void build_grid(double r_max) {
    grid_.push_back(r0_);
    double r = std::max(r0_, 1e-3);
    if (r > r0_) grid_.push_back(r);
    const double ratio = std::pow(10.0, 1.0 / 64.0);
    while (r < r_max) {
      r = std::min(r * ratio, r_max);
      grid_.push_back(r);
    }
    u_.resize(grid_.size());
    u_[0] = base_;
    for (size_t i = 1; i < grid_.size(); ++i)
      u_[i] = u_[i - 1] +
              integrate([this](double s) { return derivative(s); },
                        grid_[i - 1], grid_[i], quad_opts());
  }

  RightHandSide f_;
  int n_;
  double d_;
  double r0_;
  double base_;
  double lo_ = 1.0;
  std::vector<double> grid_;
  std::vector<double> u_;
};

inline RadialProfile exact_radial_solution(const RightHandSide& f, int n,
                                           double d, double r0, double base,
                                           double r_max = 2e4) {
  return RadialProfile(f, n, d, r0, base, r_max);
}

}  // namespace extma
