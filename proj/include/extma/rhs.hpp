#pragma once

// Source terms f for det(D^2 u) = f, together with their decay class and
// the radial reductions the quadrature engine relies on.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>

#include "extma/quadrature.hpp"

namespace extma {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class RhsKind {
  constant,
  radial_perturbation,
  sharpness,
  compact_bump,
  affine_pullback,
};

inline std::string to_string(RhsKind k) {
  switch (k) {
    case RhsKind::constant: return "constant";
    case RhsKind::radial_perturbation: return "radial_perturbation";
    case RhsKind::sharpness: return "sharpness";
    case RhsKind::compact_bump: return "compact_bump";
    case RhsKind::affine_pullback: return "affine_pullback";
  }
  return "?";
}

namespace detail {

// C^3 smoothstep: s(0)=0, s(1)=1, vanishing first three derivatives at both
// ends. Used to bridge the sharpness profile on (1,2).
inline double smoothstep3(double t) {
  return t * t * t * t * (35.0 + t * (-84.0 + t * (70.0 - 20.0 * t)));
}
inline double smoothstep3_d1(double t) {
  return t * t * t * (140.0 + t * (-420.0 + t * (420.0 - 140.0 * t)));
}
inline double smoothstep3_d2(double t) {
  return t * t * (420.0 + t * (-1680.0 + t * (2100.0 - 840.0 * t)));
}
inline double smoothstep3_d3(double t) {
  return t * (840.0 + t * (-5040.0 + t * (8400.0 - 4200.0 * t)));
}

}  // namespace detail

// f with its decay class (beta, c0). All evaluators are pure; instances are
// immutable after construction and safe to share across threads.
class RightHandSide {
 public:
  // f == level everywhere. level != 1 is outside the decay class (FA) and is
  // meant for barrier majorants on bounded regions.
  static RightHandSide constant(double level = 1.0) {
    if (level <= 0) throw std::invalid_argument("constant: level <= 0");
    RightHandSide f;
    f.kind_ = RhsKind::constant;
    f.amplitude_ = level - 1.0;
    f.beta_ = level == 1.0 ? std::numeric_limits<double>::infinity() : 0.0;
    f.c0_ = std::max(level, 1.0 / level);
    return f;
  }

  // f(r) = 1 + a r^-beta, exact power law (singular at the origin; meant for
  // exterior use, r >= r0 with r0 around 1).
  static RightHandSide radial_perturbation(double amplitude, double beta) {
    if (beta <= 0) throw std::invalid_argument("radial_perturbation: beta <= 0");
    RightHandSide f;
    f.kind_ = RhsKind::radial_perturbation;
    f.amplitude_ = amplitude;
    f.beta_ = beta;
    f.c0_ = std::max(1.0 + std::fabs(amplitude), 1.0 / (1.0 - std::min(0.9, std::fabs(amplitude))));
    if (amplitude <= -1.0)
      throw std::invalid_argument("radial_perturbation: f not positive for r >= 1");
    return f;
  }

  // f = 1 on [0,1], 1 + r^-2 on [2,inf), C^3 bridge in between. beta = 2,
  // deliberately outside the admissible decay class.
  static RightHandSide sharpness() {
    RightHandSide f;
    f.kind_ = RhsKind::sharpness;
    f.beta_ = 2.0;
    f.c0_ = 1.31;  // bridge peak of smoothstep(r-1)/r^2 is just under 0.30
    return f;
  }

  // f = 1 + a * exp(1 - 1/(1-z^2)), z = (r-center)/width, compactly
  // supported on (center-width, center+width).
  static RightHandSide compact_bump(double amplitude, double center,
                                    double width) {
    if (width <= 0 || center - width < 0)
      throw std::invalid_argument("compact_bump: support must lie in r >= 0");
    if (amplitude <= -1.0)
      throw std::invalid_argument("compact_bump: f not positive");
    RightHandSide f;
    f.kind_ = RhsKind::compact_bump;
    f.amplitude_ = amplitude;
    f.center_ = center;
    f.width_ = width;
    f.beta_ = std::numeric_limits<double>::infinity();
    f.c0_ = 1.0 + std::fabs(amplitude);
    return f;
  }

  // f(x) = base(Tx), det(T) = 1.
  static RightHandSide affine_pullback(RightHandSide base, const Matrix& T) {
    if (std::fabs(T.determinant() - 1.0) > 1e-10)
      throw std::invalid_argument("affine_pullback: det(T) != 1");
    RightHandSide f;
    f.kind_ = RhsKind::affine_pullback;
    f.base_ = std::make_shared<RightHandSide>(std::move(base));
    f.map_ = T;
    f.beta_ = f.base_->beta_;
    f.c0_ = f.base_->c0_;
    return f;
  }

  RhsKind kind() const { return kind_; }
  double beta() const { return beta_; }
  double c0() const { return c0_; }
  double amplitude() const { return amplitude_; }
  double bump_center() const { return center_; }
  double bump_width() const { return width_; }
  const Matrix& pullback_map() const { return map_; }
  const RightHandSide& pullback_base() const {
    if (!base_) throw std::logic_error("pullback_base on a radial rhs");
    return *base_;
  }

  bool radial() const { return kind_ != RhsKind::affine_pullback; }

  double operator()(const Vector& x) const { return 1.0 + excess(x); }

  // f - 1 without cancellation.
  double excess(const Vector& x) const {
    if (kind_ == RhsKind::affine_pullback) return base_->excess(map_ * x);
    return radial_excess(x.norm());
  }

  double radial_value(double r) const { return 1.0 + radial_excess(r); }

  double radial_excess(double r) const {
    switch (kind_) {
      case RhsKind::constant:
        return amplitude_;
      case RhsKind::radial_perturbation:
        return amplitude_ * std::pow(r, -beta_);
      case RhsKind::sharpness:
        if (r <= 1.0) return 0.0;
        if (r >= 2.0) return 1.0 / (r * r);
        return detail::smoothstep3(r - 1.0) / (r * r);
      case RhsKind::compact_bump: {
        const double z = (r - center_) / width_;
        if (std::fabs(z) >= 1.0) return 0.0;
        return amplitude_ * std::exp(1.0 - 1.0 / (1.0 - z * z));
      }
      case RhsKind::affine_pullback:
        break;
    }
    throw std::logic_error("radial_excess on non-radial rhs");
  }

  // k-th radial derivative of f - 1, k = 1..3, analytic per kind.
  double radial_excess_deriv(double r, int k) const {
    if (k < 1 || k > 3) throw std::invalid_argument("derivative order");
    switch (kind_) {
      case RhsKind::constant:
        return 0.0;
      case RhsKind::radial_perturbation: {
        double c = amplitude_;
        for (int j = 0; j < k; ++j) c *= -(beta_ + j);
        return c * std::pow(r, -beta_ - k);
      }
      case RhsKind::sharpness: {
        if (r <= 1.0) return 0.0;
        if (r >= 2.0) {
          double c = 1.0;
          for (int j = 0; j < k; ++j) c *= -(2.0 + j);
          return c * std::pow(r, -2.0 - k);
        }
        const double t = r - 1.0;
        const double s0 = detail::smoothstep3(t);
        const double s1 = detail::smoothstep3_d1(t);
        const double s2 = detail::smoothstep3_d2(t);
        const double s3 = detail::smoothstep3_d3(t);
        const double r2 = r * r, r3 = r2 * r, r4 = r3 * r, r5 = r4 * r;
        if (k == 1) return s1 / r2 - 2.0 * s0 / r3;
        if (k == 2) return s2 / r2 - 4.0 * s1 / r3 + 6.0 * s0 / r4;
        return s3 / r2 - 6.0 * s2 / r3 + 18.0 * s1 / r4 - 24.0 * s0 / r5;
      }
      case RhsKind::compact_bump: {
        const double z = (r - center_) / width_;
        if (std::fabs(z) >= 1.0) return 0.0;
        const double q = 1.0 - z * z;
        const double g = std::exp(1.0 - 1.0 / q);
        const double q2 = q * q, q3 = q2 * q, q4 = q3 * q;
        const double phi = -2.0 * z / q2;
        const double phi1 = -2.0 / q2 - 8.0 * z * z / q3;
        const double phi2 = -24.0 * z / q3 - 48.0 * z * z * z / q4;
        double gd;
        if (k == 1)
          gd = phi * g;
        else if (k == 2)
          gd = (phi1 + phi * phi) * g;
        else
          gd = (phi2 + 3.0 * phi * phi1 + phi * phi * phi) * g;
        return amplitude_ * gd / std::pow(width_, k);
      }
      case RhsKind::affine_pullback:
        break;
    }
    throw std::logic_error("radial derivative on non-radial rhs");
  }

  Vector grad(const Vector& x) const {
    if (kind_ == RhsKind::affine_pullback)
      return map_.transpose() * base_->grad(map_ * x);
    const double r = x.norm();
    if (r == 0.0) return Vector::Zero(x.size());
    return radial_excess_deriv(r, 1) / r * x;
  }

  // M(s) = int_lo^s n t^{n-1} (f(t)-1) dt (radial kinds only).
  double excess_moment(int n, double lo, double s) const {
    switch (kind_) {
      case RhsKind::constant:
        return amplitude_ * (std::pow(s, n) - std::pow(lo, n));
      case RhsKind::radial_perturbation: {
        if (lo <= 0.0 && beta_ >= n)
          throw std::invalid_argument("excess_moment: divergent at r = 0");
        if (std::fabs(beta_ - n) < 1e-12)
          return amplitude_ * n * std::log(s / lo);
        return amplitude_ * n / (n - beta_) *
               (std::pow(s, n - beta_) - std::pow(lo, n - beta_));
      }
      case RhsKind::sharpness: {
        auto piece = [&](double a, double b) -> double {
          // int over [a,b] intersected with each analytic region
          double total = 0.0;
          const double b1 = std::clamp(a, 1.0, 2.0), b2 = std::clamp(b, 1.0, 2.0);
          if (b2 > b1)
            total += integrate(
                [&](double t) {
                  return n * std::pow(t, n - 1) * radial_excess(t);
                },
                b1, b2);
          const double t1 = std::max(a, 2.0), t2 = std::max(b, 2.0);
          if (t2 > t1) {
            if (n == 2)
              total += 2.0 * std::log(t2 / t1);
            else
              total += static_cast<double>(n) / (n - 2) *
                       (std::pow(t2, n - 2) - std::pow(t1, n - 2));
          }
          return total;
        };
        if (s >= lo) return piece(lo, s);
        return -piece(s, lo);
      }
      case RhsKind::compact_bump: {
        const double a = std::max(std::min(lo, s), center_ - width_);
        const double b = std::min(std::max(lo, s), center_ + width_);
        if (b <= a) return 0.0;
        const double v = integrate(
            [&](double t) { return n * std::pow(t, n - 1) * radial_excess(t); },
            a, b);
        return s >= lo ? v : -v;
      }
      case RhsKind::affine_pullback:
        break;
    }
    throw std::logic_error("excess_moment on non-radial rhs");
  }

  // M(inf) = int_1^inf n t^{n-1}(f-1) dt; throws when the declared decay
  // cannot pay for the volume growth.
  double excess_moment_total(int n) const {
    switch (kind_) {
      case RhsKind::constant:
        if (amplitude_ != 0.0)
          throw std::domain_error("excess_moment_total: divergent (f != 1)");
        return 0.0;
      case RhsKind::radial_perturbation:
        if (beta_ <= n)
          throw std::domain_error("excess_moment_total: divergent (beta <= n)");
        return amplitude_ * n / (beta_ - n);
      case RhsKind::sharpness:
        throw std::domain_error("excess_moment_total: divergent (beta = 2)");
      case RhsKind::compact_bump:
        return excess_moment(n, 1.0, center_ + width_);
      case RhsKind::affine_pullback:
        break;
    }
    throw std::logic_error("excess_moment_total on non-radial rhs");
  }

  // int_S^inf M(s) / (n s^{n-1}) ds, the analytic tail used when closing
  // improper integrals of ((s^n + M(s) + const)^{1/n} - s).
  double excess_moment_tail(int n, double S) const {
    if (n < 3)
      throw std::domain_error("excess_moment_tail: requires n >= 3");
    switch (kind_) {
      case RhsKind::constant:
        if (amplitude_ != 0.0)
          throw std::domain_error("excess_moment_tail: divergent (f != 1)");
        return 0.0;
      case RhsKind::radial_perturbation: {
        if (beta_ <= 2.0)
          throw std::domain_error("excess_moment_tail: divergent (beta <= 2)");
        const double a = amplitude_;
        if (std::fabs(beta_ - n) < 1e-12) {
          // M(s) = a n log s
          const double p = n - 2.0;
          return a * (std::log(S) / p + 1.0 / (p * p)) * std::pow(S, -p);
        }
        // M(s) = c1 s^{n-beta} + c2, c1 = a n/(n-beta), c2 = -c1
        const double c1 = a * n / (n - beta_);
        const double c2 = -c1;
        const double part1 = (c1 / n) * std::pow(S, 2.0 - beta_) / (beta_ - 2.0);
        const double part2 = (c2 / n) * std::pow(S, 2.0 - n) / (n - 2.0);
        return part1 + part2;
      }
      case RhsKind::sharpness:
        throw std::domain_error("excess_moment_tail: divergent (beta = 2)");
      case RhsKind::compact_bump: {
        const double M = excess_moment_total(n);
        return M / n * std::pow(S, 2.0 - n) / (n - 2.0);
      }
      case RhsKind::affine_pullback:
        break;
    }
    throw std::logic_error("excess_moment_tail on non-radial rhs");
  }

 private:
  RightHandSide() = default;

  RhsKind kind_ = RhsKind::constant;
  double beta_ = std::numeric_limits<double>::infinity();
  double c0_ = 1.0;
  double amplitude_ = 0.0;
  double center_ = 0.0;
  double width_ = 0.0;
  std::shared_ptr<const RightHandSide> base_;
  Matrix map_;
};

}  // namespace extma
