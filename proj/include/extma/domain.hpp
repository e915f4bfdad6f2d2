#pragma once

// Strictly convex inner obstacles: balls and ellipses/ellipsoids.

#include <Eigen/Dense>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "extma/rhs.hpp"

namespace extma {

enum class DomainKind { ball, ellipse };

struct BoundarySample {
  Vector point;
  Vector outward_normal;
  double curvature;  // 2-D: curvature of the boundary curve; 3-D: a lower
                     // bound on the principal curvatures at the point
};

class InnerDomain {
 public:
  static InnerDomain ball(int n, Vector center, double radius) {
    if (radius <= 0) throw std::invalid_argument("ball: radius <= 0");
    InnerDomain d;
    d.kind_ = DomainKind::ball;
    d.n_ = n;
    d.center_ = std::move(center);
    d.axes_ = Vector::Constant(n, radius);
    d.rotation_ = Matrix::Identity(n, n);
    return d;
  }

  // Axis lengths in the rotated frame. For n = 3 the rotation must be
  // identity (axis-aligned ellipsoids only).
  static InnerDomain ellipse(int n, Vector center, Vector semi_axes,
                             double angle = 0.0) {
    if (semi_axes.minCoeff() <= 0)
      throw std::invalid_argument("ellipse: nonpositive semi-axis");
    InnerDomain d;
    d.kind_ = DomainKind::ellipse;
    d.n_ = n;
    d.center_ = std::move(center);
    d.axes_ = std::move(semi_axes);
    d.rotation_ = Matrix::Identity(n, n);
    if (n == 2) {
      d.rotation_ << std::cos(angle), -std::sin(angle), std::sin(angle),
          std::cos(angle);
    } else if (angle != 0.0) {
      throw std::invalid_argument("ellipse: rotation supported for n = 2 only");
    }
    return d;
  }

  DomainKind kind() const { return kind_; }
  int n() const { return n_; }
  const Vector& center() const { return center_; }
  const Vector& semi_axes() const { return axes_; }

  // Radius rho of the largest origin-centered-at-center inscribed ball.
  double inradius() const { return axes_.minCoeff(); }

  // r_bar: D is contained in the origin-centered ball of this radius.
  double circumradius() const { return center_.norm() + axes_.maxCoeff(); }

  double curvature_lower_bound() const {
    const double amax = axes_.maxCoeff();
    return axes_.minCoeff() / (amax * amax);
  }

  // Level function q(x) = |scaled(x)|^2 - 1; negative inside.
  double level(const Vector& x) const {
    return scaled(x).squaredNorm() - 1.0;
  }

  bool contains(const Vector& x) const { return level(x) < 0.0; }

  // Signed distance, exact for balls; for ellipses a sign-correct surrogate
  // scaled by the smallest axis.
  double signed_distance(const Vector& x) const {
    const Vector s = scaled(x);
    const double rho = s.norm();
    if (kind_ == DomainKind::ball) return (rho - 1.0) * axes_[0];
    return (rho - 1.0) * inradius();
  }

  // Crossing of the boundary by the segment p -> q, as t in (0,1], or
  // nothing if the segment does not cross. Exact quadratic solve.
  std::optional<double> segment_crossing(const Vector& p,
                                         const Vector& q) const {
    const Vector a = scaled(p);
    const Vector b = scaled(q) - a;
    // |a + t b|^2 = 1
    const double A = b.squaredNorm();
    const double B = 2.0 * a.dot(b);
    const double C = a.squaredNorm() - 1.0;
    const double disc = B * B - 4.0 * A * C;
    if (A == 0.0 || disc < 0.0) return std::nullopt;
    const double sq = std::sqrt(disc);
    for (double t : {(-B - sq) / (2.0 * A), (-B + sq) / (2.0 * A)}) {
      if (t > 0.0 && t <= 1.0) return t;
    }
    return std::nullopt;
  }

  // Nearest-boundary surrogate: exact radial projection for balls, the
  // scaled-frame radial projection for ellipses (adequate near the boundary).
  Vector project_boundary(const Vector& x) const {
    Vector s = scaled(x);
    const double rho = s.norm();
    if (rho == 0.0) s[0] = 1.0; else s /= rho;
    return center_ + rotation_ * s.cwiseProduct(axes_);
  }

  // m boundary points with outward normals; uniform angles for n = 2, a
  // Fibonacci lattice for n = 3.
  std::vector<BoundarySample> boundary_samples(int m) const {
    std::vector<BoundarySample> out;
    out.reserve(m);
    if (n_ == 2) {
      for (int i = 0; i < m; ++i) {
        const double t = 2.0 * M_PI * i / m;
        out.push_back(at_angle(t));
      }
    } else {
      const double golden = M_PI * (3.0 - std::sqrt(5.0));
      for (int i = 0; i < m; ++i) {
        const double z = 1.0 - 2.0 * (i + 0.5) / m;
        const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double th = golden * i;
        Vector u(3);
        u << rad * std::cos(th), rad * std::sin(th), z;
        out.push_back(from_unit(u));
      }
    }
    return out;
  }

  BoundarySample at_angle(double t) const {
    Vector u(2);
    u << std::cos(t), std::sin(t);
    BoundarySample s = from_unit(u);
    const double a = axes_[0], b = axes_[1];
    const double sx = a * std::sin(t), cy = b * std::cos(t);
    s.curvature = a * b / std::pow(sx * sx + cy * cy, 1.5);
    return s;
  }

 private:
  Vector scaled(const Vector& x) const {
    Vector y = rotation_.transpose() * (x - center_);
    return y.cwiseQuotient(axes_);
  }

  BoundarySample from_unit(const Vector& u) const {
    BoundarySample s;
    s.point = center_ + rotation_ * u.cwiseProduct(axes_);
    Vector nrm = rotation_ * u.cwiseQuotient(axes_);
    s.outward_normal = nrm.normalized();
    s.curvature = curvature_lower_bound();
    return s;
  }

  DomainKind kind_ = DomainKind::ball;
  int n_ = 2;
  Vector center_;
  Vector axes_;
  Matrix rotation_;
};

}  // namespace extma
