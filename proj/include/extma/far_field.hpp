#pragma once

// Target expansion data at infinity: u ~ 1/2 x'Ax + b.x + c (+ d log sqrt(x'Ax)).

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>

#include "extma/rhs.hpp"

namespace extma {

class QuadraticFarField {
 public:
  QuadraticFarField(int n, Matrix A, Vector b, double c, double d = 0.0)
      : n_(n), A_(std::move(A)), b_(std::move(b)), c_(c), d_(d) {
    if (n != 2 && n != 3) throw std::invalid_argument("dimension must be 2 or 3");
    if (A_.rows() != n || A_.cols() != n || b_.size() != n)
      throw std::invalid_argument("far field: shape mismatch");
    if ((A_ - A_.transpose()).cwiseAbs().maxCoeff() > 1e-12)
      throw std::invalid_argument("far field: A not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> es(A_);
    if (es.eigenvalues().minCoeff() <= 0.0)
      throw std::invalid_argument("far field: A not positive definite");
    if (std::fabs(A_.determinant() - 1.0) > 1e-12)
      throw std::invalid_argument("far field: det(A) != 1");
    if (n == 3 && d != 0.0)
      throw std::invalid_argument("far field: log coefficient requires n = 2");
  }

  static QuadraticFarField identity(int n, double c = 0.0, double d = 0.0) {
    return QuadraticFarField(n, Matrix::Identity(n, n), Vector::Zero(n), c, d);
  }

  int n() const { return n_; }
  const Matrix& A() const { return A_; }
  const Vector& b() const { return b_; }
  double c() const { return c_; }
  double d() const { return d_; }

  double evaluate(const Vector& x) const {
    const double q = x.dot(A_ * x);
    double v = 0.5 * q + b_.dot(x) + c_;
    if (d_ != 0.0) v += d_ * 0.5 * std::log(q);
    return v;
  }

  Vector gradient(const Vector& x) const {
    Vector g = A_ * x + b_;
    if (d_ != 0.0) g += d_ / x.dot(A_ * x) * (A_ * x);
    return g;
  }

 private:
  int n_;
  Matrix A_;
  Vector b_;
  double c_;
  double d_;
};

}  // namespace extma
