#pragma once

// Cartesian lattice over a truncated exterior (or full-ball) domain with
// wide-stencil direction sets and exact cut-cell boundary crossings.

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <vector>

#include "extma/domain.hpp"

namespace extma {

enum class NodeClass { interior, near_inner, near_outer, near_both };

// n mutually orthogonal integer directions; for n = 2 a primitive direction
// and its exact perpendicular, for n = 3 one of a fixed list of orthogonal
// frames.
struct StencilFrame {
  std::array<int, 3> dir = {0, 0, 0};  // indices into the direction table
};

class Grid {
 public:
  struct Leg {
    int nb = -1;         // compact neighbor id, or -1 for a boundary cut
    double theta = 1.0;  // sub-step fraction when cut
    int cut = -1;        // index into cuts() when nb < 0
  };

  struct Cut {
    Vector point;  // exact boundary crossing
    bool inner;    // true: inner obstacle, false: truncation sphere
  };

  Grid(int n, double h, double R_out, std::optional<InnerDomain> inner,
       int W = 0)
      : n_(n), h_(h), R_(R_out), inner_(std::move(inner)) {
    if (n != 2 && n != 3) throw std::invalid_argument("Grid: n in {2,3}");
    if (h <= 0 || R_out <= 0) throw std::invalid_argument("Grid: h, R > 0");
    const double steps = 2.0 * R_out / h;
    if (std::fabs(steps - std::round(steps)) > 1e-9)
      throw std::invalid_argument("Grid: 2 R / h must be an integer");
    per_axis_ = static_cast<int>(std::round(steps)) + 1;
    if (inner_ && inner_->n() != n)
      throw std::invalid_argument("Grid: inner domain dimension");

    if (n == 2) {
      W_ = W > 0 ? W : 5;
      build_pairs_2d();
    } else {
      W_ = W > 0 ? W : 2;
      build_frames_3d();
    }
    build_nodes();
    build_legs();
  }

  int n() const { return n_; }
  int W() const { return W_; }
  double h() const { return h_; }
  double R() const { return R_; }
  const std::optional<InnerDomain>& inner() const { return inner_; }
  int num_nodes() const { return static_cast<int>(flat_of_node_.size()); }
  int num_shallow() const { return static_cast<int>(shallow_nodes_.size()); }

  const std::vector<std::array<int, 3>>& directions() const { return dirs_; }
  const std::vector<double>& direction_len2() const { return dir_len2_; }
  const std::vector<StencilFrame>& frames() const { return frames_; }
  const std::vector<Cut>& cuts() const { return cuts_; }

  Vector point(int id) const {
    Vector x(n_);
    long f = flat_of_node_[id];
    for (int i = 0; i < n_; ++i) {
      x[i] = -R_ + h_ * (f % per_axis_);
      f /= per_axis_;
    }
    return x;
  }

  bool deep(int id) const { return shallow_of_node_[id] < 0; }

  NodeClass node_class(int id) const {
    const int s = shallow_of_node_[id];
    if (s < 0) return NodeClass::interior;
    bool in = false, out = false;
    const int nd = static_cast<int>(dirs_.size());
    for (int l = 0; l < 2 * nd; ++l) {
      const Leg& leg = legs_[static_cast<size_t>(s) * 2 * nd + l];
      if (leg.nb < 0) (cuts_[leg.cut].inner ? in : out) = true;
    }
    if (in && out) return NodeClass::near_both;
    return in ? NodeClass::near_inner : NodeClass::near_outer;
  }

  // Leg for (node, direction d, orientation o): o = 0 forward (+v), 1
  // backward (-v). Deep nodes resolve through lattice strides.
  Leg leg(int id, int d, int o) const {
    const int s = shallow_of_node_[id];
    if (s >= 0)
      return legs_[static_cast<size_t>(s) * 2 * dirs_.size() + 2 * d + o];
    Leg l;
    l.nb = idmap_[flat_of_node_[id] +
                  (o == 0 ? dir_stride_[d] : -dir_stride_[d])];
    return l;
  }

 private:
  void build_pairs_2d() {
    auto add_dir = [&](int p, int q) {
      dirs_.push_back({p, q, 0});
      dir_len2_.push_back(double(p) * p + double(q) * q);
      return static_cast<int>(dirs_.size()) - 1;
    };
    // primitive (p,q) with angle in [0, pi/2) paired with (-q, p)
    for (int p = 1; p <= W_; ++p)
      for (int q = 0; q <= W_; ++q) {
        if (std::gcd(p, q) != 1) continue;
        StencilFrame fr;
        fr.dir[0] = add_dir(p, q);
        fr.dir[1] = add_dir(-q, p);
        frames_.push_back(fr);
      }
  }

  void build_frames_3d() {
    auto add = [&](std::array<int, 3> a, std::array<int, 3> b,
                   std::array<int, 3> c) {
      auto dot = [](const std::array<int, 3>& u, const std::array<int, 3>& v) {
        return u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
      };
      if (dot(a, b) || dot(a, c) || dot(b, c))
        throw std::logic_error("frame not orthogonal");
      StencilFrame fr;
      const std::array<std::array<int, 3>, 3> vs = {a, b, c};
      for (int i = 0; i < 3; ++i) {
        dirs_.push_back(vs[i]);
        dir_len2_.push_back(double(vs[i][0]) * vs[i][0] +
                            double(vs[i][1]) * vs[i][1] +
                            double(vs[i][2]) * vs[i][2]);
        fr.dir[i] = static_cast<int>(dirs_.size()) - 1;
      }
      frames_.push_back(fr);
    };
    add({1, 0, 0}, {0, 1, 0}, {0, 0, 1});
    add({1, 1, 0}, {1, -1, 0}, {0, 0, 1});
    add({1, 0, 1}, {1, 0, -1}, {0, 1, 0});
    add({0, 1, 1}, {0, 1, -1}, {1, 0, 0});
    add({1, 1, 1}, {1, -1, 0}, {1, 1, -2});
    add({1, 1, -1}, {1, -1, 0}, {1, 1, 2});
    add({1, -1, 1}, {1, 1, 0}, {1, -1, -2});
    add({1, -1, -1}, {1, 1, 0}, {1, -1, 2});
    add({2, 1, 0}, {1, -2, 0}, {0, 0, 1});
    add({1, 2, 0}, {2, -1, 0}, {0, 0, 1});
    add({2, 0, 1}, {1, 0, -2}, {0, 1, 0});
    add({0, 2, 1}, {0, 1, -2}, {1, 0, 0});
    add({1, 0, 2}, {2, 0, -1}, {0, 1, 0});
  }

  // Nodes hugging a boundary closer than a small fraction of h are dropped;
  // their neighbors then carry cut legs slightly longer than one step, which
  // keeps the sub-step fractions bounded away from zero.
  bool active_point(const Vector& x) const {
    const double margin = 0.01 * h_;
    if (x.norm() >= R_ - margin) return false;
    if (inner_ && inner_->signed_distance(x) <= margin) return false;
    return true;
  }

  void build_nodes() {
    long total = 1;
    for (int i = 0; i < n_; ++i) total *= per_axis_;
    idmap_.assign(total, -1);
    Vector x(n_);
    for (long f = 0; f < total; ++f) {
      long r = f;
      for (int i = 0; i < n_; ++i) {
        x[i] = -R_ + h_ * (r % per_axis_);
        r /= per_axis_;
      }
      if (active_point(x)) {
        idmap_[f] = static_cast<int>(flat_of_node_.size());
        flat_of_node_.push_back(f);
      }
    }
    dir_stride_.resize(dirs_.size());
    for (size_t d = 0; d < dirs_.size(); ++d) {
      long s = 0, mul = 1;
      for (int i = 0; i < n_; ++i) {
        s += dirs_[d][i] * mul;
        mul *= per_axis_;
      }
      dir_stride_[d] = s;
    }
  }

  // The neighbor lattice point may fall outside the box; the outer sphere
  // crossing still exists because active nodes lie strictly inside it.
  Leg make_leg(const Vector& x, int d, int o) {
    Leg l;
    Vector step(n_);
    for (int i = 0; i < n_; ++i)
      step[i] = (o == 0 ? 1.0 : -1.0) * h_ * dirs_[d][i];
    const Vector y = x + step;

    bool in_box = true;
    for (int i = 0; i < n_; ++i)
      if (y[i] < -R_ - 1e-12 || y[i] > R_ + 1e-12) in_box = false;
    if (in_box && active_point(y)) {
      long f = 0, mul = 1;
      for (int i = 0; i < n_; ++i) {
        f += static_cast<long>(std::llround((y[i] + R_) / h_)) * mul;
        mul *= per_axis_;
      }
      l.nb = idmap_[f];
      if (l.nb >= 0) return l;
    }

    // boundary cut: earliest crossing among inner obstacle and sphere; the
    // search segment extends 25% past the neighbor because nodes within the
    // activity margin were dropped while still inside the true domain
    const double extend = 1.25;
    const Vector y_ext = x + extend * step;
    double theta = 2.0;
    bool is_inner = false;
    if (inner_) {
      if (auto t = inner_->segment_crossing(x, y_ext); t && *t * extend < theta) {
        theta = *t * extend;
        is_inner = true;
      }
    }
    {
      auto sphere = InnerDomain::ball(n_, Vector::Zero(n_), R_);
      if (auto t = sphere.segment_crossing(x, y_ext); t && *t * extend < theta) {
        theta = *t * extend;
        is_inner = false;
      }
    }
    Cut c;
    if (theta <= extend + 1e-12) {
      c.point = x + theta * step;
      c.inner = is_inner;
    } else if (inner_ && inner_->signed_distance(y) <= 0.01 * h_ &&
               inner_->signed_distance(y) > -0.01 * h_) {
      // grazing leg: the neighbor sits in the activity margin without the
      // segment touching the boundary; project it on and absorb the O(h/100)
      // perturbation
      theta = 1.0;
      c.point = inner_->project_boundary(y);
      c.inner = true;
    } else if (y.norm() >= R_ - 0.01 * h_) {
      theta = 1.0;
      c.point = (R_ / y.norm()) * y;
      c.inner = false;
    } else {
      throw std::logic_error("Grid: inactive neighbor without a crossing");
    }
    l.nb = -1;
    l.theta = theta;
    l.cut = static_cast<int>(cuts_.size());
    cuts_.push_back(std::move(c));
    return l;
  }

  void build_legs() {
    const int nd = static_cast<int>(dirs_.size());
    shallow_of_node_.assign(num_nodes(), -1);
    for (int id = 0; id < num_nodes(); ++id) {
      const Vector x = point(id);
      std::vector<Leg> local(2 * nd);
      bool shallow = false;
      const size_t cuts_before = cuts_.size();
      for (int d = 0; d < nd; ++d)
        for (int o = 0; o < 2; ++o) {
          local[2 * d + o] = make_leg(x, d, o);
          if (local[2 * d + o].nb < 0) shallow = true;
        }
      if (shallow) {
        shallow_of_node_[id] = static_cast<int>(shallow_nodes_.size());
        shallow_nodes_.push_back(id);
        legs_.insert(legs_.end(), local.begin(), local.end());
      } else {
        cuts_.resize(cuts_before);  // none were cut; nothing was added
      }
    }
  }

  int n_, W_ = 5;
  double h_, R_;
  std::optional<InnerDomain> inner_;
  int per_axis_ = 0;

  std::vector<std::array<int, 3>> dirs_;
  std::vector<double> dir_len2_;
  std::vector<StencilFrame> frames_;
  std::vector<long> dir_stride_;

  std::vector<int> idmap_;
  std::vector<long> flat_of_node_;
  std::vector<int> shallow_of_node_;
  std::vector<int> shallow_nodes_;
  std::vector<Leg> legs_;
  std::vector<Cut> cuts_;
};

}  // namespace extma
