#pragma once

// Monotone wide-stencil discretization of det(D^2 u): per-frame products of
// positive parts of directional second differences, penalized by negative
// parts, minimized over the frame list.

#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "extma/grid.hpp"

namespace extma {

// Centered second difference along direction d, scaled by (h|v|)^-2; legs
// shortened at boundary cuts use the exact nonuniform 3-point formula, which
// is exact on quadratics.
inline double second_difference(const Grid& g, const std::vector<double>& u,
                                const std::vector<double>& cut_values, int id,
                                int d) {
  const Grid::Leg fwd = g.leg(id, d, 0);
  const Grid::Leg bwd = g.leg(id, d, 1);
  const double uf = fwd.nb >= 0 ? u[fwd.nb] : cut_values[fwd.cut];
  const double ub = bwd.nb >= 0 ? u[bwd.nb] : cut_values[bwd.cut];
  const double a = fwd.nb >= 0 ? 1.0 : fwd.theta;
  const double b = bwd.nb >= 0 ? 1.0 : bwd.theta;
  const double scale = g.h() * g.h() * g.direction_len2()[d];
  return 2.0 * (b * uf + a * ub - (a + b) * u[id]) / (a * b * (a + b) * scale);
}

struct OperatorEval {
  double value = 0.0;
  int frame = 0;                          // argmin frame (lowest index tie)
  std::array<double, 3> delta = {0, 0, 0};  // second differences there
};

inline OperatorEval ma_eval(const Grid& g, const std::vector<double>& u,
                            const std::vector<double>& cut_values, int id) {
  const int n = g.n();
  const auto& frames = g.frames();
  // every direction belongs to at least one frame; computing per frame and
  // caching by direction index keeps duplicates cheap
  static thread_local std::vector<double> dd;
  dd.assign(g.directions().size(), std::numeric_limits<double>::quiet_NaN());
  OperatorEval best;
  best.value = std::numeric_limits<double>::infinity();
  for (size_t fi = 0; fi < frames.size(); ++fi) {
    std::array<double, 3> delta = {0, 0, 0};
    double prod = 1.0, pen = 0.0;
    for (int k = 0; k < n; ++k) {
      const int d = frames[fi].dir[k];
      if (std::isnan(dd[d])) dd[d] = second_difference(g, u, cut_values, id, d);
      delta[k] = dd[d];
      prod *= std::max(dd[d], 0.0);
      pen += std::min(dd[d], 0.0);
    }
    const double v = prod + pen;
    if (v < best.value) {
      best.value = v;
      best.frame = static_cast<int>(fi);
      best.delta = delta;
    }
  }
  return best;
}

inline double ma_operator(const Grid& g, const std::vector<double>& u,
                          const std::vector<double>& cut_values, int id) {
  return ma_eval(g, u, cut_values, id).value;
}

// Worst directional second difference over all nodes and directions; a
// converged convex solution keeps this above -tol_convex.
inline double discrete_convexity_min(const Grid& g,
                                     const std::vector<double>& u,
                                     const std::vector<double>& cut_values) {
  double worst = std::numeric_limits<double>::infinity();
  const int nd = static_cast<int>(g.directions().size());
  for (int id = 0; id < g.num_nodes(); ++id)
    for (int d = 0; d < nd; ++d)
      worst = std::min(worst, second_difference(g, u, cut_values, id, d));
  return worst;
}

}  // namespace extma
