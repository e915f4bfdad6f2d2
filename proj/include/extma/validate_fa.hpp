#pragma once

// Finite surrogate for the decay condition on f: boundedness of
// |x|^{beta+k} |D^k(f-1)| on a geometric radius ladder, k = 0..3.

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "extma/rhs.hpp"

namespace extma {

struct FAReport {
  double beta;
  std::vector<double> radii;
  // suprema[k][j]: sup over the sphere of radius radii[j] of
  // |x|^{beta+k} |D^k(f-1)|
  std::vector<std::vector<double>> suprema;
  std::vector<bool> pass_k;
  bool pass = true;
  std::string message;
};

inline std::vector<double> geometric_ladder(double lo, double hi, double ratio = 2.0) {
  std::vector<double> r;
  for (double v = lo; v <= hi * (1.0 + 1e-12); v *= ratio) r.push_back(v);
  return r;
}

namespace detail {

// Growth across the last rungs: flag a failure when the weighted suprema
// increase monotonically and by a nontrivial factor.
inline bool bounded_trend(const std::vector<double>& sup) {
  const size_t m = sup.size();
  const size_t look = std::min<size_t>(5, m);
  if (look < 2) return true;
  bool increasing = true;
  for (size_t i = m - look + 1; i < m; ++i)
    if (sup[i] <= sup[i - 1]) increasing = false;
  if (!increasing) return true;
  if (sup[m - 1] < 1e-10) return true;
  return sup[m - 1] <= 1.05 * sup[m - look];
}

}  // namespace detail

inline FAReport validate_fa(const RightHandSide& f, double beta,
                            const std::vector<double>& radii, int k_max = 3,
                            int samples_per_sphere = 32,
                            unsigned long seed = 42) {
  if (k_max < 0 || k_max > 3) throw std::invalid_argument("validate_fa: k_max in 0..3");
  if (radii.empty() || radii.front() < 2.0)
    throw std::invalid_argument("validate_fa: radii must start at >= 2");
  for (size_t i = 1; i < radii.size(); ++i)
    if (radii[i] <= radii[i - 1])
      throw std::invalid_argument("validate_fa: radii must be increasing");

  FAReport rep;
  rep.beta = beta;
  rep.radii = radii;
  rep.suprema.assign(k_max + 1, std::vector<double>(radii.size(), 0.0));

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  const int dim =
      f.radial() ? 3 : static_cast<int>(f.pullback_map().cols());

  for (size_t j = 0; j < radii.size(); ++j) {
    const double r = radii[j];
    if (f.radial()) {
      if (f.radial_value(r) <= 0.0)
        throw std::runtime_error("validate_fa: nonpositive f at r=" + std::to_string(r));
      rep.suprema[0][j] = std::pow(r, beta) * std::fabs(f.radial_excess(r));
      for (int k = 1; k <= k_max; ++k)
        rep.suprema[k][j] =
            std::pow(r, beta + k) * std::fabs(f.radial_excess_deriv(r, k));
    } else {
      const double h = r * 1e-4;
      for (int s = 0; s < samples_per_sphere; ++s) {
        Vector x(dim);
        for (int i = 0; i < x.size(); ++i) x[i] = gauss(rng);
        x *= r / x.norm();
        if (1.0 + f.excess(x) <= 0.0)
          throw std::runtime_error("validate_fa: nonpositive f sample");
        Vector u(x.size());
        for (int i = 0; i < u.size(); ++i) u[i] = gauss(rng);
        u.normalize();
        auto e = [&](double t) { return f.excess(x + t * u); };
        double dk[4];
        dk[0] = std::fabs(e(0.0));
        dk[1] = std::fabs((e(h) - e(-h)) / (2.0 * h));
        dk[2] = std::fabs((e(h) - 2.0 * e(0.0) + e(-h)) / (h * h));
        dk[3] = std::fabs((e(2 * h) - 2.0 * e(h) + 2.0 * e(-h) - e(-2 * h)) /
                          (2.0 * h * h * h));
        for (int k = 0; k <= k_max; ++k)
          rep.suprema[k][j] =
              std::max(rep.suprema[k][j], std::pow(r, beta + k) * dk[k]);
      }
    }
  }

  rep.pass_k.resize(k_max + 1);
  for (int k = 0; k <= k_max; ++k) {
    rep.pass_k[k] = detail::bounded_trend(rep.suprema[k]);
    if (!rep.pass_k[k]) {
      rep.pass = false;
      rep.message += "k=" + std::to_string(k) + " suprema grow; ";
    }
  }
  return rep;
}

}  // namespace extma
