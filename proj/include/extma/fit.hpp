#pragma once

// Far-field recovery: least-squares fit of samples against the quadratic
// expansion basis, per-annulus residuals, and decay-exponent estimation.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "extma/radial_profile.hpp"
#include "extma/solver.hpp"

namespace extma {

struct Sample {
  Vector x;
  double u = 0.0;
};

struct AnnulusResidual {
  double r = 0.0;    // representative radius (geometric midpoint)
  double rho = 0.0;  // max |u - fit| over the annulus
};

struct ExpansionFit {
  int n = 2;
  Matrix A;
  Vector b;
  double c = 0.0;
  double d = 0.0;  // log coefficient (n = 2 with include_log)
  bool has_log = false;

  double det_A = 0.0;
  bool det_flagged = false;      // |det A - 1| > 1e-3
  bool negative_definite = false;

  std::vector<AnnulusResidual> annuli;
  double sigma_hat = 0.0;
  double sigma_halfwidth = 0.0;  // 2x standard error of the log-log slope
  double r_min = 0.0, r_max = 0.0;  // window used for the coefficient fit
};

namespace detail {

// dyadic annulus index relative to the smallest sample radius
inline int annulus_of(double r, double r_base) {
  return static_cast<int>(std::floor(std::log2(r / r_base) + 1e-12));
}

struct SlopeFit {
  double slope = 0.0, intercept = 0.0, halfwidth = 0.0;
};

inline SlopeFit line_fit(const std::vector<double>& xs,
                         const std::vector<double>& ys) {
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  const double det = m * sxx - sx * sx;
  if (det <= 0.0) throw std::runtime_error("line_fit: degenerate abscissae");
  SlopeFit out;
  out.slope = (m * sxy - sx * sy) / det;
  out.intercept = (sy - out.slope * sx) / m;
  if (xs.size() > 2) {
    double sse = 0.0, sxc = 0.0;
    const double xbar = sx / m;
    for (size_t i = 0; i < xs.size(); ++i) {
      const double e = ys[i] - out.slope * xs[i] - out.intercept;
      sse += e * e;
      sxc += (xs[i] - xbar) * (xs[i] - xbar);
    }
    out.halfwidth = 2.0 * std::sqrt(sse / ((m - 2.0) * sxc));
  }
  return out;
}

}  // namespace detail

// Least squares of u against {x_i x_j (i <= j), x_i, 1, log|x|?} over the
// outermost half of the dyadic annuli; residual maxima reported per annulus.
inline ExpansionFit fit_far_field(const std::vector<Sample>& samples, int n,
                                  bool include_log = false) {
  if (include_log && n != 2)
    throw std::invalid_argument("fit_far_field: log term is n = 2 only");
  if (samples.empty()) throw std::invalid_argument("fit_far_field: no samples");

  double r_base = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) r_base = std::min(r_base, s.x.norm());
  if (!(r_base > 0.0))
    throw std::invalid_argument("fit_far_field: sample at the origin");

  int max_ann = 0;
  std::vector<int> ann(samples.size());
  for (size_t i = 0; i < samples.size(); ++i) {
    ann[i] = detail::annulus_of(samples[i].x.norm(), r_base);
    max_ann = std::max(max_ann, ann[i]);
  }
  const int K = max_ann + 1;
  std::vector<int> counts(K, 0);
  for (int a : ann) ++counts[a];
  int populated = 0;
  for (int c : counts)
    if (c >= 30) ++populated;
  if (populated < 3)
    throw std::invalid_argument(
        "fit_far_field: need >= 3 dyadic annuli with >= 30 samples each");

  // coefficient fit over the outermost half of the annuli
  const int first_fit = K / 2;
  const int nq = n * (n + 1) / 2;
  const int ncols = nq + n + 1 + (include_log ? 1 : 0);
  std::vector<int> rows;
  for (size_t i = 0; i < samples.size(); ++i)
    if (ann[i] >= first_fit) rows.push_back(static_cast<int>(i));
  if (static_cast<int>(rows.size()) < 2 * ncols)
    throw std::invalid_argument("fit_far_field: too few far samples");

  Eigen::MatrixXd M(rows.size(), ncols);
  Eigen::VectorXd rhs(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    const Vector& x = samples[rows[r]].x;
    int col = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) M(r, col++) = x[i] * x[j];
    for (int i = 0; i < n; ++i) M(r, col++) = x[i];
    M(r, col++) = 1.0;
    if (include_log) M(r, col++) = std::log(x.norm());
    rhs[r] = samples[rows[r]].u;
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  qr.setThreshold(1e-10);
  if (qr.rank() < ncols)
    throw std::runtime_error(
        "fit_far_field: rank-deficient normal equations (degenerate sample "
        "geometry)");
  Eigen::VectorXd coef = qr.solve(rhs);

  ExpansionFit fit;
  fit.n = n;
  fit.has_log = include_log;
  fit.A = Matrix::Zero(n, n);
  fit.b = Vector::Zero(n);
  {
    int col = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) {
        if (i == j) {
          fit.A(i, i) = 2.0 * coef[col];
        } else {
          fit.A(i, j) = fit.A(j, i) = coef[col];
        }
        ++col;
      }
    for (int i = 0; i < n; ++i) fit.b[i] = coef[col++];
    fit.c = coef[col++];
    if (include_log) fit.d = coef[col++];
  }
  fit.det_A = fit.A.determinant();
  fit.det_flagged = std::fabs(fit.det_A - 1.0) > 1e-3;
  {
    Eigen::SelfAdjointEigenSolver<Matrix> es(fit.A);
    fit.negative_definite = es.eigenvalues().maxCoeff() < 0.0;
  }

  // residuals on every annulus
  std::vector<double> rho(K, 0.0), rlo(K, 1e300), rhi(K, 0.0);
  for (size_t i = 0; i < samples.size(); ++i) {
    const Vector& x = samples[i].x;
    double pred = 0.5 * x.dot(fit.A * x) + fit.b.dot(x) + fit.c;
    if (include_log) pred += fit.d * std::log(x.norm());
    rho[ann[i]] = std::max(rho[ann[i]], std::fabs(samples[i].u - pred));
    rlo[ann[i]] = std::min(rlo[ann[i]], x.norm());
    rhi[ann[i]] = std::max(rhi[ann[i]], x.norm());
  }
  for (int a = 0; a < K; ++a) {
    if (counts[a] == 0) continue;
    AnnulusResidual ar;
    ar.r = std::sqrt(rlo[a] * rhi[a]);
    ar.rho = rho[a];
    fit.annuli.push_back(ar);
  }

  fit.r_min = r_base * std::pow(2.0, first_fit);
  fit.r_max = r_base * std::pow(2.0, K);

  // Decay slope from the annuli below the coefficient window: inside the
  // window the residual is a least-squares artifact, and the annulus touching
  // the window is contaminated by coefficient leakage, so it is dropped when
  // enough annuli remain.
  std::vector<double> lx, ly;
  for (const auto& ar : fit.annuli)
    if (ar.rho > 0.0 && ar.r < fit.r_min) {
      lx.push_back(std::log(ar.r));
      ly.push_back(std::log(ar.rho));
    }
  if (lx.size() >= 3) {
    lx.pop_back();
    ly.pop_back();
  }
  if (lx.size() < 2) {
    lx.clear();
    ly.clear();
    for (const auto& ar : fit.annuli)
      if (ar.rho > 0.0) {
        lx.push_back(std::log(ar.r));
        ly.push_back(std::log(ar.rho));
      }
  }
  if (lx.size() >= 2) {
    const auto sf = detail::line_fit(lx, ly);
    fit.sigma_hat = -sf.slope;
    fit.sigma_halfwidth = sf.halfwidth;
  }
  return fit;
}

struct RateReport {
  ExpansionFit fit;
  double sigma_expected = 0.0;
  double tolerance = 0.15;
  bool conclusive = false;
  bool pass = false;
  std::string note;
  // k = 1 clause (radial profiles only): decay exponent of u' - r
  bool k1_checked = false;
  double k1_sigma_hat = 0.0;
  bool k1_pass = false;
};

namespace detail {

// deterministic direction set: uniform angles (n = 2) or a Fibonacci
// lattice (n = 3)
inline std::vector<Vector> sphere_directions(int n, int m) {
  std::vector<Vector> out;
  out.reserve(m);
  if (n == 2) {
    for (int i = 0; i < m; ++i) {
      const double t = 2.0 * M_PI * i / m;
      Vector v(2);
      v << std::cos(t), std::sin(t);
      out.push_back(v);
    }
  } else {
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < m; ++i) {
      const double z = 1.0 - 2.0 * (i + 0.5) / m;
      const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
      Vector v(3);
      v << rad * std::cos(golden * i), rad * std::sin(golden * i), z;
      out.push_back(v);
    }
  }
  return out;
}

inline std::vector<Sample> profile_samples(const RadialProfile& prof,
                                           double r_lo, double r_hi,
                                           int n_radii = 64, int n_dirs = 24) {
  std::vector<Sample> out;
  const auto dirs = sphere_directions(prof.n(), n_dirs);
  for (int i = 0; i < n_radii; ++i) {
    const double r =
        r_lo * std::pow(r_hi / r_lo, (i + 0.5) / n_radii);
    const double u = prof.value(r);
    for (const auto& v : dirs) out.push_back({r * v, u});
  }
  return out;
}

}  // namespace detail

// Rate check on a radial oracle profile: sigma_hat within +-0.05 of the
// expected min{beta, n} - 2, plus the gradient-rate clause on u' - r. The
// decay ladder lives at r <= 1e3; the coefficient window extends further out
// so its leakage does not pollute the ladder.
inline RateReport verify_rate(const RadialProfile& prof, double expected_sigma,
                              double r_hi = 8e3) {
  RateReport rep;
  rep.sigma_expected = expected_sigma;
  rep.tolerance = 0.05;
  r_hi = std::min(r_hi, prof.r_max());
  // start the ladder where the profile is in its asymptotic regime: large
  // shooting parameters push u' away from r well beyond r0
  double r_lo = prof.r0() + 1.0;
  for (double r : prof.grid()) {
    if (r < r_lo) continue;
    if (std::fabs(prof.derivative(r) / r - 1.0) <= 0.1) break;
    r_lo = std::min(r, r_hi / 32.0);
  }
  if (r_hi / r_lo < 4.0) {
    rep.note = "fit window narrower than 2 dyadic annuli";
    return rep;
  }
  try {
    rep.fit = fit_far_field(detail::profile_samples(prof, r_lo, r_hi, 128),
                            prof.n(), prof.n() == 2);
  } catch (const std::invalid_argument& e) {
    rep.note = e.what();
    return rep;
  }
  rep.conclusive = true;
  rep.pass = std::fabs(rep.fit.sigma_hat - expected_sigma) <= rep.tolerance;

  // k = 1: u'(r) - r decays one order faster; fitted on the outer half of
  // the log range where subleading terms are negligible
  {
    std::vector<double> lx, ly;
    const double k1_lo = std::sqrt(r_lo * r_hi);
    for (int i = 0; i < 48; ++i) {
      const double r = k1_lo * std::pow(r_hi / k1_lo, (i + 0.5) / 48.0);
      const double g = std::fabs(prof.derivative(r) - r);
      if (g > 1e-300) {
        lx.push_back(std::log(r));
        ly.push_back(std::log(g));
      }
    }
    if (lx.size() >= 8) {
      const auto sf = detail::line_fit(lx, ly);
      rep.k1_checked = true;
      rep.k1_sigma_hat = -sf.slope;
      rep.k1_pass =
          std::fabs(rep.k1_sigma_hat - (expected_sigma + 1.0)) <= rep.tolerance;
      rep.pass = rep.pass && rep.k1_pass;
    }
  }
  return rep;
}

// Rate check on a grid solution; the window stays inside |x| <= R_out / 2 to
// dodge truncation pollution. Fewer than 3 usable dyadic annuli gives an
// inconclusive (not failed) report.
inline RateReport verify_rate(const ProblemSpec& p, const DiscreteSolution& sol,
                              double expected_sigma) {
  RateReport rep;
  rep.sigma_expected = expected_sigma;
  rep.tolerance = 0.15;
  const Grid& g = *sol.grid;
  const double r_hi = g.R() / 2.0;
  const double r_lo = p.domain ? 1.2 * p.domain->circumradius() : r_hi / 8.0;
  std::vector<Sample> samples;
  for (int i = 0; i < g.num_nodes(); ++i) {
    const double r = g.point(i).norm();
    if (r >= r_lo && r <= r_hi) samples.push_back({g.point(i), sol.values[i]});
  }
  try {
    rep.fit = fit_far_field(samples, p.n, p.n == 2);
  } catch (const std::invalid_argument& e) {
    rep.note = e.what();
    return rep;
  }
  rep.conclusive = true;
  rep.pass = std::fabs(rep.fit.sigma_hat - expected_sigma) <= rep.tolerance;
  return rep;
}

struct GrowthReport {
  double lead_coeff = 0.0;    // log r (n >= 3) or (log r)^2 (n = 2)
  double log_coeff = 0.0;     // log r coefficient when n = 2
  double max_residual = 0.0;  // after removing the fitted correction
  bool unbounded = false;     // verdict: no constant-c expansion
};

// Growth of w = u - r^2/2 over r in [1e2, 1e4]: log-order corrections mean
// the constant-c far-field expansion fails.
inline GrowthReport sharpness_growth(const RadialProfile& prof, int n) {
  if (prof.n() != n) throw std::invalid_argument("sharpness_growth: n mismatch");
  const double r_lo = 1e2, r_hi = std::min(1e4, prof.r_max());
  if (r_hi < 2.0 * r_lo)
    throw std::invalid_argument("sharpness_growth: profile grid too short");

  std::vector<double> rs, ws;
  const auto& gr = prof.grid();
  for (size_t i = 0; i < gr.size(); ++i)
    if (gr[i] >= r_lo && gr[i] <= r_hi) {
      rs.push_back(gr[i]);
      ws.push_back(prof.values()[i] - 0.5 * gr[i] * gr[i]);
    }

  const int ncols = n == 2 ? 3 : 2;  // {(log r)^2?, log r, 1}
  Eigen::MatrixXd M(rs.size(), ncols);
  Eigen::VectorXd y(rs.size());
  for (size_t i = 0; i < rs.size(); ++i) {
    const double L = std::log(rs[i]);
    int col = 0;
    if (n == 2) M(i, col++) = L * L;
    M(i, col++) = L;
    M(i, col++) = 1.0;
    y[i] = ws[i];
  }
  Eigen::VectorXd coef = M.colPivHouseholderQr().solve(y);

  GrowthReport rep;
  if (n == 2) {
    rep.lead_coeff = coef[0];
    rep.log_coeff = coef[1];
  } else {
    rep.lead_coeff = coef[0];
  }
  Eigen::VectorXd resid = y - M * coef;
  rep.max_residual = resid.cwiseAbs().maxCoeff();
  rep.unbounded = std::fabs(rep.lead_coeff) > 1e-3;
  return rep;
}

}  // namespace extma
