#pragma once

// Dirichlet solves for det(D^2 u) = f on truncated exterior domains and
// balls: monotone sweeps from a sub- or supersolution, then damped Newton on
// the active-frame linearization.

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>
#include <chrono>
#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "extma/ma_operator.hpp"
#include "extma/problem.hpp"
#include "extma/radial_profile.hpp"

namespace extma {

enum class InitMode { subsolution, supersolution, custom };

inline std::string to_string(InitMode m) {
  switch (m) {
    case InitMode::subsolution: return "subsolution";
    case InitMode::supersolution: return "supersolution";
    case InitMode::custom: return "custom";
  }
  return "?";
}

struct SolverOptions {
  double tol = 1e-8;
  int max_sweeps = 100;       // phase 1 budget
  int max_newton = 50;        // phase 2 budget
  int max_halvings = 30;
  double diag_floor = 1e-12;
  // nondecrease slack per sweep, as a multiple of tau: the initial iterate
  // is a continuum subsolution, discrete only up to consistency error
  double monotone_slack_rate = 0.0;  // 0: use 10 (h^2 + W^-2) c0
};

struct DiscreteSolution {
  std::shared_ptr<const Grid> grid;
  std::vector<double> values;
  std::vector<double> cut_values;
  std::vector<double> residual_history;
  int sweeps = 0;
  int newton_steps = 0;
  double wall_time = 0.0;
  double tol = 0.0;
  InitMode init = InitMode::custom;

  double final_residual() const {
    return residual_history.empty() ? std::numeric_limits<double>::infinity()
                                    : residual_history.back();
  }
  double convexity_min() const {
    return discrete_convexity_min(*grid, values, cut_values);
  }
};

namespace detail {

inline void residual_vector(const Grid& g, const std::vector<double>& u,
                            const std::vector<double>& cut_values,
                            const std::vector<double>& fvals,
                            std::vector<double>& out) {
  const int N = g.num_nodes();
  out.resize(N);
  for (int i = 0; i < N; ++i)
    out[i] = ma_operator(g, u, cut_values, i) - fvals[i];
}

inline double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

}  // namespace detail

// Dirichlet solve on the grid's domain. Boundary data comes from the
// problem: phi on the inner obstacle, the far-field quadratic on the
// truncation sphere; either can be overridden (e.g. with radial oracle
// values for convergence studies).
inline DiscreteSolution solve_dirichlet(
    const ProblemSpec& p, std::shared_ptr<const Grid> grid, InitMode mode,
    const std::function<double(const Vector&)>& init_fn,
    SolverOptions opt = {},
    std::function<double(const Vector&)> inner_override = nullptr,
    std::function<double(const Vector&)> outer_override = nullptr) {
  const auto t_start = std::chrono::steady_clock::now();
  const Grid& g = *grid;
  const int N = g.num_nodes();
  if (!init_fn) throw std::invalid_argument("solve_dirichlet: init required");

  DiscreteSolution sol;
  sol.grid = grid;
  sol.init = mode;
  sol.tol = opt.tol;

  // bake boundary values and f
  std::function<double(const Vector&)> inner_fn =
      inner_override ? inner_override
                     : [&p](const Vector& x) { return p.phi(x); };
  std::function<double(const Vector&)> outer_fn =
      outer_override ? outer_override
                     : [&p](const Vector& x) { return p.far_field.evaluate(x); };
  sol.cut_values.resize(g.cuts().size());
  for (size_t i = 0; i < g.cuts().size(); ++i)
    sol.cut_values[i] = g.cuts()[i].inner ? inner_fn(g.cuts()[i].point)
                                          : outer_fn(g.cuts()[i].point);

  std::vector<double> fvals(N);
  for (int i = 0; i < N; ++i) {
    fvals[i] = 1.0 + p.rhs.excess(g.point(i));
    if (!(fvals[i] > 0.0) || fvals[i] < 0.5 / p.rhs.c0())
      throw std::invalid_argument(
          "solve_dirichlet: f not positively bounded below at a node");
  }

  std::vector<double>& u = sol.values;
  u.resize(N);
  for (int i = 0; i < N; ++i) u[i] = init_fn(g.point(i));

  // per-node timestep: the global monotone bound shrunk where cut legs are
  // short
  const double c0 = p.rhs.c0();
  const double tau0 = g.h() * g.h() / (4.0 * g.n() * c0 * g.W() * g.W());
  std::vector<double> tau(N, tau0);
  for (int i = 0; i < N; ++i) {
    if (g.deep(i)) continue;
    double tmin = 1.0;
    for (size_t d = 0; d < g.directions().size(); ++d)
      for (int o = 0; o < 2; ++o) {
        const auto l = g.leg(i, static_cast<int>(d), o);
        if (l.nb < 0) tmin = std::min(tmin, l.theta);
      }
    tau[i] *= tmin * tmin;
  }

  const double slack_rate =
      opt.monotone_slack_rate > 0.0
          ? opt.monotone_slack_rate
          : 10.0 * (g.h() * g.h() + 1.0 / (g.W() * g.W())) * c0;

  std::vector<double> res, u_next(N);
  detail::residual_vector(g, u, sol.cut_values, fvals, res);
  sol.residual_history.push_back(detail::inf_norm(res));

  // phase 1: monotone sweeps (Jacobi updates)
  for (int s = 0; s < opt.max_sweeps; ++s) {
    if (sol.residual_history.back() <= opt.tol) break;
    double worst_step = 0.0;
    for (int i = 0; i < N; ++i) {
      const double step = tau[i] * res[i];
      u_next[i] = u[i] + step;
      if (mode == InitMode::subsolution) worst_step = std::min(worst_step, step);
      if (mode == InitMode::supersolution)
        worst_step = std::min(worst_step, -step);
    }
    if (mode != InitMode::custom && worst_step < -tau0 * slack_rate)
      throw std::runtime_error(
          "solve_dirichlet: monotone sweep moved against the " +
          to_string(mode) + " direction by " + std::to_string(-worst_step));
    u.swap(u_next);
    ++sol.sweeps;
    detail::residual_vector(g, u, sol.cut_values, fvals, res);
    sol.residual_history.push_back(detail::inf_norm(res));
  }

  // phase 2: damped Newton on the argmin-frame linearization
  using Trip = Eigen::Triplet<double>;
  std::vector<Trip> trips;
  Eigen::VectorXd rhs(N), delta(N);
  for (int it = 0; it < opt.max_newton; ++it) {
    if (sol.residual_history.back() <= opt.tol) break;
    trips.clear();
    std::vector<double> diag(N, 0.0);
    for (int i = 0; i < N; ++i) {
      const OperatorEval ev = ma_eval(g, u, sol.cut_values, i);
      rhs[i] = -(ev.value - fvals[i]);
      for (int k = 0; k < g.n(); ++k) {
        const int d = g.frames()[ev.frame].dir[k];
        double w;
        if (ev.delta[k] > 0.0) {
          w = 1.0;
          for (int m = 0; m < g.n(); ++m)
            if (m != k) w *= std::max(ev.delta[m], 0.0);
        } else {
          w = 1.0;
        }
        const auto fwd = g.leg(i, d, 0), bwd = g.leg(i, d, 1);
        const double a = fwd.nb >= 0 ? 1.0 : fwd.theta;
        const double b = bwd.nb >= 0 ? 1.0 : bwd.theta;
        const double scale = g.h() * g.h() * g.direction_len2()[d];
        const double cf = 2.0 / (a * (a + b)) / scale;
        const double cb = 2.0 / (b * (a + b)) / scale;
        const double c0c = -2.0 / (a * b) / scale;
        if (fwd.nb >= 0) trips.emplace_back(i, fwd.nb, w * cf);
        if (bwd.nb >= 0) trips.emplace_back(i, bwd.nb, w * cb);
        diag[i] += w * c0c;
      }
    }
    for (int i = 0; i < N; ++i) {
      double dv = diag[i];
      if (std::fabs(dv) < opt.diag_floor)
        dv = dv < 0.0 ? -opt.diag_floor : opt.diag_floor;
      trips.emplace_back(i, i, dv);
    }
    Eigen::SparseMatrix<double> J(N, N);
    J.setFromTriplets(trips.begin(), trips.end());
    J.makeCompressed();

    bool solved = false;
    {
      Eigen::BiCGSTAB<Eigen::SparseMatrix<double>,
                      Eigen::IncompleteLUT<double>>
          it_solver;
      it_solver.preconditioner().setDroptol(1e-3);
      it_solver.preconditioner().setFillfactor(10);
      it_solver.setTolerance(1e-10);
      it_solver.compute(J);
      if (it_solver.info() == Eigen::Success) {
        delta = it_solver.solve(rhs);
        solved = it_solver.info() == Eigen::Success &&
                 delta.allFinite();
      }
    }
    if (!solved) {
      Eigen::BiCGSTAB<Eigen::SparseMatrix<double>> plain;
      plain.setTolerance(1e-10);
      plain.setMaxIterations(20000);
      plain.compute(J);
      if (plain.info() == Eigen::Success) {
        delta = plain.solve(rhs);
        solved = plain.info() == Eigen::Success && delta.allFinite();
      }
    }
    if (!solved) {
      // direct factorization is a last resort: fill-in gets prohibitive on
      // large 2-D stencils
      if (N > 60000)
        throw std::runtime_error(
            "solve_dirichlet: iterative Newton solve failed on a large system");
      Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
      lu.compute(J);
      if (lu.info() != Eigen::Success)
        throw std::runtime_error("solve_dirichlet: singular Newton system");
      delta = lu.solve(rhs);
    }

    const double base = sol.residual_history.back();
    double lambda = 1.0;
    bool accepted = false;
    for (int hcount = 0; hcount <= opt.max_halvings; ++hcount) {
      for (int i = 0; i < N; ++i) u_next[i] = u[i] + lambda * delta[i];
      detail::residual_vector(g, u_next, sol.cut_values, fvals, res);
      const double r = detail::inf_norm(res);
      if (r < base) {
        u.swap(u_next);
        sol.residual_history.push_back(r);
        accepted = true;
        break;
      }
      lambda *= 0.5;
    }
    ++sol.newton_steps;
    if (!accepted)
      throw std::runtime_error(
          "solve_dirichlet: line search stalled at residual " +
          std::to_string(base) + " after " + std::to_string(sol.newton_steps) +
          " Newton steps");
  }

  if (sol.residual_history.back() > opt.tol)
    throw std::runtime_error(
        "solve_dirichlet: no convergence (residual " +
        std::to_string(sol.residual_history.back()) + " after " +
        std::to_string(sol.sweeps) + " sweeps + " +
        std::to_string(sol.newton_steps) + " Newton steps)");

  sol.wall_time =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
          .count();
  return sol;
}

struct SandwichCertificate {
  double beta_minus = 0.0;
  double beta_plus = 0.0;
  double worst_lower = 0.0;  // min over nodes of u - (h_- + beta_-)
  double worst_upper = 0.0;  // min over nodes of (h_+ + beta_+) - u
  double slack = 0.0;
  bool pass = false;
};

// Dirichlet solve on the full ball B_R with boundary value R^2/2, plus the
// radial sandwich certificate from the majorant/minorant profiles.
inline DiscreteSolution solve_big_ball(const RightHandSide& f, int n, double R,
                                       double h, int W = 0,
                                       SolverOptions opt = {},
                                       SandwichCertificate* cert = nullptr) {
  if (!f.radial())
    throw std::invalid_argument("solve_big_ball: radial f expected");
  ProblemSpec p;
  p.n = n;
  p.rhs = f;
  p.far_field = QuadraticFarField::identity(n);
  p.R_out = R;
  auto grid = std::make_shared<Grid>(n, h, R, std::nullopt, W);

  auto outer = [R](const Vector&) { return 0.5 * R * R; };
  auto init = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  auto sol = solve_dirichlet(p, grid, InitMode::custom, init, opt, nullptr,
                             outer);

  if (cert) {
    // the global radial solution for f serves as both h_- and h_+ (the
    // limiting majorant/minorant); the offsets beta_-/beta_+ pin it under
    // and over r^2/2
    RadialProfile h0(f, n, 0.0, 0.0, 0.0, 2.0 * R + 1.0);
    double lo = -1e300, hi = 1e300;
    const auto& gr = h0.grid();
    for (size_t i = 0; i < gr.size(); ++i) {
      const double w = h0.values()[i] - 0.5 * gr[i] * gr[i];
      lo = std::max(lo, w);
      hi = std::min(hi, w);
    }
    cert->beta_minus = -lo;
    cert->beta_plus = -hi;
    double wl = 1e300, wu = 1e300;
    for (int i = 0; i < grid->num_nodes(); ++i) {
      const double r = grid->point(i).norm();
      const double hm = h0.value(r) + cert->beta_minus;
      const double hp = h0.value(r) + cert->beta_plus;
      wl = std::min(wl, sol.values[i] - hm);
      wu = std::min(wu, hp - sol.values[i]);
    }
    cert->worst_lower = wl;
    cert->worst_upper = wu;
    cert->slack =
        10.0 * (h * h + 1.0 / (grid->W() * grid->W())) * R * R;
    cert->pass = wl >= -cert->slack && wu >= -cert->slack;
  }
  return sol;
}

struct ComparisonReport {
  bool ok = false;
  double worst = 0.0;  // most negative of sol2 - sol1 (expected >= -10 tol)
  int node = -1;
  double allowance = 0.0;
};

// Verifies sol1 <= sol2 (f1 >= f2 forces the smaller convex solution) up to
// 10x the solver tolerances.
inline ComparisonReport comparison_check(const DiscreteSolution& sol1,
                                         const DiscreteSolution& sol2,
                                         const RightHandSide& f1,
                                         const RightHandSide& f2) {
  if (sol1.grid != sol2.grid)
    throw std::invalid_argument("comparison_check: mismatched grids");
  const Grid& g = *sol1.grid;
  for (int i = 0; i < g.num_nodes(); ++i) {
    const Vector x = g.point(i);
    if (f1.excess(x) < f2.excess(x) - 1e-12)
      throw std::invalid_argument(
          "comparison_check: f1 < f2 at a node (precondition)");
  }
  ComparisonReport rep;
  rep.allowance = 10.0 * std::max(sol1.tol, sol2.tol);
  rep.worst = 1e300;
  for (int i = 0; i < g.num_nodes(); ++i) {
    const double gap = sol2.values[i] - sol1.values[i];
    if (gap < rep.worst) {
      rep.worst = gap;
      rep.node = i;
    }
  }
  rep.ok = rep.worst >= -rep.allowance;
  return rep;
}

}  // namespace extma
