#include <catch2/catch_amalgamated.hpp>
#include <cmath>
#include <numeric>
#include <random>

#include "extma/barrier.hpp"
#include "extma/solver.hpp"

using namespace extma;

namespace {

std::shared_ptr<Grid> annulus_grid(double h, int W) {
  return std::make_shared<Grid>(
      2, h, 4.0, InnerDomain::ball(2, Vector::Zero(2), 1.0), W);
}

ProblemSpec annulus_problem(RightHandSide f) {
  ProblemSpec p;
  p.n = 2;
  p.rhs = std::move(f);
  p.domain = InnerDomain::ball(2, Vector::Zero(2), 1.0);
  p.phi = BoundaryData::half_r2();
  p.far_field = QuadraticFarField::identity(2);
  p.R_out = 4.0;
  return p;
}

std::vector<double> sample_quadratic(const Grid& g, const Matrix& A) {
  std::vector<double> u(g.num_nodes());
  for (int i = 0; i < g.num_nodes(); ++i) {
    const Vector x = g.point(i);
    u[i] = 0.5 * x.dot(A * x);
  }
  return u;
}

std::vector<double> quadratic_cuts(const Grid& g, const Matrix& A) {
  std::vector<double> cv(g.cuts().size());
  for (size_t i = 0; i < g.cuts().size(); ++i) {
    const Vector& x = g.cuts()[i].point;
    cv[i] = 0.5 * x.dot(A * x);
  }
  return cv;
}

}  // namespace

TEST_CASE("stencil direction sets") {
  SECTION("n = 2 primitive orthogonal pairs") {
    Grid g(2, 0.25, 4.0, std::nullopt, 5);
    CHECK(g.frames().size() == 20);
    CHECK(g.directions().size() == 40);
    for (const auto& fr : g.frames()) {
      const auto& v = g.directions()[fr.dir[0]];
      const auto& w = g.directions()[fr.dir[1]];
      CHECK(v[0] * w[0] + v[1] * w[1] == 0);
      CHECK(std::gcd(std::abs(v[0]), std::abs(v[1])) == 1);
      CHECK(std::max(std::abs(v[0]), std::abs(v[1])) <= 5);
      CHECK(std::max(std::abs(w[0]), std::abs(w[1])) <= 5);
    }
  }
  SECTION("n = 3 has 13 orthogonal frames") {
    Grid g(3, 0.5, 2.0, std::nullopt, 2);
    CHECK(g.frames().size() == 13);
    for (const auto& fr : g.frames()) {
      for (int a = 0; a < 3; ++a)
        for (int b = a + 1; b < 3; ++b) {
          const auto& v = g.directions()[fr.dir[a]];
          const auto& w = g.directions()[fr.dir[b]];
          CHECK(v[0] * w[0] + v[1] * w[1] + v[2] * w[2] == 0);
        }
    }
  }
}

TEST_CASE("operator is exact on lattice-aligned quadratics") {
  auto grid = annulus_grid(0.125, 5);
  SECTION("identity paraboloid gives 1 everywhere") {
    Matrix A = Matrix::Identity(2, 2);
    auto u = sample_quadratic(*grid, A);
    auto cv = quadratic_cuts(*grid, A);
    for (int i = 0; i < grid->num_nodes(); ++i)
      CHECK(ma_operator(*grid, u, cv, i) == Catch::Approx(1.0).margin(1e-10));
  }
  SECTION("degenerate quadratic gives 0") {
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = 1.0;
    auto u = sample_quadratic(*grid, A);
    auto cv = quadratic_cuts(*grid, A);
    for (int i = 0; i < grid->num_nodes(); i += 7)
      CHECK(ma_operator(*grid, u, cv, i) == Catch::Approx(0.0).margin(1e-10));
  }
  SECTION("stencil-aligned eigenvectors recover det exactly") {
    // eigenvectors along (2,1) and (-1,2): both in the W = 5 direction set
    Matrix R(2, 2), D = Matrix::Zero(2, 2);
    const double s5 = std::sqrt(5.0);
    R << 2.0 / s5, -1.0 / s5, 1.0 / s5, 2.0 / s5;
    D(0, 0) = 2.0;
    D(1, 1) = 0.5;
    Matrix A = R * D * R.transpose();
    auto u = sample_quadratic(*grid, A);
    auto cv = quadratic_cuts(*grid, A);
    for (int i = 0; i < grid->num_nodes(); i += 3)
      CHECK(ma_operator(*grid, u, cv, i) == Catch::Approx(1.0).margin(1e-10));
  }
}

TEST_CASE("misaligned quadratic error decreases with stencil width") {
  Matrix R(2, 2), D = Matrix::Zero(2, 2);
  const double th = 0.39;  // not a stencil angle
  R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
  D(0, 0) = 3.0;
  D(1, 1) = 1.0 / 3.0;
  Matrix A = R * D * R.transpose();
  double prev = 1e300;
  for (int W : {2, 4, 7}) {
    auto grid = annulus_grid(0.125, W);
    auto u = sample_quadratic(*grid, A);
    auto cv = quadratic_cuts(*grid, A);
    double err = 0.0;
    for (int i = 0; i < grid->num_nodes(); ++i)
      err = std::max(err, std::fabs(ma_operator(*grid, u, cv, i) - 1.0));
    CHECK(err < prev);
    CHECK(err <= 3.0 / (W * W));
    prev = err;
  }
}

TEST_CASE("operator tracks the radial oracle for the sharpness rhs") {
  auto f = RightHandSide::sharpness();
  RadialProfile prof(f, 2, 1.0, 1.0, 0.0, 10.0);
  auto grid = std::make_shared<Grid>(
      2, 0.125, 8.0, InnerDomain::ball(2, Vector::Zero(2), 1.0), 5);
  std::vector<double> u(grid->num_nodes());
  for (int i = 0; i < grid->num_nodes(); ++i)
    u[i] = prof.value(grid->point(i).norm());
  std::vector<double> cv(grid->cuts().size());
  for (size_t i = 0; i < grid->cuts().size(); ++i)
    cv[i] = prof.value(grid->cuts()[i].point.norm());
  int checked = 0;
  for (int i = 0; i < grid->num_nodes(); ++i) {
    const double r = grid->point(i).norm();
    if (std::fabs(r - 5.0) > 0.05) continue;
    ++checked;
    CHECK(ma_operator(*grid, u, cv, i) ==
          Catch::Approx(f.radial_value(r)).margin(0.02));
  }
  CHECK(checked > 10);
}

TEST_CASE("annulus solve recovers the paraboloid") {
  auto p = annulus_problem(RightHandSide::constant());
  auto grid = annulus_grid(0.125, 5);
  SolverOptions opt;
  opt.tol = 1e-9;
  auto init = [](const Vector& x) { return 0.45 * x.squaredNorm(); };
  auto sol = solve_dirichlet(p, grid, InitMode::custom, init, opt);

  double err = 0.0;
  for (int i = 0; i < grid->num_nodes(); ++i)
    err = std::max(err,
                   std::fabs(sol.values[i] - 0.5 * grid->point(i).squaredNorm()));
  CHECK(err <= 1e-6);
  CHECK(sol.final_residual() <= opt.tol);
  CHECK(sol.convexity_min() >= -1e-8);
}

TEST_CASE("annulus solve matches a curved radial oracle") {
  auto f = RightHandSide::compact_bump(0.5, 2.5, 0.5);
  RadialProfile oracle(f, 2, 2.0, 1.0, 0.7, 6.0);
  auto p = annulus_problem(f);
  auto grid = annulus_grid(0.125, 5);
  auto data = [&](const Vector& x) { return oracle.value(x.norm()); };
  SolverOptions opt;
  opt.tol = 1e-9;
  auto init = [&](const Vector& x) { return data(x) - 0.3; };
  auto sol = solve_dirichlet(p, grid, InitMode::subsolution, init, opt, data,
                             data);

  double err = 0.0;
  for (int i = 0; i < grid->num_nodes(); ++i)
    err = std::max(err, std::fabs(sol.values[i] - data(grid->point(i))));
  // consistency budget of the wide stencil at this resolution
  const double h = grid->h();
  CHECK(err <= 2.0 * (h * h + 1.0 / (grid->W() * grid->W())));
  CHECK(sol.convexity_min() >= -1e-8);

  SECTION("supersolution start lands on the same discrete solution") {
    auto init_hi = [&](const Vector& x) { return data(x) + 0.3; };
    auto sol2 = solve_dirichlet(p, grid, InitMode::supersolution, init_hi, opt,
                                data, data);
    double gap = 0.0;
    for (int i = 0; i < grid->num_nodes(); ++i)
      gap = std::max(gap, std::fabs(sol2.values[i] - sol.values[i]));
    CHECK(gap <= 10.0 * opt.tol);
  }
}

TEST_CASE("comparison principle on the discrete level") {
  auto grid = annulus_grid(0.25, 4);
  SolverOptions opt;
  opt.tol = 1e-9;
  auto init = [](const Vector& x) { return 0.45 * x.squaredNorm(); };

  auto p1 = annulus_problem(RightHandSide::constant(1.2));
  auto p2 = annulus_problem(RightHandSide::constant());
  auto sol1 = solve_dirichlet(p1, grid, InitMode::custom, init, opt);
  auto sol2 = solve_dirichlet(p2, grid, InitMode::custom, init, opt);

  SECTION("larger det forces the smaller solution") {
    auto rep = comparison_check(sol1, sol2, p1.rhs, p2.rhs);
    CHECK(rep.ok);
    CHECK(rep.worst >= -rep.allowance);
  }
  SECTION("equal problems agree to 2 tol") {
    auto sol2b = solve_dirichlet(p2, grid, InitMode::custom, init, opt);
    double gap = 0.0;
    for (int i = 0; i < grid->num_nodes(); ++i)
      gap = std::max(gap, std::fabs(sol2b.values[i] - sol2.values[i]));
    CHECK(gap <= 2.0 * opt.tol);
  }
  SECTION("monotone dependence on boundary data") {
    auto outer_up = [&p2](const Vector& x) {
      return p2.far_field.evaluate(x) + 1.0;
    };
    auto sol_up = solve_dirichlet(p2, grid, InitMode::custom, init, opt,
                                  nullptr, outer_up);
    auto rep = comparison_check(sol2, sol_up, p2.rhs, p2.rhs);
    CHECK(rep.ok);
  }
  SECTION("mismatched grids are rejected") {
    auto other = annulus_grid(0.125, 4);
    auto sol_other = solve_dirichlet(p2, other, InitMode::custom, init, opt);
    CHECK_THROWS_AS(comparison_check(sol1, sol_other, p1.rhs, p2.rhs),
                    std::invalid_argument);
  }
  SECTION("f1 < f2 violates the precondition") {
    CHECK_THROWS_AS(comparison_check(sol2, sol1, p2.rhs, p1.rhs),
                    std::invalid_argument);
  }
}

TEST_CASE("big ball with f == 1 is exactly the paraboloid") {
  SandwichCertificate cert;
  SolverOptions opt;
  opt.tol = 1e-9;
  auto sol = solve_big_ball(RightHandSide::constant(), 2, 4.0, 0.25, 4, opt,
                            &cert);
  double err = 0.0;
  for (int i = 0; i < sol.grid->num_nodes(); ++i)
    err = std::max(
        err, std::fabs(sol.values[i] - 0.5 * sol.grid->point(i).squaredNorm()));
  CHECK(err <= 1e-6);
  CHECK(cert.pass);
  CHECK(cert.beta_minus == Catch::Approx(0.0).margin(1e-9));
  CHECK(cert.beta_plus == Catch::Approx(0.0).margin(1e-9));
}

TEST_CASE("rejected inputs") {
  auto grid = annulus_grid(0.25, 3);
  SolverOptions opt;
  auto init = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
  SECTION("f without a positive lower bound") {
    auto p = annulus_problem(RightHandSide::compact_bump(-0.95, 2.5, 0.5));
    CHECK_THROWS_AS(solve_dirichlet(p, grid, InitMode::custom, init, opt),
                    std::invalid_argument);
  }
  SECTION("missing init") {
    auto p = annulus_problem(RightHandSide::constant());
    CHECK_THROWS_AS(solve_dirichlet(p, grid, InitMode::custom, nullptr, opt),
                    std::invalid_argument);
  }
}
