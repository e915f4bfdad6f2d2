#pragma once

// Artifact export: CSV tables with JSON sidecars for profiles, discrete
// solutions, and far-field fits.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <stdexcept>
#include <string>

#include "extma/fit.hpp"
#include "extma/problem.hpp"
#include "extma/radial_profile.hpp"
#include "extma/solver.hpp"

namespace extma {

namespace detail {

inline std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path())
    std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << std::setprecision(17);
  return out;
}

}  // namespace detail

inline void write_json(const std::filesystem::path& path, const json& j) {
  auto out = detail::open_out(path);
  out << j.dump(2) << "\n";
}

inline void write_profile_csv(const std::filesystem::path& path,
                              const RadialProfile& prof) {
  auto out = detail::open_out(path);
  out << "r,u,u_prime,f\n";
  for (size_t i = 0; i < prof.grid().size(); ++i) {
    const double r = prof.grid()[i];
    out << r << "," << prof.values()[i] << "," << prof.derivative(r) << ","
        << prof.f().radial_value(r) << "\n";
  }
  json meta;
  meta["n"] = prof.n();
  meta["d"] = prof.d();
  meta["r0"] = prof.r0();
  meta["r_max"] = prof.r_max();
  meta["rhs"] = to_json(prof.f());
  write_json(std::filesystem::path(path).replace_extension(".json"), meta);
}

inline void write_solution_csv(const std::filesystem::path& path,
                               const DiscreteSolution& sol) {
  auto out = detail::open_out(path);
  const Grid& g = *sol.grid;
  out << (g.n() == 2 ? "x,y,value\n" : "x,y,z,value\n");
  for (int i = 0; i < g.num_nodes(); ++i) {
    const Vector x = g.point(i);
    for (int k = 0; k < g.n(); ++k) out << x[k] << ",";
    out << sol.values[i] << "\n";
  }
  json meta;
  meta["n"] = g.n();
  meta["h"] = g.h();
  meta["W"] = g.W();
  meta["R_out"] = g.R();
  meta["nodes"] = g.num_nodes();
  meta["sweeps"] = sol.sweeps;
  meta["newton_steps"] = sol.newton_steps;
  meta["final_residual"] = sol.final_residual();
  meta["residual_history"] = sol.residual_history;
  meta["tol"] = sol.tol;
  meta["init"] = to_string(sol.init);
  meta["wall_time"] = sol.wall_time;
  write_json(std::filesystem::path(path).replace_extension(".json"), meta);
}

inline json fit_to_json(const ExpansionFit& fit, double sigma_expected,
                        const std::string& verdict) {
  json j;
  std::vector<double> Arow;
  for (int i = 0; i < fit.n; ++i)
    for (int k = 0; k < fit.n; ++k) Arow.push_back(fit.A(i, k));
  j["A"] = Arow;
  j["det_A"] = fit.det_A;
  j["b"] = std::vector<double>(fit.b.data(), fit.b.data() + fit.n);
  j["c"] = fit.c;
  if (fit.has_log) j["d"] = fit.d;
  j["sigma_hat"] = fit.sigma_hat;
  j["sigma_halfwidth"] = fit.sigma_halfwidth;
  j["sigma_expected"] = sigma_expected;
  j["annuli"] = json::array();
  for (const auto& a : fit.annuli)
    j["annuli"].push_back({{"r", a.r}, {"rho", a.rho}});
  j["window"] = {fit.r_min, fit.r_max};
  j["verdict"] = verdict;
  return j;
}

inline void write_loglog_csv(const std::filesystem::path& path,
                             const ExpansionFit& fit) {
  auto out = detail::open_out(path);
  out << "log_r,log_rho\n";
  for (const auto& a : fit.annuli)
    if (a.rho > 0.0) out << std::log(a.r) << "," << std::log(a.rho) << "\n";
}

}  // namespace extma
