#pragma once

// Full problem specifications and their JSON form.

#include <functional>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "extma/domain.hpp"
#include "extma/far_field.hpp"
#include "extma/rhs.hpp"

namespace extma {

using json = nlohmann::json;

// Dirichlet data on the inner boundary, kept as a small closed-form
// vocabulary so specs stay serializable.
class BoundaryData {
 public:
  static BoundaryData constant(double v) {
    BoundaryData b;
    std::ostringstream os;
    os << v;
    b.expr_ = os.str();
    b.fn_ = [v](const Vector&) { return v; };
    return b;
  }

  static BoundaryData half_r2() {
    BoundaryData b;
    b.expr_ = "half_r2";
    b.fn_ = [](const Vector& x) { return 0.5 * x.squaredNorm(); };
    return b;
  }

  static BoundaryData custom(std::function<double(const Vector&)> f,
                             std::string label = "custom") {
    BoundaryData b;
    b.expr_ = std::move(label);
    b.fn_ = std::move(f);
    return b;
  }

  static BoundaryData parse(const std::string& expr) {
    if (expr == "half_r2") return half_r2();
    try {
      size_t pos = 0;
      const double v = std::stod(expr, &pos);
      if (pos == expr.size()) return constant(v);
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("phi: cannot parse expression '" + expr + "'");
  }

  const std::string& expr() const { return expr_; }
  double operator()(const Vector& x) const { return fn_(x); }

 private:
  std::string expr_;
  std::function<double(const Vector&)> fn_;
};

struct ProblemSpec {
  int n = 2;
  RightHandSide rhs = RightHandSide::constant();
  std::optional<InnerDomain> domain;
  BoundaryData phi = BoundaryData::constant(0.0);
  QuadraticFarField far_field = QuadraticFarField::identity(2);
  double R_out = 8.0;

  void validate() const {
    if (n != far_field.n()) throw std::invalid_argument("problem: dimension mismatch");
    if (domain) {
      if (domain->n() != n) throw std::invalid_argument("problem: domain dimension");
      const double rbar = domain->circumradius();
      if (R_out < 4.0 * rbar)
        throw std::invalid_argument("problem: R_out < 4 r_bar");
    }
  }
};

inline json to_json(const RightHandSide& f) {
  json j;
  j["kind"] = to_string(f.kind());
  switch (f.kind()) {
    case RhsKind::constant:
      if (f.amplitude() != 0.0) j["params"] = {{"level", 1.0 + f.amplitude()}};
      break;
    case RhsKind::radial_perturbation:
      j["beta"] = f.beta();
      j["params"] = {{"amplitude", f.amplitude()}};
      break;
    case RhsKind::sharpness:
      break;
    case RhsKind::compact_bump:
      j["params"] = {{"amplitude", f.amplitude()},
                     {"center", f.bump_center()},
                     {"width", f.bump_width()}};
      break;
    case RhsKind::affine_pullback:
      throw std::invalid_argument("affine_pullback rhs is not serializable");
  }
  return j;
}

inline RightHandSide rhs_from_json(const json& j) {
  const std::string kind = j.at("kind");
  if (kind == "constant")
    return RightHandSide::constant(
        j.contains("params") ? j["params"].value("level", 1.0) : 1.0);
  if (kind == "radial_perturbation")
    return RightHandSide::radial_perturbation(
        j.at("params").at("amplitude").get<double>(),
        j.at("beta").get<double>());
  if (kind == "sharpness") return RightHandSide::sharpness();
  if (kind == "compact_bump")
    return RightHandSide::compact_bump(
        j.at("params").at("amplitude").get<double>(),
        j.at("params").at("center").get<double>(),
        j.at("params").at("width").get<double>());
  throw std::invalid_argument("rhs: unknown kind '" + kind + "'");
}

inline json to_json(const ProblemSpec& p) {
  json j;
  j["n"] = p.n;
  j["rhs"] = to_json(p.rhs);
  if (p.domain) {
    json d;
    d["kind"] = p.domain->kind() == DomainKind::ball ? "ball" : "ellipse";
    d["center"] = std::vector<double>(p.domain->center().data(),
                                      p.domain->center().data() + p.n);
    if (p.domain->kind() == DomainKind::ball)
      d["radius"] = p.domain->semi_axes()[0];
    else
      d["semi_axes"] = std::vector<double>(
          p.domain->semi_axes().data(), p.domain->semi_axes().data() + p.n);
    j["domain"] = d;
  }
  j["phi"] = {{"expr", p.phi.expr()}};
  std::vector<double> Arow;
  for (int i = 0; i < p.n; ++i)
    for (int k = 0; k < p.n; ++k) Arow.push_back(p.far_field.A()(i, k));
  j["far_field"] = {
      {"A", Arow},
      {"b", std::vector<double>(p.far_field.b().data(),
                                p.far_field.b().data() + p.n)},
      {"c", p.far_field.c()},
      {"d", p.far_field.d()}};
  j["R_out"] = p.R_out;
  return j;
}

inline ProblemSpec problem_from_json(const json& j) {
  ProblemSpec p;
  p.n = j.at("n").get<int>();
  p.rhs = rhs_from_json(j.at("rhs"));
  if (j.contains("domain") && !j["domain"].is_null()) {
    const json& d = j["domain"];
    Vector center = Vector::Zero(p.n);
    if (d.contains("center"))
      for (int i = 0; i < p.n; ++i) center[i] = d["center"][i].get<double>();
    const std::string kind = d.at("kind");
    if (kind == "ball") {
      p.domain = InnerDomain::ball(p.n, center, d.at("radius").get<double>());
    } else if (kind == "ellipse") {
      Vector ax(p.n);
      for (int i = 0; i < p.n; ++i) ax[i] = d.at("semi_axes")[i].get<double>();
      p.domain = InnerDomain::ellipse(p.n, center, ax,
                                      d.value("angle", 0.0));
    } else {
      throw std::invalid_argument("domain: unknown kind");
    }
  }
  if (j.contains("phi")) p.phi = BoundaryData::parse(j["phi"].at("expr"));
  const json& ff = j.at("far_field");
  Matrix A(p.n, p.n);
  for (int i = 0; i < p.n; ++i)
    for (int k = 0; k < p.n; ++k) A(i, k) = ff.at("A")[i * p.n + k].get<double>();
  Vector b = Vector::Zero(p.n);
  if (ff.contains("b"))
    for (int i = 0; i < p.n; ++i) b[i] = ff["b"][i].get<double>();
  p.far_field = QuadraticFarField(p.n, A, b, ff.value("c", 0.0), ff.value("d", 0.0));
  p.R_out = j.at("R_out").get<double>();
  p.validate();
  return p;
}

}  // namespace extma
