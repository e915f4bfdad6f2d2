#include <catch2/catch_amalgamated.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "extma/experiment.hpp"

using namespace extma;
namespace fs = std::filesystem;

TEST_CASE("experiment spec round trip") {
  auto spec = default_spec("E-T3");
  spec.tol_overrides["d_grid"] = 0.1;
  auto j = to_json(spec);
  auto back = experiment_from_json(j);
  CHECK(to_json(back).dump() == j.dump());
}

TEST_CASE("spec validation") {
  CHECK_THROWS_AS(default_spec("E-T9"), std::invalid_argument);
  auto t3 = default_spec("E-T3");
  t3.radii = {8.0};
  CHECK_THROWS_AS(t3.validate(), std::invalid_argument);
  auto t1 = default_spec("E-T1-2D");
  t1.problem = default_spec("E-T5").problem;
  CHECK_THROWS_AS(t1.validate(), std::invalid_argument);
}

TEST_CASE("growth experiment passes") {
  auto rep = run_experiment(default_spec("E-SHARP"));
  INFO(rep.error);
  CHECK(rep.pass);
  CHECK(rep.criteria.size() == 4);
  auto* c3 = rep.find("log_coeff_n3");
  REQUIRE(c3 != nullptr);
  CHECK(c3->measured == Catch::Approx(1.0).epsilon(0.05));
}

TEST_CASE("decay validation experiment") {
  SECTION("honest beta passes") {
    auto rep = run_experiment(default_spec("E-FA"));
    INFO(rep.error);
    CHECK(rep.pass);
  }
  SECTION("borderline decay with claimed beta 3 fails as designed") {
    auto spec = default_spec("E-FA");
    spec.problem.rhs = RightHandSide::sharpness();
    auto rep = run_experiment(spec);
    CHECK_FALSE(rep.pass);
    CHECK(rep.error.empty());
    auto* k0 = rep.find("fa_k0");
    REQUIRE(k0 != nullptr);
    CHECK_FALSE(k0->pass);
    CHECK(k0->measured == Catch::Approx(1.0).margin(0.1));
  }
}

TEST_CASE("reports are reproducible and errors are captured") {
  SECTION("identical spec, identical payload") {
    auto a = run_experiment(default_spec("E-FA"));
    auto b = run_experiment(default_spec("E-FA"));
    CHECK(a.config_hash == b.config_hash);
    CHECK(a.payload.dump() == b.payload.dump());
  }
  SECTION("module errors land in the report, not the batch") {
    auto spec = default_spec("E-T5");
    spec.problem.domain = InnerDomain::ball(3, Vector::Zero(3), 1.0);
    auto rep = run_experiment(spec);
    CHECK_FALSE(rep.pass);
    CHECK_FALSE(rep.error.empty());
  }
}

TEST_CASE("suite aggregation") {
  SECTION("empty suite passes") {
    auto rep = run_suite({});
    CHECK(rep.pass);
    CHECK(rep.runs.empty());
  }
  SECTION("one forced failure is itemized") {
    auto bad = default_spec("E-FA");
    bad.problem.rhs = RightHandSide::sharpness();
    auto rep =
        run_suite({default_spec("E-SHARP"), default_spec("E-FA"), bad}, 2);
    CHECK_FALSE(rep.pass);
    int passed = 0;
    for (const auto& r : rep.runs) passed += r.pass ? 1 : 0;
    CHECK(passed == 2);
    CHECK_FALSE(rep.runs[2].pass);
  }
}

TEST_CASE("big-ball experiment with a reduced ladder") {
  auto spec = default_spec("E-T3");
  spec.radii = {4.0, 8.0};
  const fs::path dir = fs::temp_directory_path() / "extma_harness_t3";
  fs::remove_all(dir);
  spec.out_dir = dir.string();
  auto rep = run_experiment(spec);
  INFO(rep.error);
  CHECK(rep.pass);
  CHECK(rep.find("sandwich_R4") != nullptr);
  CHECK(rep.find("sandwich_R8") != nullptr);
  CHECK(fs::exists(dir / "E-T3" / "report.json"));
  CHECK(fs::exists(dir / "E-T3" / "solution.csv"));
  std::ifstream in(dir / "E-T3" / "report.json");
  json j = json::parse(in);
  CHECK(j["pass"].get<bool>());
  CHECK(j["config_hash"].get<std::string>() == rep.config_hash);
}

TEST_CASE("uniqueness experiment on a coarse grid") {
  auto spec = default_spec("E-UNIQ");
  spec.solver.h_ladder = {1.0};
  spec.tol_overrides["oracle_deviation"] = 2.0;
  auto rep = run_experiment(spec);
  INFO(rep.error);
  CHECK(rep.pass);
  auto* gap = rep.find("uniqueness_gap");
  REQUIRE(gap != nullptr);
  CHECK(gap->measured <= 10.0 * spec.solver.tol);
}
