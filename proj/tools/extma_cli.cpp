// Command-line front end: run single experiments, suites, radial oracle
// exports, and report summaries.
//
// Exit codes: 0 all criteria pass, 1 any failure, 2 bad config.

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "extma/experiment.hpp"
#include "extma/io.hpp"

namespace fs = std::filesystem;
using namespace extma;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config " + path);
  return json::parse(in);
}

// either a bundled experiment id or a path to a JSON spec
ExperimentSpec load_spec(const std::string& arg) {
  if (fs::exists(arg)) return experiment_from_json(load_json(arg));
  if (arg.find('/') != std::string::npos ||
      arg.find(".json") != std::string::npos)
    throw std::invalid_argument("cannot open config " + arg);
  return default_spec(arg);
}

void apply_overrides(ExperimentSpec& spec, unsigned seed, bool seed_set,
                     const std::vector<std::string>& tols,
                     const std::string& out) {
  if (seed_set) spec.seed = seed;
  if (!out.empty()) spec.out_dir = out;
  for (const auto& kv : tols) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("--tol-overrides expects name=value, got '" +
                                  kv + "'");
    spec.tol_overrides[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
  }
}

void print_report(const RunReport& r) {
  std::printf("%-10s %s  (%.1fs, hash %s)\n", r.id.c_str(),
              r.pass ? "PASS" : "FAIL", r.wall_time, r.config_hash.c_str());
  for (const auto& c : r.criteria)
    std::printf("  %-22s %s  measured=%g tolerance=%g\n", c.name.c_str(),
                c.pass ? "pass" : "FAIL", c.measured, c.tolerance);
  if (!r.error.empty()) std::printf("  error: %s\n", r.error.c_str());
}

int summarize_dir(const std::string& dir) {
  bool found = false, all = true;
  auto show = [&](const fs::path& p) {
    std::ifstream in(p);
    json j = json::parse(in);
    if (j.contains("runs")) {
      for (const auto& run : j["runs"]) {
        std::printf("%-10s %s\n", run["id"].get<std::string>().c_str(),
                    run["pass"].get<bool>() ? "PASS" : "FAIL");
        all = all && run["pass"].get<bool>();
      }
    } else {
      std::printf("%-10s %s\n", j["id"].get<std::string>().c_str(),
                  j["pass"].get<bool>() ? "PASS" : "FAIL");
      all = all && j["pass"].get<bool>();
    }
    found = true;
  };
  const fs::path root(dir);
  if (fs::exists(root / "suite_report.json")) {
    show(root / "suite_report.json");
  } else if (fs::exists(root / "report.json")) {
    show(root / "report.json");
  } else if (fs::is_directory(root)) {
    for (const auto& e : fs::recursive_directory_iterator(root))
      if (e.path().filename() == "report.json") show(e.path());
  }
  if (!found) throw std::invalid_argument("no reports under " + dir);
  return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for exterior Monge-Ampere asymptotics"};
  app.require_subcommand(1);

  std::string config, out;
  unsigned seed = 0;
  int workers = 1;
  std::vector<std::string> tols;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "output directory for artifacts");
    sub->add_option("--seed", seed, "override the experiment seed");
    sub->add_option("--tol-overrides", tols,
                    "criterion tolerance overrides, name=value");
  };

  auto* run = app.add_subcommand("run", "run one experiment");
  run->add_option("config", config, "experiment id or JSON spec file")
      ->required();
  add_common(run);

  auto* suite = app.add_subcommand("suite", "run an experiment suite");
  suite->add_option("config", config,
                    "'default' or a JSON file with an experiments array")
      ->required();
  suite->add_option("--workers", workers, "parallel experiment workers");
  add_common(suite);

  auto* oracle = app.add_subcommand("oracle", "export a radial oracle profile");
  oracle->add_option("config", config, "radial profile JSON spec")->required();
  add_common(oracle);

  auto* report = app.add_subcommand("report", "summarize persisted reports");
  report->add_option("dir", config, "report directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      auto spec = load_spec(config);
      apply_overrides(spec, seed, run->count("--seed") > 0, tols, out);
      spec.validate();
      auto rep = run_experiment(spec);
      print_report(rep);
      if (spec.out_dir.empty()) std::puts(to_json(rep).dump(2).c_str());
      return rep.pass ? 0 : 1;
    }

    if (suite->parsed()) {
      std::vector<ExperimentSpec> specs;
      if (config == "default") {
        specs = default_suite();
      } else {
        json j = load_json(config);
        const json& arr = j.is_array() ? j : j.at("experiments");
        for (const auto& e : arr) specs.push_back(experiment_from_json(e));
      }
      for (auto& s : specs)
        apply_overrides(s, seed, suite->count("--seed") > 0, tols, "");
      auto rep = run_suite(specs, workers, out);
      for (const auto& r : rep.runs) print_report(r);
      std::printf("suite: %s (%zu experiments)\n", rep.pass ? "PASS" : "FAIL",
                  rep.runs.size());
      return rep.pass ? 0 : 1;
    }

    if (oracle->parsed()) {
      json j = load_json(config);
      RadialProfile prof(rhs_from_json(j.at("rhs")), j.at("n").get<int>(),
                         j.value("d", 0.0), j.value("r0", 0.0),
                         j.value("base", 0.0), j.value("r_max", 1e3));
      const fs::path dir = out.empty() ? fs::path("oracle") : fs::path(out);
      write_profile_csv(dir / "profile.csv", prof);
      std::printf("profile: n=%d d=%g r0=%g r_max=%g (%zu grid points) -> %s\n",
                  prof.n(), prof.d(), prof.r0(), prof.r_max(),
                  prof.grid().size(), (dir / "profile.csv").c_str());
      return 0;
    }

    return summarize_dir(config);
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const json::exception& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}
