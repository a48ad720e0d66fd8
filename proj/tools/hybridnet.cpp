// hybridnet: runs experiment descriptions and writes CSV + manifest artifacts.
//
//   hybridnet run <spec.conf> [--out DIR] [--seed U64] [--mc-scale smoke|desk|paper] [--threads N]
//   hybridnet run --all-paper-figs [--configs DIR] [...]
//   hybridnet validate <spec.conf>
//   hybridnet list-experiments
//
// Exit status: 0 ok, 1 usage, 2 invalid config, 3 numerical failure, 4 I/O.

#include <CLI11.hpp>
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "hybridnet/experiment.hpp"

#ifndef HYBRIDNET_CONFIG_DIR
#define HYBRIDNET_CONFIG_DIR "configs"
#endif

namespace ex = hybridnet::experiment;

namespace {

void print_summary(const ex::ExperimentSpec& s, const ex::RunResult& r, const std::string& out) {
  std::printf("%s (%s): %zu file(s) in %s, %.1f s\n", s.name.c_str(), ex::kind_info(s.kind).name, r.tables.size(),
              out.c_str(), r.summary.value("wall_time_s", 0.0));
  if (r.summary.contains("cases"))
    for (const auto& [label, v] : r.summary["cases"].items()) std::printf("  %s: %s\n", label.c_str(), v.dump().c_str());
}

int fail(const std::string& what, const std::exception& e) {
  const int code = ex::exit_code_for(e);
  const char* tag = code == 2 ? "config error" : code == 4 ? "I/O error" : "numerical failure";
  std::fprintf(stderr, "hybridnet: %s%s: %s\n", tag, what.empty() ? "" : (" in " + what).c_str(), e.what());
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic-geometry engine for hybrid BS/IRS downlink networks"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment description (or every figure config)");
  std::string spec_path, configs_dir = HYBRIDNET_CONFIG_DIR, mc_scale;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  bool all = false;
  run->add_option("spec", spec_path, "Experiment config (.conf)");
  run->add_flag("--all-paper-figs", all, "Run every config in the configs directory");
  run->add_option("--configs", configs_dir, "Directory scanned by --all-paper-figs");
  run->add_option("--out", out, "Output directory (overrides [experiment] out)");
  run->add_option("--seed", seed, "Master seed (overrides [experiment] seed)");
  run->add_option("--mc-scale", mc_scale, "Simulation budget")->check(CLI::IsMember({"smoke", "desk", "paper"}));
  run->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

  auto* validate = app.add_subcommand("validate", "Check an experiment config without running it");
  std::string validate_path;
  validate->add_option("spec", validate_path, "Experiment config (.conf)")->required();

  app.add_subcommand("list-experiments", "List experiment kinds and every config key");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (app.got_subcommand("list-experiments")) {
    std::fputs(ex::list_experiments().c_str(), stdout);
    return 0;
  }

  if (app.got_subcommand("validate")) {
    try {
      const auto s = ex::load_spec(validate_path);
      std::printf("%s: ok (%s, %zu case(s)", validate_path.c_str(), ex::kind_info(s.kind).name, s.cases.size());
      if (s.has_sweep()) std::printf(", %zu %s points", s.sweep_grid.size(), s.sweep_variable.c_str());
      std::printf(", mc %s)\n", s.mc.enabled ? ex::mc_scale_name(s.mc.scale) : "off");
      return 0;
    } catch (const std::exception& e) {
      return fail("", e);
    }
  }

  if (all == !spec_path.empty()) {
    std::fprintf(stderr, "hybridnet run: give either a config file or --all-paper-figs\n");
    return 1;
  }
  ex::RunOptions opt;
  opt.out = out;
  opt.seed = seed;
  opt.threads = threads;
  if (!mc_scale.empty()) opt.mc_scale = ex::parse_mc_scale(mc_scale);

  std::vector<std::string> specs;
  if (all) {
    std::error_code ec;
    for (const auto& e : std::filesystem::directory_iterator(configs_dir, ec))
      if (e.path().extension() == ".conf") specs.push_back(e.path().string());
    if (ec || specs.empty()) {
      std::fprintf(stderr, "hybridnet: I/O error: no .conf files in '%s'\n", configs_dir.c_str());
      return 4;
    }
    std::sort(specs.begin(), specs.end());
  } else {
    specs.push_back(spec_path);
  }

  for (const auto& path : specs) {
    try {
      const auto s = ex::load_spec(path);
      opt.config_path = path;
      const auto r = ex::run(s, opt);
      print_summary(s, r, opt.out.value_or(s.out));
    } catch (const std::exception& e) {
      return fail(path, e);
    }
  }
  return 0;
}
