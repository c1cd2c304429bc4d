// zzct: zig-zag sampler with continuous tempering.
//   zzct run        --config cfg.json --out dir [--seed S --replicates R --threads T]
//   zzct calibrate  --config cfg.json --out dir [--seed S]
//   zzct experiment NAME [--config overrides.json --out dir --seed S
//                         --replicates R --threads T]

#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "zzct/harness.hpp"

namespace {

zzct::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return zzct::json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"zig-zag sampler with continuous tempering"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false, reps_set = false;
  int replicates = 0, threads = 1;

  auto add_common = [&](CLI::App* sub, bool config_required) {
    auto* c = sub->add_option("--config", config_path, "JSON config file");
    if (config_required) c->required();
    sub->add_option("--out", out_dir, "output directory");
    sub->add_option("--seed", seed, "base seed override")
        ->each([&](const std::string&) { seed_set = true; });
    sub->add_option("--replicates", replicates, "replicate count override")
        ->each([&](const std::string&) { reps_set = true; });
    sub->add_option("--threads", threads, "worker threads");
  };

  CLI::App* run = app.add_subcommand("run", "run the sampler");
  add_common(run, true);

  CLI::App* cal = app.add_subcommand("calibrate", "calibrate kappa");
  add_common(cal, true);

  CLI::App* exp = app.add_subcommand("experiment", "run a built-in study");
  std::string exp_name;
  exp->add_option("name", exp_name, "mixture | spikeslab | boltzmann")
      ->required();
  add_common(exp, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed() || cal->parsed()) {
      zzct::RunConfig cfg = zzct::parse_config(load_json(config_path));
      if (seed_set) cfg.seed = seed;
      if (reps_set) cfg.replicates = replicates;
      const zzct::json out = run->parsed()
                                 ? zzct::cmd_run(cfg, out_dir, threads)
                                 : zzct::cmd_calibrate(cfg, out_dir);
      std::cout << out.dump(2) << "\n";
    } else {
      zzct::json overrides;
      if (!config_path.empty()) overrides = load_json(config_path);
      if (seed_set) overrides["seed"] = seed;
      if (reps_set) overrides["replicates"] = replicates;
      const zzct::json report =
          zzct::cmd_experiment(exp_name, overrides, out_dir, threads);
      std::cout << report.dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
