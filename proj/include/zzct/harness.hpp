#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>

#include "json.hpp"
#include "zzct/estimators.hpp"
#include "zzct/models.hpp"
#include "zzct/sticky.hpp"
#include "zzct/tempering.hpp"

namespace zzct {

using json = nlohmann::json;

// How kappa(beta) is chosen for a run: an explicit coefficient vector, a
// calibration recipe (pilot phase or fixed-temperature grid chains), or
// the xi scalar of the importance-sampling regime.
struct KappaChoice {
  enum class Kind { Explicit, Calibrate, Xi };
  Kind kind = Kind::Explicit;
  Vec psi = Vec::Zero(1);
  int grid = 15;
  int degree = 4;
  bool fixed_grid = false;
  std::uint64_t chain_events = 4000;  // per fixed-grid chain
  double xi = 1.0;
};

struct RunConfig {
  json model;                 // tagged model spec
  json base;                  // base spec for tempering (may be null)
  double alpha = 1.0;
  KappaChoice kappa;
  Horizon horizon = Horizon::events(50000);
  double burnin_fraction = 0.4;
  std::uint64_t seed = 1;
  int replicates = 1;
  double dt = 0.0;            // discretization step for sample-based output
  bool unstick_refresh = false;
  std::optional<Vec> init_x;
  double init_beta = 0.5;
};

RunConfig parse_config(const json& j);
json config_to_json(const RunConfig& c);

// Instantiate a model from its tagged JSON spec. "auto" (base only)
// derives a moment-matched Gaussian from a Boltzmann target.
std::unique_ptr<TargetModel> build_model(const json& spec,
                                         const json* target_for_auto = nullptr);

// Gaussian matched to the closed-form relaxation envelope:
// mean Q^T tanh(b), covariance Q^T Q + I.
GaussianSpec boltzmann_default_base(const BoltzmannSpec& spec);

// One replicate, full protocol (calibration phase included when
// requested). Returns the summary; keeps the skeleton when keep_skeleton.
struct ReplicateOutput {
  json summary;
  Skeleton skeleton;  // main phase
};
ReplicateOutput run_replicate(const RunConfig& cfg, int replicate_index,
                              bool keep_skeleton);

// Replicate study: runs cfg.replicates chains on `threads` workers and
// merges summaries by replicate index (deterministic for any thread
// count).
json run_replicates(const RunConfig& cfg, int threads);

// Subcommands. Each writes files under out_dir and returns the summary.
json cmd_run(const RunConfig& cfg, const std::string& out_dir, int threads);
json cmd_calibrate(const RunConfig& cfg, const std::string& out_dir);
json cmd_experiment(const std::string& name, const json& overrides,
                    const std::string& out_dir, int threads);

// Built-in experiment configurations (mixture, spikeslab, boltzmann).
json experiment_defaults(const std::string& name);

void write_skeleton_csv(const Skeleton& sk, const std::string& path);
void write_json(const json& j, const std::string& path);

// Fit kappa from fixed-temperature chains on the blended density.
LogKappa calibrate_fixed_grid(const GeometricPath& path, int grid_n,
                              int degree, std::uint64_t chain_events,
                              Rng& rng, json* detail = nullptr);

// Fit kappa from a constant-kappa pilot skeleton.
LogKappa calibrate_from_pilot(const Skeleton& pilot, const GeometricPath& path,
                              int grid_n, int degree, json* detail = nullptr);

}  // namespace zzct
