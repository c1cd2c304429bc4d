#pragma once

#include "zzct/bounds.hpp"
#include "zzct/models.hpp"
#include "zzct/rng.hpp"
#include "zzct/state.hpp"

namespace zzct {

// Stopping rule: either a budget of simulated candidate event times
// (loop iterations, the fair-comparison unit) or a fixed path time.
struct Horizon {
  enum class Kind { Events, PathTime };
  Kind kind = Kind::PathTime;
  double value = 0.0;

  static Horizon events(std::uint64_t n) {
    return Horizon{Kind::Events, static_cast<double>(n)};
  }
  static Horizon path_time(double t) { return Horizon{Kind::PathTime, t}; }
};

// Plain Zig-Zag on the target: per-coordinate flip rates
// lambda_i = max(0, -v_i d_i log q), simulated by thinning against the
// linear envelopes from the Hessian-dominating matrix.
Skeleton run_zigzag(const TargetModel& model, const ExtendedState& init,
                    Horizon horizon, Rng& rng);
Skeleton run_zigzag(const TargetModel& model, const ExtendedState& init,
                    Horizon horizon, std::uint64_t seed);

// Fresh state: x sampled from the model when it can, otherwise zero;
// velocities uniform on {-1,+1}.
ExtendedState draw_init(const TargetModel& model, Rng& rng, Mode mode,
                        double beta = 1.0, double v_beta = 0.0);

}  // namespace zzct
