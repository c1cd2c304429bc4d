#pragma once

#include "zzct/poisson.hpp"
#include "zzct/state.hpp"
#include "zzct/zigzag.hpp"

namespace zzct {

// Product spike-and-slab target: each coordinate is either exactly zero
// (probability 1-w) or drawn from the slab N(m, sigma2). Tempering moves
// the slab mean to m*beta, so the spike and slab overlap at beta = 0.
struct SpikeSlabSpec {
  int d = 2;
  double w = 0.5;       // inclusion probability
  double m = 0.0;       // slab mode separation
  double sigma2 = 1.0;  // slab variance
};

// Exact linear flip rate of an unstuck coordinate along the flow:
// max(0, (v_i/sigma2)((x_i + s v_i) - m(beta + s v_beta))).
RateBound active_coordinate_rate(const SpikeSlabSpec& spec,
                                 const ExtendedState& state, int i);

// Rate at which a coordinate frozen at zero is reintroduced:
// (w/(1-w)) phi(0; m beta, sigma2), thinned against its beta = 0 value.
double unstick_rate(const SpikeSlabSpec& spec, double beta);
double unstick_rate_bound(const SpikeSlabSpec& spec);

// Exact linear temperature rate, summed over unstuck coordinates
// (kappa = 1; the tempered normalizer is constant in beta).
RateBound beta_rate_sticky(const SpikeSlabSpec& spec,
                           const ExtendedState& state);

struct StickyOptions {
  double alpha = 0.5;  // point-mass weight; 1 = stay at the target
  bool refresh_velocity_on_unstick = false;  // default: resume retained v
};

// Full transdimensional run: exact flips, deterministic sticking at zero
// crossings, thinned unsticking, and the beta point-mass dynamics.
// init.mode = Target runs the untempered variant when alpha = 1.
Skeleton run_sticky_tempered(const SpikeSlabSpec& spec,
                             const StickyOptions& opts,
                             const ExtendedState& init, Horizon horizon,
                             Rng& rng);
Skeleton run_sticky_tempered(const SpikeSlabSpec& spec,
                             const StickyOptions& opts,
                             const ExtendedState& init, Horizon horizon,
                             std::uint64_t seed);

// Independent draws from the spike-and-slab target, the oracle for
// moment checks.
Vec sample_spike_slab(const SpikeSlabSpec& spec, Rng& rng);

}  // namespace zzct
