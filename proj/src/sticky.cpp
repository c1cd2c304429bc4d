#include "zzct/sticky.hpp"

#include "zzct/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace zzct {

namespace {
constexpr double kSqrt2Pi = 2.5066282746310005024157652848110;
}

RateBound active_coordinate_rate(const SpikeSlabSpec& spec,
                                 const ExtendedState& state, int i) {
  if (state.is_stuck(i))
    throw std::invalid_argument("active_coordinate_rate: coordinate is stuck");
  const double vb = state.mode == Mode::Tempering ? state.v_beta : 0.0;
  const double beta = state.mode == Mode::Tempering ? state.beta : 1.0;
  RateBound rb;
  rb.coeffs = Vec(2);
  rb.coeffs << (state.v[i] / spec.sigma2) * (state.x[i] - spec.m * beta),
      (state.v[i] / spec.sigma2) * (state.v[i] - spec.m * vb);
  rb.horizon = beta_boundary_time(state);
  return rb;
}

double unstick_rate(const SpikeSlabSpec& spec, double beta) {
  return unstick_rate_bound(spec) *
         std::exp(-spec.m * spec.m * beta * beta / (2.0 * spec.sigma2));
}

double unstick_rate_bound(const SpikeSlabSpec& spec) {
  return (spec.w / (1.0 - spec.w)) / (kSqrt2Pi * std::sqrt(spec.sigma2));
}

RateBound beta_rate_sticky(const SpikeSlabSpec& spec,
                           const ExtendedState& state) {
  if (state.mode != Mode::Tempering)
    throw std::invalid_argument("beta_rate_sticky: needs Tempering mode");
  double c0 = 0.0, c1 = 0.0;
  for (Eigen::Index i = 0; i < state.dim(); ++i) {
    if (state.is_stuck(i)) continue;
    c0 += state.x[i] - spec.m * state.beta;
    c1 += state.v[i] - spec.m * state.v_beta;
  }
  const double f = -state.v_beta * spec.m / spec.sigma2;
  RateBound rb;
  rb.coeffs = Vec(2);
  rb.coeffs << f * c0, f * c1;
  rb.horizon = beta_boundary_time(state);
  return rb;
}

Vec sample_spike_slab(const SpikeSlabSpec& spec, Rng& rng) {
  Vec x = Vec::Zero(spec.d);
  const double sd = std::sqrt(spec.sigma2);
  for (int i = 0; i < spec.d; ++i)
    if (rng.uniform() < spec.w) x[i] = spec.m + sd * rng.normal();
  return x;
}

Skeleton run_sticky_tempered(const SpikeSlabSpec& spec,
                             const StickyOptions& opts,
                             const ExtendedState& init, Horizon horizon,
                             Rng& rng) {
  if (init.x.size() != spec.d)
    throw std::invalid_argument("run_sticky_tempered: dimension mismatch");
  if (init.mode == Mode::Untempered)
    throw std::invalid_argument(
        "run_sticky_tempered: use Target mode for the untempered variant");
  if (!(opts.alpha > 0.0 && opts.alpha <= 1.0))
    throw std::invalid_argument("run_sticky_tempered: alpha outside (0,1]");

  const double eta = (1.0 - opts.alpha) / (2.0 * opts.alpha);
  const double ubound = unstick_rate_bound(spec);
  ExtendedState state = init;
  double t = 0.0;
  double exit_at = std::numeric_limits<double>::infinity();
  if (state.mode == Mode::Target && opts.alpha < 1.0)
    exit_at = rng.exponential(eta);

  Skeleton sk;
  sk.events.push_back({0.0, EventKind::Initial, -1, state});

  const bool by_events = horizon.kind == Horizon::Kind::Events;
  const double t_max = by_events ? std::numeric_limits<double>::infinity()
                                 : horizon.value;
  const std::uint64_t max_iter =
      by_events ? static_cast<std::uint64_t>(horizon.value)
                : std::numeric_limits<std::uint64_t>::max();

  enum class Win { None, Flip, Cross, Unstick, FlipBeta, Boundary, Exit };
  for (std::uint64_t iter = 0; iter < max_iter; ++iter) {
    const bool temp = state.mode == Mode::Tempering;
    const double t_bd = temp ? beta_boundary_time(state) : exit_at - t;

    double best_t = std::numeric_limits<double>::infinity();
    Win win = Win::None;
    int widx = -1;
    for (int i = 0; i < spec.d; ++i) {
      if (state.is_stuck(i)) {
        // reintroduction clock, thinned against its constant bound
        const double cand = rng.exponential(ubound);
        if (cand < best_t) {
          best_t = cand;
          win = Win::Unstick;
          widx = i;
        }
      } else {
        if (state.x[i] != 0.0 && state.x[i] * state.v[i] < 0.0) {
          const double cross = -state.x[i] / state.v[i];
          if (cross < best_t) {
            best_t = cross;
            win = Win::Cross;
            widx = i;
          }
        }
        const auto cand =
            first_event_poly(active_coordinate_rate(spec, state, i),
                             rng.uniform());
        if (cand && *cand < best_t) {
          best_t = *cand;
          win = Win::Flip;
          widx = i;
        }
      }
    }
    if (temp && spec.m != 0.0) {
      const auto cand =
          first_event_poly(beta_rate_sticky(spec, state), rng.uniform());
      if (cand && *cand < best_t) {
        best_t = *cand;
        win = Win::FlipBeta;
        widx = -1;
      }
    }
    if (t_bd < best_t) {
      best_t = t_bd;
      win = temp ? Win::Boundary : Win::Exit;
      widx = -1;
    }

    if (win == Win::None || best_t >= t_max - t) break;
    state = flow(state, best_t);
    t += best_t;

    switch (win) {
      case Win::Flip:
        ++sk.proposal_count;
        ++sk.accepted_count;
        state.v[widx] = -state.v[widx];
        sk.events.push_back({t, EventKind::FlipX, widx, state});
        break;
      case Win::Cross:
        state.x[widx] = 0.0;
        state.stuck[static_cast<std::size_t>(widx)] = 1;
        sk.events.push_back({t, EventKind::Stick, widx, state});
        break;
      case Win::Unstick: {
        ++sk.proposal_count;
        const double beta = temp ? state.beta : 1.0;
        if (rng.uniform() * ubound <= unstick_rate(spec, beta)) {
          ++sk.accepted_count;
          state.stuck[static_cast<std::size_t>(widx)] = 0;
          if (opts.refresh_velocity_on_unstick) state.v[widx] = rng.rademacher();
          sk.events.push_back({t, EventKind::Unstick, widx, state});
        }
        break;
      }
      case Win::FlipBeta:
        ++sk.proposal_count;
        ++sk.accepted_count;
        state.v_beta = -state.v_beta;
        sk.events.push_back({t, EventKind::FlipBeta, -1, state});
        break;
      case Win::Boundary:
        if (state.v_beta > 0.0) {
          state.beta = 1.0;
          state.v_beta = 0.0;
          state.mode = Mode::Target;
          exit_at = (opts.alpha < 1.0) ? t + rng.exponential(eta)
                                       : std::numeric_limits<double>::infinity();
          sk.events.push_back({t, EventKind::HitBetaOne, -1, state});
        } else {
          state.beta = 0.0;
          state.v_beta = +1.0;
          sk.events.push_back({t, EventKind::ReflectBetaZero, -1, state});
        }
        break;
      case Win::Exit:
        state.mode = Mode::Tempering;
        state.v_beta = -1.0;
        sk.events.push_back({t, EventKind::ExitBetaOne, -1, state});
        break;
      case Win::None:
        break;
    }
  }

  if (!by_events && std::isfinite(t_max)) {
    state = flow(state, t_max - t);
    t = t_max;
  }
  sk.events.push_back({t, EventKind::Final, -1, state});
  sk.total_time = t;
  return sk;
}

Skeleton run_sticky_tempered(const SpikeSlabSpec& spec,
                             const StickyOptions& opts,
                             const ExtendedState& init, Horizon horizon,
                             std::uint64_t seed) {
  Rng rng(seed);
  return run_sticky_tempered(spec, opts, init, horizon, rng);
}

}  // namespace zzct
