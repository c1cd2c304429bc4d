#include "zzct/zigzag.hpp"

#include <cmath>
#include <stdexcept>

namespace zzct {

ExtendedState draw_init(const TargetModel& model, Rng& rng, Mode mode,
                        double beta, double v_beta) {
  const Eigen::Index d = model.dim();
  Vec x = model.can_sample() ? model.sample(rng) : Vec::Zero(d);
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.rademacher();
  if (mode == Mode::Untempered) return ExtendedState(x, v, 1.0, 0.0, mode);
  if (mode == Mode::Target) return ExtendedState(x, v, 1.0, 0.0, mode);
  return ExtendedState(x, v, beta, v_beta, mode);
}

Skeleton run_zigzag(const TargetModel& model, const ExtendedState& init,
                    Horizon horizon, Rng& rng) {
  if (init.mode != Mode::Untempered)
    throw std::invalid_argument("run_zigzag: init must be untempered");
  if (init.x.size() != model.dim())
    throw std::invalid_argument("run_zigzag: dimension mismatch");
  const Eigen::Index d = model.dim();
  ExtendedState state = init;
  double t = 0.0;

  Skeleton sk;
  sk.events.push_back({0.0, EventKind::Initial, -1, state});

  const Vec rowsum = model.hessian_bound().rowwise().sum();
  Vec grad = model.grad_log_density(state.x);
  if (!grad.allFinite()) throw std::runtime_error("nonfinite gradient");

  const bool by_events = horizon.kind == Horizon::Kind::Events;
  const double t_max = by_events
                           ? std::numeric_limits<double>::infinity()
                           : horizon.value;
  const std::uint64_t max_iter =
      by_events ? static_cast<std::uint64_t>(horizon.value)
                : std::numeric_limits<std::uint64_t>::max();

  RateBound bound;
  bound.coeffs = Vec(2);
  for (std::uint64_t iter = 0; iter < max_iter; ++iter) {
    // fresh candidate per coordinate from its linear envelope; min wins
    double best_t = std::numeric_limits<double>::infinity();
    int best_i = -1;
    double best_bound = 0.0;
    for (int i = 0; i < d; ++i) {
      bound.coeffs << -state.v[i] * grad[i], rowsum[i];
      const auto cand = first_event_poly(bound, rng.uniform());
      if (cand && *cand < best_t) {
        best_t = *cand;
        best_i = i;
        best_bound = bound.value(*cand);
      }
    }
    if (best_i < 0 || t + best_t >= t_max) break;  // nothing before horizon
    state = flow(state, best_t);
    t += best_t;
    grad = model.grad_log_density(state.x);
    if (!grad.allFinite()) throw std::runtime_error("nonfinite gradient");
    ++sk.proposal_count;
    const double lam = std::max(0.0, -state.v[best_i] * grad[best_i]);
    if (lam > best_bound * (1.0 + 1e-9) + 1e-12)
      throw BoundViolation(best_t, lam, best_bound);
    if (best_bound > 0.0 && rng.uniform() * best_bound <= lam) {
      ++sk.accepted_count;
      state.v[best_i] = -state.v[best_i];
      sk.events.push_back({t, EventKind::FlipX, best_i, state});
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

Skeleton run_zigzag(const TargetModel& model, const ExtendedState& init,
                    Horizon horizon, std::uint64_t seed) {
  Rng rng(seed);
  return run_zigzag(model, init, horizon, rng);
}

}  // namespace zzct
