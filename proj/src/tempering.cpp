#include "zzct/tempering.hpp"

#include <Eigen/QR>
#include <cmath>
#include <stdexcept>

namespace zzct {

double exit_rate(const TemperingConfig& config) {
  if (!(config.alpha > 0.0))
    throw std::invalid_argument("exit_rate: needs alpha > 0");
  return config.kappa.left_limit_ratio * (1.0 - config.alpha) /
         (2.0 * config.alpha);
}

Vec tempered_rates(const ExtendedState& state, const TemperingConfig& config) {
  const GeometricPath& path = config.path;
  const Eigen::Index d = path.dim();
  if (state.mode == Mode::Target) {
    const Vec g = path.target->grad_log_density(state.x);
    Vec r(d);
    for (Eigen::Index i = 0; i < d; ++i)
      r[i] = std::max(0.0, -state.v[i] * g[i]);
    return r;
  }
  if (state.mode != Mode::Tempering)
    throw std::invalid_argument("tempered_rates: untempered state");
  const PathAnchor a = make_anchor(path, state.x);
  Vec r(d + 1);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double gi = state.beta * a.grad_q[i] + (1.0 - state.beta) * a.grad_q0[i];
    r[i] = std::max(0.0, -state.v[i] * gi);
  }
  r[d] = std::max(0.0, -state.v_beta * (a.log_q - a.log_q0 +
                                        config.kappa.dlog(state.beta)));
  return r;
}

namespace {

struct Budget {
  bool by_events;
  std::uint64_t max_iter;
  double t_max;

  explicit Budget(Horizon h)
      : by_events(h.kind == Horizon::Kind::Events),
        max_iter(by_events ? static_cast<std::uint64_t>(h.value)
                           : std::numeric_limits<std::uint64_t>::max()),
        t_max(by_events ? std::numeric_limits<double>::infinity() : h.value) {}
};

}  // namespace

Skeleton run_tempered_zigzag(const TemperingConfig& config,
                             const ExtendedState& init, Horizon horizon,
                             Rng& rng) {
  const GeometricPath& path = config.path;
  const Eigen::Index d = path.dim();
  if (init.x.size() != d)
    throw std::invalid_argument("run_tempered_zigzag: dimension mismatch");
  if (init.mode == Mode::Untempered)
    throw std::invalid_argument("run_tempered_zigzag: init must be tempered");
  // beta = 1 with v_beta = -1 is a valid continuation state (it is the
  // state right after leaving the point mass)
  if (init.mode == Mode::Tempering &&
      (init.beta < 0.0 || init.beta > 1.0 || std::abs(init.v_beta) != 1.0 ||
       (init.beta == 1.0 && init.v_beta > 0.0)))
    throw std::invalid_argument("run_tempered_zigzag: bad beta state");

  const double eta = config.point_mass() ? exit_rate(config) : 0.0;
  ExtendedState state = init;
  double t = 0.0;
  double exit_at = std::numeric_limits<double>::infinity();
  if (state.mode == Mode::Target)
    exit_at = (config.alpha < 1.0) ? rng.exponential(eta)
                                   : std::numeric_limits<double>::infinity();

  Skeleton sk;
  sk.events.push_back({0.0, EventKind::Initial, -1, state});
  const Budget budget(horizon);

  const Vec rowsum_q = path.target->hessian_bound().rowwise().sum();
  PathAnchor anchor = make_anchor(path, state.x);

  RateBound lin;
  lin.coeffs = Vec(2);
  for (std::uint64_t iter = 0; iter < budget.max_iter; ++iter) {
    if (state.mode == Mode::Target) {
      // plain Zig-Zag on the target while the exponential exit clock runs
      double best_t = std::numeric_limits<double>::infinity();
      int best_i = -1;
      double best_bound = 0.0;
      for (int i = 0; i < d; ++i) {
        lin.coeffs << -state.v[i] * anchor.grad_q[i], rowsum_q[i];
        const auto cand = first_event_poly(lin, rng.uniform());
        if (cand && *cand < best_t) {
          best_t = *cand;
          best_i = i;
          best_bound = lin.value(*cand);
        }
      }
      const double dwell = exit_at - t;
      if (std::min(best_t, dwell) >= budget.t_max - t) break;
      if (dwell <= best_t) {
        state = flow(state, dwell);
        t = exit_at;
        state.mode = Mode::Tempering;
        state.v_beta = -1.0;
        anchor = make_anchor(path, state.x);
        sk.events.push_back({t, EventKind::ExitBetaOne, -1, state});
        continue;
      }
      state = flow(state, best_t);
      t += best_t;
      anchor = make_anchor(path, state.x);
      ++sk.proposal_count;
      const double lam = std::max(0.0, -state.v[best_i] * anchor.grad_q[best_i]);
      if (lam > best_bound * (1.0 + 1e-9) + 1e-12)
        throw BoundViolation(best_t, lam, best_bound);
      if (best_bound > 0.0 && rng.uniform() * best_bound <= lam) {
        ++sk.accepted_count;
        state.v[best_i] = -state.v[best_i];
        sk.events.push_back({t, EventKind::FlipX, best_i, state});
      }
      continue;
    }

    // Tempering mode: d position clocks + temperature clock, all bounded,
    // racing the deterministic boundary hit.
    const double t_bd = beta_boundary_time(state);
    double best_t = std::numeric_limits<double>::infinity();
    int best_i = -1;  // d means the temperature clock
    RateBound best_rb;
    for (int i = 0; i < d; ++i) {
      const RateBound rb = blended_x_bound(path, state, i, &anchor);
      const auto cand = first_event_poly(rb, rng.uniform());
      if (cand && *cand < best_t) {
        best_t = *cand;
        best_i = i;
        best_rb = rb;
      }
    }
    {
      const RateBound rb = blended_beta_bound(path, config.kappa, state, &anchor);
      const auto cand = first_event_poly(rb, rng.uniform());
      if (cand && *cand < best_t) {
        best_t = *cand;
        best_i = static_cast<int>(d);
        best_rb = rb;
      }
    }

    if (std::min(best_t, t_bd) >= budget.t_max - t) break;

    if (t_bd <= best_t) {
      // boundary hit
      state = flow(state, t_bd);
      t += t_bd;
      if (state.v_beta > 0.0) {
        state.beta = 1.0;
        if (config.point_mass()) {
          state.v_beta = 0.0;
          state.mode = Mode::Target;
          exit_at = (config.alpha < 1.0)
                        ? t + rng.exponential(eta)
                        : std::numeric_limits<double>::infinity();
          anchor = make_anchor(path, state.x);
          sk.events.push_back({t, EventKind::HitBetaOne, -1, state});
        } else {
          state.v_beta = -1.0;
          anchor = make_anchor(path, state.x);
          sk.events.push_back({t, EventKind::ReflectBetaOne, -1, state});
        }
      } else {
        state.beta = 0.0;
        state.v_beta = +1.0;
        anchor = make_anchor(path, state.x);
        sk.events.push_back({t, EventKind::ReflectBetaZero, -1, state});
      }
      continue;
    }

    state = flow(state, best_t);
    t += best_t;
    anchor = make_anchor(path, state.x);
    ++sk.proposal_count;
    double lam;
    if (best_i < d) {
      const double gi = state.beta * anchor.grad_q[best_i] +
                        (1.0 - state.beta) * anchor.grad_q0[best_i];
      lam = std::max(0.0, -state.v[best_i] * gi);
    } else {
      lam = std::max(0.0, -state.v_beta * (anchor.log_q - anchor.log_q0 +
                                           config.kappa.dlog(state.beta)));
    }
    const double bnd = best_rb.value(best_t);
    if (lam > bnd * (1.0 + 1e-9) + 1e-12) throw BoundViolation(best_t, lam, bnd);
    if (bnd > 0.0 && rng.uniform() * bnd <= lam) {
      ++sk.accepted_count;
      if (best_i < d) {
        state.v[best_i] = -state.v[best_i];
        sk.events.push_back({t, EventKind::FlipX, best_i, state});
      } else {
        state.v_beta = -state.v_beta;
        sk.events.push_back({t, EventKind::FlipBeta, -1, state});
      }
    }
  }

  if (!budget.by_events && std::isfinite(budget.t_max)) {
    state = flow(state, budget.t_max - t);
    t = budget.t_max;
  }
  sk.events.push_back({t, EventKind::Final, -1, state});
  sk.total_time = t;
  return sk;
}

Skeleton run_tempered_zigzag(const TemperingConfig& config,
                             const ExtendedState& init, Horizon horizon,
                             std::uint64_t seed) {
  Rng rng(seed);
  return run_tempered_zigzag(config, init, horizon, rng);
}

LogKappa calibrate_kappa(const Vec& beta_grid, const Vec& ubar, int degree) {
  const Eigen::Index n = beta_grid.size();
  if (n < 2 || ubar.size() != n)
    throw std::invalid_argument("calibrate_kappa: bad grid");
  for (Eigen::Index i = 1; i < n; ++i)
    if (!(beta_grid[i] > beta_grid[i - 1]))
      throw std::invalid_argument("calibrate_kappa: grid not increasing");
  if (degree + 1 > n)
    throw std::invalid_argument("calibrate_kappa: degree too high for grid");

  // cumulative trapezoid: log Z(beta_k) relative to the first grid point
  Vec logz = Vec::Zero(n);
  for (Eigen::Index i = 1; i < n; ++i)
    logz[i] = logz[i - 1] + 0.5 * (beta_grid[i] - beta_grid[i - 1]) *
                                (ubar[i] + ubar[i - 1]);

  // least-squares polynomial fit of logz; kappa = exp(-fit)
  Mat V(n, degree + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k <= degree; ++k) {
      V(i, k) = p;
      p *= beta_grid[i];
    }
  }
  Eigen::ColPivHouseholderQR<Mat> qr(V);
  if (qr.rank() < degree + 1)
    throw std::runtime_error("calibrate_kappa: rank-deficient regression");
  LogKappa out;
  out.psi = qr.solve(logz);
  out.left_limit_ratio = 1.0;
  return out;
}

Vec estimate_ubar(const std::vector<ExtendedState>& samples,
                  const GeometricPath& path, const Vec& beta_grid) {
  const Eigen::Index n = beta_grid.size();
  if (samples.empty())
    throw std::invalid_argument("estimate_ubar: no samples");
  Vec sum = Vec::Zero(n);
  Eigen::VectorXi count = Eigen::VectorXi::Zero(n);
  for (const ExtendedState& s : samples) {
    // nearest grid point (grid is sorted)
    Eigen::Index lo = 0, hi = n - 1;
    while (lo < hi) {
      const Eigen::Index mid = (lo + hi) / 2;
      if (beta_grid[mid] < s.beta) lo = mid + 1; else hi = mid;
    }
    Eigen::Index j = lo;
    if (j > 0 &&
        std::abs(beta_grid[j - 1] - s.beta) <= std::abs(beta_grid[j] - s.beta))
      j = j - 1;
    sum[j] += path.dbeta(s.x);
    count[j] += 1;
  }
  for (Eigen::Index j = 0; j < n; ++j)
    if (count[j] == 0)
      throw std::runtime_error("estimate_ubar: empty bin at grid index " +
                               std::to_string(j));
  return sum.array() / count.cast<double>().array();
}

}  // namespace zzct
