#pragma once

#include "zzct/path.hpp"
#include "zzct/poisson.hpp"
#include "zzct/state.hpp"

namespace zzct {

// Quantities shared by the per-coordinate bounds at one anchor state;
// computing them once per event-loop iteration avoids d redundant
// gradient evaluations.
struct PathAnchor {
  Vec grad_q, grad_q0;
  double log_q = 0.0, log_q0 = 0.0;
};

PathAnchor make_anchor(const GeometricPath& path, const Vec& x);

// Time until beta reaches a boundary of [0,1]; +inf when beta is frozen.
double beta_boundary_time(const ExtendedState& state);

// Per-coordinate linear envelope max(0, a + b s) of the flip rate
// lambda_i(x + s v) = max(0, -v_i d_i log q(x + s v)): a is the rate's
// linear part at s=0 and b the row sum of the Hessian-dominating matrix.
RateBound linear_rate_bound(const TargetModel& model, const Vec& x,
                            const Vec& v, int i,
                            const Vec* grad = nullptr);
std::vector<RateBound> linear_rate_bounds(const TargetModel& model,
                                          const Vec& x, const Vec& v);

// Quadratic envelope of the tempered position rate along the flow,
// valid until beta hits a boundary.
RateBound blended_x_bound(const GeometricPath& path,
                          const ExtendedState& state, int j,
                          const PathAnchor* pre = nullptr);

// Polynomial envelope of the temperature rate along the flow: the
// kappa'/kappa part is expanded exactly in s, the log-density difference
// is bounded through gradients plus the summed Hessian dominators.
RateBound blended_beta_bound(const GeometricPath& path, const LogKappa& kappa,
                             const ExtendedState& state,
                             const PathAnchor* pre = nullptr);

}  // namespace zzct
