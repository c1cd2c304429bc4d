#include "zzct/bounds.hpp"

#include <cmath>
#include <stdexcept>

namespace zzct {

PathAnchor make_anchor(const GeometricPath& path, const Vec& x) {
  PathAnchor a;
  a.grad_q = path.target->grad_log_density(x);
  a.grad_q0 = path.base->grad_log_density(x);
  a.log_q = path.target->log_density(x);
  a.log_q0 = path.base->log_density(x);
  if (!a.grad_q.allFinite() || !a.grad_q0.allFinite() ||
      !std::isfinite(a.log_q) || !std::isfinite(a.log_q0))
    throw std::runtime_error("nonfinite density or gradient");
  return a;
}

double beta_boundary_time(const ExtendedState& state) {
  if (state.mode != Mode::Tempering || state.v_beta == 0.0)
    return std::numeric_limits<double>::infinity();
  return state.v_beta > 0.0 ? 1.0 - state.beta : state.beta;
}

RateBound linear_rate_bound(const TargetModel& model, const Vec& x,
                            const Vec& v, int i, const Vec* grad) {
  Vec g;
  if (!grad) {
    g = model.grad_log_density(x);
    grad = &g;
  }
  if (!grad->allFinite()) throw std::runtime_error("nonfinite gradient");
  RateBound b;
  b.coeffs = Vec(2);
  b.coeffs << -v[i] * (*grad)[i], model.hessian_bound().row(i).sum();
  return b;
}

std::vector<RateBound> linear_rate_bounds(const TargetModel& model,
                                          const Vec& x, const Vec& v) {
  const Vec g = model.grad_log_density(x);
  std::vector<RateBound> out;
  out.reserve(static_cast<std::size_t>(x.size()));
  for (int i = 0; i < x.size(); ++i)
    out.push_back(linear_rate_bound(model, x, v, i, &g));
  return out;
}

RateBound blended_x_bound(const GeometricPath& path,
                          const ExtendedState& state, int j,
                          const PathAnchor* pre) {
  PathAnchor local;
  if (!pre) {
    local = make_anchor(path, state.x);
    pre = &local;
  }
  const double beta = state.beta, vb = state.v_beta;
  const double aq = -state.v[j] * pre->grad_q[j];
  const double aq0 = -state.v[j] * pre->grad_q0[j];
  const double bq = path.target->hessian_bound().row(j).sum();
  const double bq0 = path.base->hessian_bound().row(j).sum();
  RateBound out;
  out.coeffs = Vec(3);
  out.coeffs << beta * aq + (1.0 - beta) * aq0,
      vb * (aq - aq0) + beta * bq + (1.0 - beta) * bq0,
      vb * (bq - bq0);
  out.horizon = beta_boundary_time(state);
  return out;
}

RateBound blended_beta_bound(const GeometricPath& path, const LogKappa& kappa,
                             const ExtendedState& state,
                             const PathAnchor* pre) {
  PathAnchor local;
  if (!pre) {
    local = make_anchor(path, state.x);
    pre = &local;
  }
  const double vb = state.v_beta;
  const Eigen::Index m = kappa.psi.size() - 1;
  const Eigen::Index deg = std::max<Eigen::Index>(2, m > 0 ? m - 1 : 0);
  Vec c = Vec::Zero(deg + 1);

  // second-order envelope of -v_beta [log q(x+sv) - log q0(x+sv)]
  double slope = 0.0;
  for (Eigen::Index i = 0; i < state.dim(); ++i)
    slope += state.v[i] * (pre->grad_q[i] - pre->grad_q0[i]);
  c[0] += -vb * (pre->log_q - pre->log_q0);
  c[1] += -vb * slope;
  c[2] += 0.5 * (path.target->hessian_bound().sum() +
                 path.base->hessian_bound().sum());

  // exact expansion of -v_beta d/dbeta log kappa(beta + s v_beta):
  // v_beta sum_k k psi_k (beta + s v_beta)^{k-1} in powers of s, using
  // (beta + s vb)^{k-1} = sum_j C(k-1,j) beta^{k-1-j} vb^j s^j
  for (Eigen::Index k = 1; k <= m; ++k) {
    double binom = 1.0;  // C(k-1, j)
    for (Eigen::Index j = 0; j <= k - 1; ++j) {
      const double vpow = (j % 2 == 0) ? vb : 1.0;  // vb^{j+1} with vb = ±1
      const double bpow = std::pow(state.beta, static_cast<double>(k - 1 - j));
      c[j] += vpow * static_cast<double>(k) * kappa.psi[k] * binom * bpow;
      binom *= static_cast<double>(k - 1 - j) / static_cast<double>(j + 1);
    }
  }

  RateBound out;
  out.coeffs = c;
  out.horizon = beta_boundary_time(state);
  return out;
}

}  // namespace zzct
