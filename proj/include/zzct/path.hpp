#pragma once

#include <cmath>

#include "zzct/models.hpp"

namespace zzct {

// kappa(beta) = exp(-sum_k psi[k] beta^k): the tunable density placed on
// the inverse temperature, ideally proportional to 1/Z(beta).
struct LogKappa {
  Vec psi = Vec::Zero(1);
  double left_limit_ratio = 1.0;  // kappa(1-)/kappa(1), 1 when continuous

  double log_value(double beta) const {
    double p = 0.0;
    for (Eigen::Index k = psi.size() - 1; k >= 0; --k) p = p * beta + psi[k];
    return -p;
  }
  // d/dbeta log kappa
  double dlog(double beta) const {
    double p = 0.0;
    for (Eigen::Index k = psi.size() - 1; k >= 1; --k)
      p = p * beta + psi[k] * static_cast<double>(k);
    return -p;
  }

  static LogKappa constant() { return LogKappa{}; }
  // kappa ∝ xi^{1-beta}, the importance-sampling regime choice
  static LogKappa from_xi(double xi) {
    LogKappa k;
    k.psi = Vec(2);
    k.psi << -std::log(xi), std::log(xi);
    return k;
  }
};

// Geometric bridge q(x,beta) = q0(x)^{1-beta} q(x)^beta between a base q0
// and the target q.
struct GeometricPath {
  const TargetModel* base = nullptr;    // q0
  const TargetModel* target = nullptr;  // q

  GeometricPath() = default;
  GeometricPath(const TargetModel& q0, const TargetModel& q)
      : base(&q0), target(&q) {
    if (q0.dim() != q.dim())
      throw std::invalid_argument("path: base/target dimension mismatch");
  }

  Eigen::Index dim() const { return target->dim(); }
  double log_blend(const Vec& x, double beta) const {
    return (1.0 - beta) * base->log_density(x) + beta * target->log_density(x);
  }
  Vec grad_blend(const Vec& x, double beta) const {
    return beta * target->grad_log_density(x) +
           (1.0 - beta) * base->grad_log_density(x);
  }
  // d/dbeta log q(x,beta) = log q(x) - log q0(x)
  double dbeta(const Vec& x) const {
    return target->log_density(x) - base->log_density(x);
  }
};

// The blended density at a frozen beta, usable anywhere a TargetModel is:
// fixed-temperature chains for grid calibration.
class BlendedModel : public TargetModel {
 public:
  BlendedModel(const GeometricPath& path, double beta)
      : path_(path), beta_(beta) {
    M_ = beta * path.target->hessian_bound() +
         (1.0 - beta) * path.base->hessian_bound();
  }
  Eigen::Index dim() const override { return path_.dim(); }
  double log_density(const Vec& x) const override {
    return path_.log_blend(x, beta_);
  }
  Vec grad_log_density(const Vec& x) const override {
    return path_.grad_blend(x, beta_);
  }
  const Mat& hessian_bound() const override { return M_; }

 private:
  GeometricPath path_;
  double beta_;
  Mat M_;
};

}  // namespace zzct
