#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include "zzct/models.hpp"
#include "zzct/rng.hpp"

namespace zzct_test {

using zzct::Vec;

// one-sample Kolmogorov-Smirnov statistic against a cdf
inline double ks_statistic(std::vector<double> samples,
                           const std::function<double(double)>& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
  }
  return d;
}

inline Vec fd_gradient(const zzct::TargetModel& m, const Vec& x) {
  Vec g(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double h = 1e-5 * (1.0 + std::abs(x[i]));
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    g[i] = (m.log_density(xp) - m.log_density(xm)) / (2.0 * h);
  }
  return g;
}

inline double max_grad_rel_err(const zzct::TargetModel& m, const Vec& x) {
  const Vec an = m.grad_log_density(x);
  const Vec fd = fd_gradient(m, x);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i)
    worst = std::max(worst,
                     std::abs(fd[i] - an[i]) / (1.0 + std::abs(an[i])));
  return worst;
}

inline double fd_hessian_entry(const zzct::TargetModel& m, const Vec& x,
                               Eigen::Index i, Eigen::Index j) {
  const double h = 1e-4;
  if (i == j) {
    Vec xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    return (m.log_density(xp) - 2.0 * m.log_density(x) + m.log_density(xm)) /
           (h * h);
  }
  Vec a = x, b = x, c = x, d = x;
  a[i] += h; a[j] += h;
  b[i] += h; b[j] -= h;
  c[i] -= h; c[j] += h;
  d[i] -= h; d[j] -= h;
  return (m.log_density(a) - m.log_density(b) - m.log_density(c) +
          m.log_density(d)) /
         (4.0 * h * h);
}

// worst (|hess_ij| - M_ij) over all entries; <= tol means dominated
inline double hessian_domination_gap(const zzct::TargetModel& m, const Vec& x) {
  const zzct::Mat& M = m.hessian_bound();
  double worst = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i)
    for (Eigen::Index j = 0; j < x.size(); ++j)
      worst = std::max(worst,
                       std::abs(fd_hessian_entry(m, x, i, j)) - M(i, j));
  return worst;
}

// log Z(beta) for the geometric path between two centered 1-d Gaussians
inline double logz_two_gaussians(double beta, double s0sq, double s1sq) {
  const double tau = (1.0 - beta) / s0sq + beta / s1sq;
  return -0.5 * (1.0 - beta) * std::log(s0sq) - 0.5 * beta * std::log(s1sq) -
         0.5 * std::log(tau);
}

inline Vec random_point(zzct::Rng& rng, Eigen::Index d, double scale) {
  Vec x(d);
  for (Eigen::Index i = 0; i < d; ++i) x[i] = scale * rng.normal();
  return x;
}

}  // namespace zzct_test
