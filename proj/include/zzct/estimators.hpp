#pragma once

#include <functional>
#include <utility>
#include <vector>

#include "zzct/path.hpp"
#include "zzct/state.hpp"

namespace zzct {

// Which path segments count toward an estimate. target_only() keeps time
// spent at the target: the beta = 1 point mass and plain untempered runs.
struct ModeFilter {
  bool tempering = true;
  bool target = true;
  bool untempered = true;

  bool pass(Mode m) const {
    switch (m) {
      case Mode::Tempering: return tempering;
      case Mode::Target: return target;
      case Mode::Untempered: return untempered;
    }
    return false;
  }
  static ModeFilter all() { return {}; }
  static ModeFilter target_only() { return {false, true, true}; }
};

// Time average of x_i(t)^p over filtered segments after burnin, using the
// closed forms for integrals of (x + s v)^p along linear segments.
double segment_moment(const Skeleton& sk, int i, int p, ModeFilter filter,
                      double burnin);

// Fraction of path time spent at the target (beta = 1 point mass;
// untempered time counts fully).
double beta_occupancy(const Skeleton& sk, double burnin = 0.0);

// Fraction of filtered path time with coordinate i unstuck.
double inclusion_fraction(const Skeleton& sk, int i, ModeFilter filter,
                          double burnin);

// Importance weight w = delta / (exp(delta) - 1), continuous at 0.
double is_weight(double delta);

// Self-normalized importance-sampling estimate over (x, beta) samples from
// an alpha = 0 run with kappa ∝ xi^{1-beta}:
// delta(x) = log q0(x) + log xi - log q(x).
double is_estimate(const std::vector<std::pair<Vec, double>>& samples,
                   const GeometricPath& path, double xi,
                   const std::function<double(const Vec&)>& f);

struct IsEstimate {
  double value = 0.0;
  double se = 0.0;   // batch-means standard error (correlated samples)
  double ess = 0.0;  // (sum w)^2 / sum w^2
};

// Same estimate plus a batch-means standard error and the weight-based
// effective sample size.
IsEstimate is_estimate_batched(
    const std::vector<std::pair<Vec, double>>& samples,
    const GeometricPath& path, double xi,
    const std::function<double(const Vec&)>& f, int n_batches = 50);

// Per-moment root-mean-square error across replicates: estimates is
// (replicates x moments), exact has one entry per moment.
Vec rmse_report(const Mat& estimates, const Vec& exact);

}  // namespace zzct
