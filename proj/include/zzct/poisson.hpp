#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "zzct/rng.hpp"

namespace zzct {

// Upper rate envelope lambda_bar(s) = max(0, sum_k coeffs[k] s^k), trusted
// for s in [0, horizon]. Event times are simulated by exact inversion of
// the integrated envelope.
struct RateBound {
  Eigen::VectorXd coeffs;  // ascending powers
  double horizon = std::numeric_limits<double>::infinity();

  double poly(double s) const {
    double p = 0.0;
    for (Eigen::Index k = coeffs.size() - 1; k >= 0; --k) p = p * s + coeffs[k];
    return p;
  }
  double value(double s) const { return std::max(0.0, poly(s)); }
};

// Raised when a thinning proposal sees the true rate exceed its envelope:
// the bound derivation for the model is wrong, not a random failure.
struct BoundViolation : std::runtime_error {
  double s, rate, bound;
  BoundViolation(double s_, double rate_, double bound_)
      : std::runtime_error("rate " + std::to_string(rate_) + " exceeds bound " +
                           std::to_string(bound_) + " at s=" +
                           std::to_string(s_)),
        s(s_), rate(rate_), bound(bound_) {}
};

// First event of a constant-rate process: -log(u)/rate, +inf when rate = 0.
double first_event_constant(double rate, double u);

// First event time t of the inhomogeneous process with rate lambda_bar:
// solves the integral of max(0, poly) over [start, t] = -log(u) by splitting
// at the real roots, integrating analytically on positive pieces, and
// inverting with bisection-safeguarded Newton. Returns nothing when the
// total mass up to the horizon is insufficient.
std::optional<double> first_event_poly(const RateBound& bound, double u,
                                       double tol = 1e-10,
                                       double start = 0.0);

struct ThinnedEvent {
  std::optional<double> time;
  std::uint64_t proposals = 0;
};

// Thinning loop: propose from the envelope, accept with probability
// rate(t)/lambda_bar(t), restart the envelope clock from rejected times.
ThinnedEvent thinned_first_event(const std::function<double(double)>& rate,
                                 const RateBound& bound, Rng& rng,
                                 double tol = 1e-10);

// Real roots of an ascending-coefficient polynomial inside (lo, hi),
// ascending and deduplicated. Exposed for tests.
std::vector<double> poly_real_roots(const Eigen::VectorXd& coeffs, double lo,
                                    double hi);

}  // namespace zzct
