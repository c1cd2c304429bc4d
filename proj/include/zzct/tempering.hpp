#pragma once

#include "zzct/path.hpp"
#include "zzct/zigzag.hpp"

namespace zzct {

// Augmented target over (x, beta): the blended density weighted by
// kappa(beta) on beta in [0,1), plus a point mass of weight alpha on the
// target at beta = 1. alpha = 0 selects the reflecting regime with no
// point mass (used with kappa ∝ xi^{1-beta} and importance weighting).
struct TemperingConfig {
  GeometricPath path;
  double alpha = 0.5;
  LogKappa kappa;

  bool point_mass() const { return alpha > 0.0; }
};

// Rate of leaving the beta = 1 point mass:
// (kappa(1-)/kappa(1)) (1-alpha)/(2 alpha); zero at alpha = 1.
double exit_rate(const TemperingConfig& config);

// Event rates at the given state: d position rates plus, in Tempering
// mode, the temperature rate as the last entry.
Vec tempered_rates(const ExtendedState& state, const TemperingConfig& config);

// Full tempered process: thinned position/temperature clocks against the
// deterministic beta-boundary hit; point-mass entry and exit at beta = 1;
// reflection at beta = 0 (and at beta = 1 when alpha = 0).
Skeleton run_tempered_zigzag(const TemperingConfig& config,
                             const ExtendedState& init, Horizon horizon,
                             Rng& rng);
Skeleton run_tempered_zigzag(const TemperingConfig& config,
                             const ExtendedState& init, Horizon horizon,
                             std::uint64_t seed);

// Fit kappa ∝ 1/Z(beta): cumulative trapezoidal integration of the
// conditional expectations ubar over the grid gives log Z estimates,
// then a least-squares polynomial fit of the given degree provides psi.
LogKappa calibrate_kappa(const Vec& beta_grid, const Vec& ubar, int degree);

// Average of log q(x) - log q0(x) over the samples binned to the nearest
// grid point. Throws when a bin receives no sample.
Vec estimate_ubar(const std::vector<ExtendedState>& samples,
                  const GeometricPath& path, const Vec& beta_grid);

}  // namespace zzct
