#include "zzct/estimators.hpp"

#include <cmath>
#include <stdexcept>

namespace zzct {

namespace {

// walk filtered segments, clipped to start at burnin
template <class F>
void for_segments(const Skeleton& sk, ModeFilter filter, double burnin, F&& f) {
  for (std::size_t k = 0; k + 1 < sk.events.size(); ++k) {
    const SkeletonEvent& e0 = sk.events[k];
    const double t1 = sk.events[k + 1].t;
    const double t0 = std::max(e0.t, burnin);
    if (t1 <= t0) continue;
    if (!filter.pass(e0.state.mode)) continue;
    f(e0.state, t0 - e0.t, t1 - t0);
  }
}

}  // namespace

double segment_moment(const Skeleton& sk, int i, int p, ModeFilter filter,
                      double burnin) {
  if (p != 1 && p != 2)
    throw std::invalid_argument("segment_moment: p must be 1 or 2");
  double acc = 0.0, total = 0.0;
  for_segments(sk, filter, burnin, [&](const ExtendedState& s, double skip,
                                       double h) {
    const double v = s.is_stuck(i) ? 0.0 : s.v[i];
    const double x = s.x[i] + v * skip;
    if (p == 1)
      acc += x * h + 0.5 * v * h * h;
    else
      acc += x * x * h + x * v * h * h + v * v * h * h * h / 3.0;
    total += h;
  });
  if (total <= 0.0)
    throw std::runtime_error("segment_moment: no filtered path time");
  return acc / total;
}

double beta_occupancy(const Skeleton& sk, double burnin) {
  double at_target = 0.0, total = 0.0;
  for_segments(sk, ModeFilter::all(), burnin,
               [&](const ExtendedState& s, double, double h) {
                 if (s.mode != Mode::Tempering) at_target += h;
                 total += h;
               });
  if (total <= 0.0)
    throw std::runtime_error("beta_occupancy: empty path");
  return at_target / total;
}

double inclusion_fraction(const Skeleton& sk, int i, ModeFilter filter,
                          double burnin) {
  double in = 0.0, total = 0.0;
  for_segments(sk, filter, burnin,
               [&](const ExtendedState& s, double, double h) {
                 if (!s.is_stuck(i)) in += h;
                 total += h;
               });
  if (total <= 0.0)
    throw std::runtime_error("inclusion_fraction: no filtered path time");
  return in / total;
}

double is_weight(double delta) {
  if (!std::isfinite(delta))
    throw std::invalid_argument("is_weight: nonfinite delta");
  if (delta == 0.0) return 1.0;
  const double den = std::expm1(delta);
  if (std::isinf(den)) return 0.0;
  return delta / den;
}

double is_estimate(const std::vector<std::pair<Vec, double>>& samples,
                   const GeometricPath& path, double xi,
                   const std::function<double(const Vec&)>& f) {
  if (samples.empty()) throw std::invalid_argument("is_estimate: no samples");
  const double logxi = std::log(xi);
  double num = 0.0, den = 0.0;
  for (const auto& [x, beta] : samples) {
    (void)beta;
    const double w = is_weight(path.base->log_density(x) + logxi -
                               path.target->log_density(x));
    num += w * f(x);
    den += w;
  }
  if (den <= 0.0) throw std::runtime_error("is_estimate: zero weight sum");
  return num / den;
}

IsEstimate is_estimate_batched(
    const std::vector<std::pair<Vec, double>>& samples,
    const GeometricPath& path, double xi,
    const std::function<double(const Vec&)>& f, int n_batches) {
  if (samples.empty()) throw std::invalid_argument("is_estimate: no samples");
  const double logxi = std::log(xi);
  const std::size_t n = samples.size();
  const int nb = std::max(2, std::min<int>(n_batches, static_cast<int>(n)));

  std::vector<double> bw(nb, 0.0), bwf(nb, 0.0);
  double sw = 0.0, sw2 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const auto& [x, beta] = samples[j];
    (void)beta;
    const double w = is_weight(path.base->log_density(x) + logxi -
                               path.target->log_density(x));
    const int b = static_cast<int>(j * static_cast<std::size_t>(nb) / n);
    bw[b] += w;
    bwf[b] += w * f(x);
    sw += w;
    sw2 += w * w;
  }
  if (sw <= 0.0) throw std::runtime_error("is_estimate: zero weight sum");
  IsEstimate out;
  double num = 0.0;
  for (int b = 0; b < nb; ++b) num += bwf[b];
  out.value = num / sw;
  out.ess = sw * sw / sw2;
  // weighted batch-means variance of the self-normalized estimator
  double var = 0.0;
  for (int b = 0; b < nb; ++b) {
    if (bw[b] <= 0.0) continue;
    const double mb = bwf[b] / bw[b];
    const double frac = bw[b] / sw;
    var += frac * frac * (mb - out.value) * (mb - out.value);
  }
  out.se = std::sqrt(var * static_cast<double>(nb) /
                     std::max(1.0, static_cast<double>(nb - 1)));
  return out;
}

Vec rmse_report(const Mat& estimates, const Vec& exact) {
  if (estimates.cols() != exact.size())
    throw std::invalid_argument("rmse_report: moment count mismatch");
  if (estimates.rows() < 1)
    throw std::invalid_argument("rmse_report: no replicates");
  Vec out(exact.size());
  for (Eigen::Index m = 0; m < exact.size(); ++m) {
    double acc = 0.0;
    for (Eigen::Index r = 0; r < estimates.rows(); ++r) {
      const double e = estimates(r, m) - exact[m];
      acc += e * e;
    }
    out[m] = std::sqrt(acc / static_cast<double>(estimates.rows()));
  }
  return out;
}

}  // namespace zzct
