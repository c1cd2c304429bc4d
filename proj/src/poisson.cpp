#include "zzct/poisson.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace zzct {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double poly_eval(const Eigen::VectorXd& c, double s) {
  double p = 0.0;
  for (Eigen::Index k = c.size() - 1; k >= 0; --k) p = p * s + c[k];
  return p;
}

double dpoly_eval(const Eigen::VectorXd& c, double s) {
  double p = 0.0;
  for (Eigen::Index k = c.size() - 1; k >= 1; --k)
    p = p * s + c[k] * static_cast<double>(k);
  return p;
}

// antiderivative with A(0) = 0
double anti_eval(const Eigen::VectorXd& c, double s) {
  double p = 0.0;
  for (Eigen::Index k = c.size() - 1; k >= 0; --k)
    p = p * s + c[k] / static_cast<double>(k + 1);
  return p * s;
}

// strip trailing coefficients that are negligible against the largest
Eigen::VectorXd trim(const Eigen::VectorXd& c) {
  const double scale = c.size() ? c.cwiseAbs().maxCoeff() : 0.0;
  Eigen::Index n = c.size();
  while (n > 0 && std::abs(c[n - 1]) <= 1e-14 * scale) --n;
  return c.head(n);
}

void newton_polish(const Eigen::VectorXd& c, double& r) {
  for (int it = 0; it < 12; ++it) {
    const double f = poly_eval(c, r);
    const double df = dpoly_eval(c, r);
    if (df == 0.0) break;
    const double step = f / df;
    r -= step;
    if (std::abs(step) <= 1e-15 * (1.0 + std::abs(r))) break;
  }
}

}  // namespace

std::vector<double> poly_real_roots(const Eigen::VectorXd& coeffs, double lo,
                                    double hi) {
  const Eigen::VectorXd c = trim(coeffs);
  std::vector<double> roots;
  const Eigen::Index deg = c.size() - 1;
  if (deg < 1) return roots;
  if (deg == 1) {
    roots.push_back(-c[0] / c[1]);
  } else if (deg == 2) {
    const double a = c[2], b = c[1], c0 = c[0];
    const double disc = b * b - 4.0 * a * c0;
    if (disc >= 0.0) {
      const double sq = std::sqrt(disc);
      const double q = -0.5 * (b + (b >= 0.0 ? sq : -sq));
      roots.push_back(q / a);
      if (q != 0.0) roots.push_back(c0 / q);
      else roots.push_back(0.0);
    }
  } else {
    // companion matrix of the monic polynomial
    Eigen::MatrixXd comp = Eigen::MatrixXd::Zero(deg, deg);
    for (Eigen::Index i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
    for (Eigen::Index i = 0; i < deg; ++i) comp(i, deg - 1) = -c[i] / c[deg];
    Eigen::EigenSolver<Eigen::MatrixXd> es(comp, false);
    for (Eigen::Index i = 0; i < deg; ++i) {
      const auto ev = es.eigenvalues()[i];
      if (std::abs(ev.imag()) <= 1e-8 * (1.0 + std::abs(ev.real()))) {
        double r = ev.real();
        newton_polish(c, r);
        roots.push_back(r);
      }
    }
  }
  std::sort(roots.begin(), roots.end());
  std::vector<double> out;
  for (double r : roots) {
    if (!(r > lo && r < hi)) continue;
    if (!out.empty() && std::abs(r - out.back()) <= 1e-11 * (1.0 + std::abs(r)))
      continue;
    out.push_back(r);
  }
  return out;
}

double first_event_constant(double rate, double u) {
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("first_event_constant: u outside (0,1)");
  if (rate < 0.0)
    throw std::invalid_argument("first_event_constant: negative rate");
  if (rate == 0.0) return kInf;
  return -std::log(u) / rate;
}

std::optional<double> first_event_poly(const RateBound& bound, double u,
                                       double tol, double start) {
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("first_event_poly: u outside (0,1)");
  if (!bound.coeffs.allFinite())
    throw std::invalid_argument("first_event_poly: nonfinite coefficients");
  const double target = -std::log(u);
  const Eigen::VectorXd c = trim(bound.coeffs);
  if (c.size() == 0) return std::nullopt;  // zero rate

  // Inversion inside [l, r] where the polynomial is positive: find s with
  // A(s) - A(l) = rem.
  const auto invert = [&](double l, double r, double rem) {
    double lo = l, hi = r;
    double s = 0.5 * (lo + hi);
    const double al = anti_eval(c, l);
    for (int it = 0; it < 200; ++it) {
      const double f = anti_eval(c, s) - al - rem;
      if (std::abs(f) <= tol * (1.0 + target)) break;
      if (f > 0.0) hi = s; else lo = s;
      const double df = std::max(0.0, poly_eval(c, s));
      double ns = df > 0.0 ? s - f / df : s;
      if (!(ns > lo && ns < hi)) ns = 0.5 * (lo + hi);
      if (std::abs(ns - s) <= 1e-16 * (1.0 + std::abs(s))) { s = ns; break; }
      s = ns;
    }
    return s;
  };

  const bool finite_h = std::isfinite(bound.horizon);
  const Eigen::Index deg = c.size() - 1;

  // constant rate: closed form
  if (deg == 0) {
    if (c[0] <= 0.0) return std::nullopt;
    const double t = start + target / c[0];
    if (finite_h && t > bound.horizon) return std::nullopt;
    return t;
  }

  // End of the root search range: past the Cauchy bound the sign is that
  // of the leading coefficient.
  double search_end = bound.horizon;
  if (!finite_h) {
    double m = 0.0;
    for (Eigen::Index k = 0; k < deg; ++k)
      m = std::max(m, std::abs(c[k] / c[deg]));
    search_end = std::max(start, 1.0 + m) + 1.0;
  }

  std::vector<double> cuts = poly_real_roots(c, start, search_end);
  cuts.insert(cuts.begin(), start);
  cuts.push_back(search_end);

  double cum = 0.0;
  for (std::size_t j = 0; j + 1 < cuts.size(); ++j) {
    const double l = cuts[j], r = cuts[j + 1];
    if (!(r > l)) continue;
    if (poly_eval(c, 0.5 * (l + r)) <= 0.0) continue;
    const double mass = std::max(0.0, anti_eval(c, r) - anti_eval(c, l));
    if (cum + mass >= target) return invert(l, r, target - cum);
    cum += mass;
  }
  if (finite_h) return std::nullopt;

  // infinite horizon: beyond search_end the sign is constant
  if (c[deg] <= 0.0) return std::nullopt;  // rate dies out, mass finite
  double lo = search_end, hi = search_end + 1.0;
  const double rem = target - cum;
  while (anti_eval(c, hi) - anti_eval(c, lo) < rem) {
    hi = lo + 2.0 * (hi - lo);
    if (!std::isfinite(hi))
      throw std::runtime_error("first_event_poly: inversion overflow");
  }
  return invert(lo, hi, rem);
}

ThinnedEvent thinned_first_event(const std::function<double(double)>& rate,
                                 const RateBound& bound, Rng& rng,
                                 double tol) {
  ThinnedEvent out;
  double s = 0.0;
  for (;;) {
    const double u = rng.uniform();
    const auto cand = first_event_poly(bound, u, tol, s);
    ++out.proposals;
    if (!cand) return out;
    s = *cand;
    const double b = bound.value(s);
    const double lam = rate(s);
    if (lam > b * (1.0 + 1e-9) + 1e-12) throw BoundViolation(s, lam, b);
    if (b > 0.0 && rng.uniform() * b <= lam) {
      out.time = s;
      return out;
    }
    if (out.proposals > 10'000'000)
      throw std::runtime_error("thinned_first_event: thinning stalled");
  }
}

}  // namespace zzct
