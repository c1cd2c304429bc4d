#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "zzct/bounds.hpp"

using namespace zzct;
using zzct_test::random_point;

namespace {

GaussianModel gaussian(double s2, int d, double mu0 = 0.0) {
  GaussianSpec g;
  g.mu = mu0 * Vec::Ones(d);
  g.sigma = s2 * Mat::Identity(d, d);
  return GaussianModel(std::move(g));
}

MixtureModel two_bumps() {
  MixtureSpec m;
  m.means = {Vec(2), Vec(2)};
  m.means[0] << -2.0, 1.0;
  m.means[1] << 2.0, -1.0;
  m.sigma2 = 0.5;
  return MixtureModel(std::move(m));
}

// true tempered position flip rate at flow time s
double blended_x_rate(const GeometricPath& path, const ExtendedState& st,
                      int j, double s) {
  const ExtendedState f = flow(st, s);
  const Vec g = path.grad_blend(f.x, f.beta);
  return std::max(0.0, -f.v[j] * g[j]);
}

// true temperature flip rate at flow time s
double beta_rate(const GeometricPath& path, const LogKappa& kappa,
                 const ExtendedState& st, double s) {
  const ExtendedState f = flow(st, s);
  return std::max(0.0, -f.v_beta * (path.dbeta(f.x) + kappa.dlog(f.beta)));
}

ExtendedState random_tempering_state(Rng& rng, Eigen::Index d, double scale) {
  Vec x = random_point(rng, d, scale);
  Vec v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = rng.rademacher();
  const double beta = 0.05 + 0.9 * rng.uniform();
  return ExtendedState(x, v, beta, rng.rademacher(), Mode::Tempering);
}

}  // namespace

TEST_SUITE("bounds") {

TEST_CASE("linear envelope, pinned example") {
  // covariance 2I at x=(1,0), both velocities +1
  GaussianModel m = gaussian(2.0, 2);
  Vec x(2), v(2);
  x << 1.0, 0.0;
  v << 1.0, 1.0;
  const auto bounds = linear_rate_bounds(m, x, v);
  REQUIRE(bounds.size() == 2);
  CHECK(bounds[0].coeffs[0] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(bounds[1].coeffs[0] == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(bounds[0].coeffs[1] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(bounds[1].coeffs[1] == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("linear envelope dominates along the flow") {
  MixtureModel m = two_bumps();
  Rng rng(21);
  for (int k = 0; k < 100; ++k) {
    const Vec x = random_point(rng, 2, 3.0);
    Vec v(2);
    v << rng.rademacher(), rng.rademacher();
    const auto bounds = linear_rate_bounds(m, x, v);
    for (int i = 0; i < 2; ++i) {
      for (double s : {0.0, 0.05, 0.2, 0.5, 1.0, 2.0}) {
        const Vec xs = x + s * v;
        const double rate = std::max(0.0, -v[i] * m.grad_log_density(xs)[i]);
        CHECK(rate <= bounds[i].value(s) * (1.0 + 1e-9) + 1e-12);
      }
    }
  }
}

TEST_CASE("linear envelope is tight at s = 0") {
  MixtureModel m = two_bumps();
  Rng rng(22);
  for (int k = 0; k < 50; ++k) {
    const Vec x = random_point(rng, 2, 3.0);
    Vec v(2);
    v << rng.rademacher(), rng.rademacher();
    const auto bounds = linear_rate_bounds(m, x, v);
    for (int i = 0; i < 2; ++i) {
      const double rate = std::max(0.0, -v[i] * m.grad_log_density(x)[i]);
      CHECK(bounds[i].value(0.0) == doctest::Approx(rate).epsilon(1e-12));
    }
  }
}

TEST_CASE("beta boundary time") {
  Vec x = Vec::Zero(1), v = Vec::Ones(1);
  ExtendedState up(x, v, 0.25, +1.0, Mode::Tempering);
  CHECK(beta_boundary_time(up) == doctest::Approx(0.75).epsilon(1e-15));
  ExtendedState down(x, v, 0.25, -1.0, Mode::Tempering);
  CHECK(beta_boundary_time(down) == doctest::Approx(0.25).epsilon(1e-15));
  ExtendedState frozen(x, v, 1.0, 0.0, Mode::Target);
  CHECK(std::isinf(beta_boundary_time(frozen)));
}

TEST_CASE("tempered position envelope dominates until the boundary") {
  GaussianModel base = gaussian(4.0, 2);
  MixtureModel target = two_bumps();
  GeometricPath path(base, target);
  Rng rng(23);
  for (int k = 0; k < 100; ++k) {
    const ExtendedState st = random_tempering_state(rng, 2, 3.0);
    const double t_bd = beta_boundary_time(st);
    for (int j = 0; j < 2; ++j) {
      const RateBound b = blended_x_bound(path, st, j);
      CHECK(b.horizon == doctest::Approx(t_bd));
      CHECK(b.value(0.0) ==
            doctest::Approx(blended_x_rate(path, st, j, 0.0)).epsilon(1e-10));
      for (double frac : {0.0, 0.1, 0.33, 0.7, 0.999}) {
        const double s = frac * t_bd;
        const double rate = blended_x_rate(path, st, j, s);
        CHECK(rate <= b.value(s) * (1.0 + 1e-9) + 1e-12);
      }
    }
  }
}

TEST_CASE("temperature envelope dominates until the boundary") {
  GaussianModel base = gaussian(4.0, 2);
  MixtureModel target = two_bumps();
  GeometricPath path(base, target);
  LogKappa kappa;
  kappa.psi = Vec(3);
  kappa.psi << 0.2, -0.4, 1.1;
  Rng rng(24);
  for (int k = 0; k < 100; ++k) {
    const ExtendedState st = random_tempering_state(rng, 2, 3.0);
    const RateBound b = blended_beta_bound(path, kappa, st);
    // tight at s = 0
    CHECK(b.value(0.0) ==
          doctest::Approx(beta_rate(path, kappa, st, 0.0)).epsilon(1e-10));
    for (double frac : {0.0, 0.1, 0.33, 0.7, 0.999}) {
      const double s = frac * beta_boundary_time(st);
      const double rate = beta_rate(path, kappa, st, s);
      CHECK(rate <= b.value(s) * (1.0 + 1e-9) + 1e-12);
    }
  }
}

TEST_CASE("temperature envelope on matching gaussians starts at zero") {
  // q = q0 and psi = 0: the true rate is identically zero; the envelope
  // starts at zero and only its curvature safety term remains
  GaussianModel base = gaussian(1.0, 1);
  GaussianModel target = gaussian(1.0, 1);
  GeometricPath path(base, target);
  LogKappa kappa;  // psi = {0}
  Vec x(1), v(1);
  x << 0.7;
  v << 1.0;
  ExtendedState st(x, v, 0.5, 1.0, Mode::Tempering);
  const RateBound b = blended_beta_bound(path, kappa, st);
  CHECK(b.value(0.0) < 1e-14);
  CHECK(b.coeffs[0] == doctest::Approx(0.0));
  CHECK(b.coeffs[1] == doctest::Approx(0.0));
  CHECK(b.coeffs[2] == doctest::Approx(1.0));  // (sum M_q + sum M_q0) / 2
}

TEST_CASE("shared anchor gives the same envelopes") {
  GaussianModel base = gaussian(4.0, 2);
  MixtureModel target = two_bumps();
  GeometricPath path(base, target);
  LogKappa kappa;
  kappa.psi = Vec(2);
  kappa.psi << 0.1, 0.5;
  Rng rng(25);
  const ExtendedState st = random_tempering_state(rng, 2, 2.0);
  const PathAnchor anchor = make_anchor(path, st.x);
  for (int j = 0; j < 2; ++j) {
    const RateBound a = blended_x_bound(path, st, j);
    const RateBound b = blended_x_bound(path, st, j, &anchor);
    CHECK((a.coeffs - b.coeffs).cwiseAbs().maxCoeff() == 0.0);
  }
  const RateBound a = blended_beta_bound(path, kappa, st);
  const RateBound b = blended_beta_bound(path, kappa, st, &anchor);
  CHECK((a.coeffs - b.coeffs).cwiseAbs().maxCoeff() == 0.0);
}

}  // TEST_SUITE
