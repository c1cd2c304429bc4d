#include <cmath>

#include "doctest.h"
#include "test_util.hpp"
#include "zzct/estimators.hpp"

using namespace zzct;

namespace {

ExtendedState state1(double x0, double v0, Mode mode, double beta = 1.0,
                     double vb = 0.0) {
  Vec x(1), v(1);
  x << x0;
  v << v0;
  return ExtendedState(x, v, beta, vb, mode);
}

Skeleton two_segment_skeleton() {
  // x runs 0 -> 1 on [0,1] in Tempering mode, then holds velocity -1 on
  // [1,3] in Target mode (1 -> -1)
  Skeleton sk;
  sk.events.push_back({0.0, EventKind::Initial, -1,
                       state1(0.0, 1.0, Mode::Tempering, 0.0, 1.0)});
  sk.events.push_back({1.0, EventKind::HitBetaOne, -1,
                       state1(1.0, -1.0, Mode::Target)});
  sk.events.push_back({3.0, EventKind::Final, -1,
                       state1(-1.0, -1.0, Mode::Target)});
  sk.total_time = 3.0;
  return sk;
}

}  // namespace

TEST_SUITE("estimators") {

TEST_CASE("segment moments, closed forms") {
  // single segment x(t) = t on [0,1]: mean 1/2, second moment 1/3
  Skeleton sk;
  sk.events.push_back({0.0, EventKind::Initial, -1, state1(0.0, 1.0, Mode::Untempered)});
  sk.events.push_back({1.0, EventKind::Final, -1, state1(1.0, 1.0, Mode::Untempered)});
  sk.total_time = 1.0;
  CHECK(segment_moment(sk, 0, 1, ModeFilter::all(), 0.0) ==
        doctest::Approx(0.5).epsilon(1e-14));
  CHECK(segment_moment(sk, 0, 2, ModeFilter::all(), 0.0) ==
        doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  // constant trajectory
  Skeleton flat;
  ExtendedState held = state1(2.5, 1.0, Mode::Untempered);
  held.stuck[0] = 1;
  flat.events.push_back({0.0, EventKind::Initial, -1, held});
  flat.events.push_back({4.0, EventKind::Final, -1, held});
  flat.total_time = 4.0;
  CHECK(segment_moment(flat, 0, 1, ModeFilter::all(), 0.0) ==
        doctest::Approx(2.5).epsilon(1e-14));
  CHECK(segment_moment(flat, 0, 2, ModeFilter::all(), 0.0) ==
        doctest::Approx(6.25).epsilon(1e-14));
}

TEST_CASE("segment moments respect the mode filter and burnin") {
  const Skeleton sk = two_segment_skeleton();
  // target part only: x from 1 down to -1 over 2 units -> mean 0
  CHECK(segment_moment(sk, 0, 1, ModeFilter::target_only(), 0.0) ==
        doctest::Approx(0.0).epsilon(1e-14));
  // everything: (1/2 * 1 + 0 * 2) / 3
  CHECK(segment_moment(sk, 0, 1, ModeFilter::all(), 0.0) ==
        doctest::Approx(1.0 / 6.0).epsilon(1e-14));
  // burnin 2: only the tail of the target segment, x from 0 to -1
  CHECK(segment_moment(sk, 0, 1, ModeFilter::all(), 2.0) ==
        doctest::Approx(-0.5).epsilon(1e-14));
  // a filter that keeps nothing is an error
  ModeFilter none{false, false, false};
  CHECK_THROWS(segment_moment(sk, 0, 1, none, 0.0));
  CHECK_THROWS(segment_moment(sk, 0, 3, ModeFilter::all(), 0.0));
}

TEST_CASE("occupancy counts point-mass and untempered time") {
  const Skeleton sk = two_segment_skeleton();
  CHECK(beta_occupancy(sk) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(beta_occupancy(sk, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("inclusion fraction tracks stuck time") {
  Skeleton sk;
  ExtendedState moving = state1(1.0, -1.0, Mode::Target);
  ExtendedState stuck = state1(0.0, -1.0, Mode::Target);
  stuck.stuck[0] = 1;
  sk.events.push_back({0.0, EventKind::Initial, -1, moving});
  sk.events.push_back({1.0, EventKind::Stick, 0, stuck});
  sk.events.push_back({4.0, EventKind::Final, -1, stuck});
  sk.total_time = 4.0;
  CHECK(inclusion_fraction(sk, 0, ModeFilter::target_only(), 0.0) ==
        doctest::Approx(0.25).epsilon(1e-14));
}

TEST_CASE("importance weight identities") {
  CHECK(is_weight(0.0) == 1.0);
  CHECK(is_weight(std::log(2.0)) ==
        doctest::Approx(std::log(2.0)).epsilon(1e-14));  // log2 / (2-1)
  CHECK(is_weight(-50.0) == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(is_weight(1000.0) == 0.0);  // overflow-safe tail
  for (double d : {1e-8, 1e-4, 0.5, 3.0, 12.0, 30.0}) {
    const double lhs = is_weight(-d);
    const double rhs = std::exp(d) * is_weight(d);
    CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
  }
}

TEST_CASE("self-normalized estimate is scale invariant") {
  GaussianSpec gt;
  gt.mu = Vec::Zero(1);
  gt.sigma = Mat::Identity(1, 1);
  GaussianModel target(std::move(gt));
  GaussianSpec gb;
  gb.mu = Vec::Zero(1);
  gb.sigma = 4.0 * Mat::Identity(1, 1);
  GaussianModel base(std::move(gb));
  GeometricPath path(base, target);

  Rng rng(99);
  std::vector<std::pair<Vec, double>> samples;
  for (int k = 0; k < 2000; ++k) {
    Vec x(1);
    x << 2.0 * rng.normal();
    samples.emplace_back(x, rng.uniform());
  }
  const auto f = [](const Vec& x) { return x[0] * x[0]; };
  const double est = is_estimate(samples, path, 1.0, f);

  // manual recomputation with all weights rescaled by 17
  double num = 0.0, den = 0.0;
  for (const auto& [x, beta] : samples) {
    const double w = 17.0 * is_weight(path.base->log_density(x) -
                                      path.target->log_density(x));
    num += w * f(x);
    den += w;
  }
  CHECK(est == doctest::Approx(num / den).epsilon(1e-12));
  CHECK_THROWS(is_estimate({}, path, 1.0, f));
}

TEST_CASE("equal weights reduce the batched estimate to a plain mean") {
  GaussianSpec g;
  g.mu = Vec::Zero(1);
  g.sigma = Mat::Identity(1, 1);
  GaussianModel target(std::move(g));
  GaussianSpec g2;
  g2.mu = Vec::Zero(1);
  g2.sigma = Mat::Identity(1, 1);
  GaussianModel base(std::move(g2));
  GeometricPath path(base, target);  // q = q0: delta = 0, w = 1

  Rng rng(123);
  std::vector<std::pair<Vec, double>> samples;
  double acc = 0.0;
  const int n = 10000;
  for (int k = 0; k < n; ++k) {
    Vec x(1);
    x << rng.normal();
    acc += x[0];
    samples.emplace_back(x, 0.5);
  }
  const IsEstimate est =
      is_estimate_batched(samples, path, 1.0, [](const Vec& x) { return x[0]; });
  CHECK(est.value == doctest::Approx(acc / n).epsilon(1e-12));
  CHECK(est.ess == doctest::Approx(static_cast<double>(n)).epsilon(1e-12));
  // iid standard normals: the batch-means SE estimates 1/sqrt(n)
  CHECK(est.se > 0.005);
  CHECK(est.se < 0.02);
}

TEST_CASE("rmse per moment") {
  Mat est(2, 2);
  est << 1.0, 2.0, 3.0, 4.0;
  Vec exact(2);
  exact << 2.0, 3.0;
  const Vec r = rmse_report(est, exact);
  CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(r[1] == doctest::Approx(1.0).epsilon(1e-14));

  Mat single(2, 1);
  single << 0.0, 4.0;
  Vec one(1);
  one << 1.0;
  CHECK(rmse_report(single, one)[0] ==
        doctest::Approx(std::sqrt(5.0)).epsilon(1e-14));
}

}  // TEST_SUITE
