#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mf/flow.hpp"
#include "test_support.hpp"

using namespace mf;
using mftest::random_field;

namespace {
const PiecewiseLinearFn kZero = PiecewiseLinearFn::zero();
}  // namespace

TEST_CASE("constant speed hits the boundary at the exact time") {
  auto v = PiecewiseLinearFn::constant(0.0, 1.0, 1.0);
  auto r = stopped_flow(v, kZero, 0.5, 1.0, 1e-3);
  CHECK(r.position == 1.0);
  CHECK(r.stopped);
  REQUIRE(r.hit_time.has_value());
  CHECK(*r.hit_time == Catch::Approx(0.5).margin(1e-10));
}

TEST_CASE("pure decay accumulates the reaction integral") {
  auto f = PiecewiseLinearFn::constant(0.0, 1.0, -1.0);
  auto r = stopped_flow(kZero, f, 0.3, 2.0, 1e-3);
  CHECK(r.position == 0.3);
  CHECK_FALSE(r.stopped);
  CHECK_FALSE(r.hit_time.has_value());
  CHECK(r.reaction_integral == Catch::Approx(-2.0).margin(1e-12));
}

TEST_CASE("linear field matches the exponential closed form") {
  auto v = PiecewiseLinearFn({0.0, 1.0}, {0.0, -1.0});  // v(x) = -x
  auto r = stopped_flow(v, kZero, 0.8, 1.0, 1e-3);
  CHECK_FALSE(r.stopped);
  CHECK(r.position == Catch::Approx(0.8 * std::exp(-1.0)).margin(1e-8));
}

TEST_CASE("boundary start with outward velocity stops at once") {
  auto vneg = PiecewiseLinearFn::constant(0.0, 1.0, -1.0);
  auto f = PiecewiseLinearFn::constant(0.0, 1.0, -0.5);
  auto r = stopped_flow(vneg, f, 0.0, 2.0, 1e-3);
  CHECK(r.position == 0.0);
  CHECK(r.stopped);
  CHECK(*r.hit_time == 0.0);
  CHECK(r.reaction_integral == Catch::Approx(-1.0).margin(1e-12));

  auto vpos = PiecewiseLinearFn::constant(0.0, 1.0, 1.0);
  auto r2 = stopped_flow(vpos, kZero, 1.0, 0.0, 1e-3);
  CHECK(r2.stopped);
  CHECK(*r2.hit_time == 0.0);
}

TEST_CASE("vanishing boundary velocity is an equilibrium, not a stop") {
  auto v = PiecewiseLinearFn({0.0, 1.0}, {1.0, 0.0});  // v(x) = 1-x
  auto r = stopped_flow(v, kZero, 1.0, 3.0, 1e-3);
  CHECK(r.position == 1.0);
  CHECK_FALSE(r.stopped);
  auto r2 = stopped_flow(v, kZero, 0.5, 5.0, 1e-3);
  CHECK_FALSE(r2.stopped);
  CHECK(r2.position == Catch::Approx(1.0 - 0.5 * std::exp(-5.0)).margin(1e-8));
}

TEST_CASE("reaction keeps acting on stopped mass") {
  auto v = PiecewiseLinearFn::constant(0.0, 1.0, 1.0);
  auto f = PiecewiseLinearFn({0.0, 1.0}, {0.0, 1.0});  // f(x) = x
  auto r = stopped_flow(v, f, 0.0, 2.0, 1e-3);
  // reaches 1 at s=1, integral = int_0^1 s ds + f(1)*(2-1) = 1.5
  CHECK(r.stopped);
  CHECK(*r.hit_time == Catch::Approx(1.0).margin(1e-9));
  CHECK(r.reaction_integral == Catch::Approx(1.5).margin(1e-8));
}

TEST_CASE("flow semigroup property") {
  auto v1 = PiecewiseLinearFn::constant(0.0, 1.0, 1.0);
  CHECK(flow_semigroup_check(v1, kZero, 0.2, 0.3, 0.3, 1e-3) <= 1e-10);

  auto vx = PiecewiseLinearFn({0.0, 1.0}, {0.0, -1.0});
  CHECK(flow_semigroup_check(vx, kZero, 0.9, 0.5, 0.5, 1e-3) <= 1e-8);

  CHECK(flow_semigroup_check(kZero, kZero, 0.4, 1.0, 2.0, 1e-3) == 0.0);

  std::mt19937_64 rng(314);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    auto v = random_field(rng);
    auto f = random_field(rng);
    double x0 = u01(rng), s = u01(rng), t = u01(rng);
    REQUIRE(flow_semigroup_check(v, f, x0, s, t, 1e-3) <= 1e-8);
  }
}

TEST_CASE("positions stay in [0,1] and the flow is monotone in x0") {
  std::mt19937_64 rng(1618);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 30; ++i) {
    auto v = random_field(rng, 2.0);
    double a = u01(rng), b = u01(rng);
    if (a > b) std::swap(a, b);
    double t = u01(rng) * 2.0;
    auto ra = stopped_flow(v, kZero, a, t, 1e-3);
    auto rb = stopped_flow(v, kZero, b, t, 1e-3);
    REQUIRE(ra.position >= 0.0);
    REQUIRE(ra.position <= 1.0);
    REQUIRE(ra.position <= rb.position + 1e-9);
    for (const auto& r : {ra, rb}) {
      REQUIRE(r.stopped == r.hit_time.has_value());
      if (r.stopped) {
        REQUIRE(*r.hit_time <= t);
        REQUIRE((r.position == 0.0 || r.position == 1.0));
      }
    }
  }
}

TEST_CASE("time Lipschitz bound |Phi_t - Phi_s| <= sup|v| |t-s|") {
  std::mt19937_64 rng(2718);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    auto v = random_field(rng);
    double x0 = u01(rng), s = u01(rng), t = u01(rng);
    double ps = stopped_flow(v, kZero, x0, s, 1e-3).position;
    double pt = stopped_flow(v, kZero, x0, t, 1e-3).position;
    REQUIRE(std::abs(pt - ps) <= v.sup_norm() * std::abs(t - s) + 1e-9);
  }
}

TEST_CASE("velocity perturbation Gronwall bound") {
  std::mt19937_64 rng(577);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int i = 0; i < 20; ++i) {
    auto v = random_field(rng);
    auto vp = random_field(rng);
    double x0 = u01(rng), t = u01(rng);
    double pa = stopped_flow(v, kZero, x0, t, 1e-3).position;
    double pb = stopped_flow(vp, kZero, x0, t, 1e-3).position;
    double lmin = std::min(v.lip_const(), vp.lip_const());
    double bound = pl_sup_dist(v, vp) * t * std::exp(lmin * t);
    REQUIRE(std::abs(pa - pb) <= bound + 1e-8);
  }
}

TEST_CASE("halving the substep reduces smooth-field error ~16x") {
  auto v = PiecewiseLinearFn({0.0, 1.0}, {0.0, -8.0});  // v(x) = -8x
  double x0 = 0.8, t = 0.5;
  double exact = x0 * std::exp(-8.0 * t);
  double e1 = std::abs(stopped_flow(v, kZero, x0, t, 1e-2).position - exact);
  double e2 = std::abs(stopped_flow(v, kZero, x0, t, 5e-3).position - exact);
  REQUIRE(e1 / e2 > 10.0);
  REQUIRE(e1 / e2 < 24.0);
}

TEST_CASE("refinement still helps across a stopping event") {
  auto v = PiecewiseLinearFn::constant(0.0, 1.0, 1.0);
  auto f = PiecewiseLinearFn({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0});
  double x0 = 0.3, t = 1.0;
  double exact = 0.41;  // int_{0.3}^{1} tent(u) du, then f(1)=0 while stopped
  double e1 = std::abs(stopped_flow(v, f, x0, t, 2e-2).reaction_integral - exact);
  double e2 = std::abs(stopped_flow(v, f, x0, t, 1e-2).reaction_integral - exact);
  REQUIRE(e2 <= e1 / 2.0 + 1e-13);
}

TEST_CASE("flow input validation") {
  CHECK_THROWS_AS(stopped_flow(kZero, kZero, 1.5, 1.0, 1e-3), Error);
  CHECK_THROWS_AS(stopped_flow(kZero, kZero, 0.5, -1.0, 1e-3), std::invalid_argument);
  CHECK_THROWS_AS(stopped_flow(kZero, kZero, 0.5, 1.0, 0.0), std::invalid_argument);
  auto off_domain = PiecewiseLinearFn::constant(-1.0, 1.0, 0.0);
  CHECK_THROWS_AS(stopped_flow(off_domain, kZero, 0.5, 1.0, 1e-3), std::invalid_argument);
}
