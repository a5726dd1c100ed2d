#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mf/semigroup.hpp"
#include "test_support.hpp"

using namespace mf;
using mftest::random_field;
using mftest::random_measure;

namespace {
const PiecewiseLinearFn kZero = PiecewiseLinearFn::zero();
FixedDynamics dyn(PiecewiseLinearFn v, PiecewiseLinearFn f, double h = 1e-3) {
  return FixedDynamics(std::move(v), std::move(f), h);
}
}  // namespace

TEST_CASE("push forward translates atoms") {
  auto d = dyn(PiecewiseLinearFn::constant(0.0, 1.0, 1.0), kZero);
  auto m = DiscreteMeasure::dirac(0.5, 1.0);

  auto r = push_forward(d, m, 0.25);
  REQUIRE(r.size() == 1);
  CHECK(r.atoms()[0].position == Catch::Approx(0.75).margin(1e-12));
  CHECK(r.atoms()[0].weight == 1.0);

  auto stopped = push_forward(d, m, 2.0);
  REQUIRE(stopped.size() == 1);
  CHECK(stopped.atoms()[0].position == 1.0);
  CHECK(stopped.atoms()[0].weight == 1.0);

  CHECK(push_forward(d, DiscreteMeasure{}, 1.0).empty());
}

TEST_CASE("mild step applies the exponential reaction factor") {
  auto decay = dyn(kZero, PiecewiseLinearFn::constant(0.0, 1.0, -1.0));
  auto m = DiscreteMeasure::dirac(0.3, 0.5);
  auto r = mild_step(decay, m, 1.0);
  REQUIRE(r.size() == 1);
  CHECK(r.atoms()[0].position == 0.3);
  CHECK(r.atoms()[0].weight == Catch::Approx(0.5 * std::exp(-1.0)).margin(1e-10));

  // f == 0 reduces Q_t to P_t
  std::mt19937_64 rng(100);
  for (int i = 0; i < 10; ++i) {
    auto d = dyn(random_field(rng), kZero);
    auto mm = random_measure(rng, 4, false);
    double t = 0.7;
    REQUIRE(dual_distance(mild_step(d, mm, t), push_forward(d, mm, t)) <= 1e-12);
  }

  // transport against a ramp reaction: weight picks up e^{1/2}
  auto d = dyn(PiecewiseLinearFn::constant(0.0, 1.0, 1.0),
               PiecewiseLinearFn({0.0, 1.0}, {0.0, 1.0}));
  auto r2 = mild_step(d, DiscreteMeasure::dirac(0.0, 1.0), 1.0);
  REQUIRE(r2.size() == 1);
  CHECK(r2.atoms()[0].position == Catch::Approx(1.0).margin(1e-9));
  CHECK(r2.atoms()[0].weight == Catch::Approx(std::exp(0.5)).margin(1e-7));
}

TEST_CASE("mass and TV conservation under push forward") {
  std::mt19937_64 rng(200);
  for (int i = 0; i < 20; ++i) {
    auto d = dyn(random_field(rng), random_field(rng));
    auto m = random_measure(rng, 5, true);
    auto r = push_forward(d, m, 1.0);
    REQUIRE(mass(r) == Catch::Approx(mass(m)).margin(1e-13));
    REQUIRE(total_variation(r) <= total_variation(m) + 1e-13);
    REQUIRE(is_positive(r));
  }
}

TEST_CASE("positivity preserved by the mild step") {
  std::mt19937_64 rng(300);
  for (int i = 0; i < 20; ++i) {
    auto d = dyn(random_field(rng), random_field(rng));
    auto m = random_measure(rng, 5, true);
    REQUIRE(is_positive(mild_step(d, m, 0.8)));
  }
}

TEST_CASE("Q semigroup defect is at integrator scale") {
  auto d = dyn(PiecewiseLinearFn::constant(0.0, 1.0, 1.0),
               PiecewiseLinearFn::constant(0.0, 1.0, -1.0));
  auto m = DiscreteMeasure::dirac(0.2, 1.0);
  CHECK(q_semigroup_defect(d, m, 0.25, 0.25) <= 1e-8);
  CHECK(q_semigroup_defect(d, m, 0.0, 0.7) <= 1e-9);
  CHECK(q_semigroup_defect(d, DiscreteMeasure{}, 0.3, 0.4) == 0.0);

  std::mt19937_64 rng(400);
  std::uniform_real_distribution<double> ut(0.0, 0.8);
  for (int i = 0; i < 20; ++i) {
    auto dd = dyn(random_field(rng), random_field(rng));
    auto mm = random_measure(rng, 4, false);
    REQUIRE(q_semigroup_defect(dd, mm, ut(rng), ut(rng)) <= 1e-7);
  }
}

TEST_CASE("growth and regularity bounds hold with numerical margin") {
  auto trivial = dyn(kZero, kZero);
  auto m0 = DiscreteMeasure::from_atoms({{0.2, 0.4}, {0.8, 0.6}});
  auto rep0 = check_bounds(trivial, m0, 1.0);
  CHECK(rep0.min_margin() >= 0.0);

  std::mt19937_64 rng(500);
  for (int i = 0; i < 20; ++i) {
    auto d = dyn(random_field(rng), random_field(rng));
    auto m = random_measure(rng, 5, true);
    auto rep = check_bounds(d, m, 1.0);
    REQUIRE(rep.all_within(1e-7));
  }
  for (int i = 0; i < 10; ++i) {
    auto d = dyn(random_field(rng), random_field(rng));
    auto rep = check_bounds(d, DiscreteMeasure{}, 1.0);
    REQUIRE(rep.min_margin() >= 0.0);
  }
}

TEST_CASE("contraction bound for Q on measure differences") {
  std::mt19937_64 rng(600);
  for (int i = 0; i < 20; ++i) {
    auto v = random_field(rng);
    auto f = random_field(rng);
    auto d = dyn(v, f);
    auto mu = random_measure(rng, 4, true);
    auto nu = random_measure(rng, 4, true);
    double t = 1.0;
    double lhs = dual_distance(mild_step(d, mu, t), mild_step(d, nu, t));
    double rhs = dual_distance(mu, nu) *
                 std::exp(v.lip_const() * t +
                          f.bl_norm() * t * std::exp(v.lip_const() * t));
    REQUIRE(lhs <= rhs + 1e-7);
  }
}

TEST_CASE("velocity perturbation bound for Q") {
  std::mt19937_64 rng(700);
  for (int i = 0; i < 20; ++i) {
    auto v = random_field(rng);
    auto vp = random_field(rng);
    auto f = random_field(rng);
    auto m = random_measure(rng, 4, true);
    double t = 1.0;
    double lhs = dual_distance(mild_step(dyn(v, f), m, t), mild_step(dyn(vp, f), m, t));
    double lmin = std::min(v.lip_const(), vp.lip_const());
    double sup_f = f.sup_norm();
    double rhs = pl_sup_dist(v, vp) * total_variation(m) *
                 std::exp(lmin * t + f.bl_norm() * t * std::exp(lmin * t)) *
                 (t + t * t * sup_f * std::exp(sup_f * t));
    REQUIRE(lhs <= rhs + 1e-7);
  }
}
