#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "mf/flat_norm.hpp"
#include "mf/measure.hpp"

using namespace mf;

namespace {

DiscreteMeasure random_measure(std::mt19937_64& rng, int max_atoms, bool positive) {
  std::uniform_real_distribution<double> upos(0.0, 1.0);
  std::uniform_real_distribution<double> uw(positive ? 0.05 : -1.0, 1.0);
  int n = 1 + static_cast<int>(rng() % max_atoms);
  std::vector<Atom> atoms;
  for (int i = 0; i < n; ++i) atoms.push_back({upos(rng), uw(rng)});
  return DiscreteMeasure::from_atoms(atoms);
}

DiscreteMeasure dirac_pair(double x, double y) {
  return linear_combine(1.0, DiscreteMeasure::dirac(x), -1.0, DiscreteMeasure::dirac(y));
}

}  // namespace

TEST_CASE("dirac pair closed forms") {
  CHECK(dirac_pair_distance(0.0, 1.0, NormKind::dual_bl) == Catch::Approx(2.0 / 3.0));
  CHECK(dirac_pair_distance(0.4, 0.4, NormKind::dual_bl) == 0.0);
  CHECK(dirac_pair_distance(0.4, 0.4, NormKind::dual_fm) == 0.0);
  CHECK(dirac_pair_distance(0.1, 0.6, NormKind::dual_fm) == Catch::Approx(0.5));
}

TEST_CASE("dual norm of dirac differences matches closed form") {
  auto m = dirac_pair(0.25, 0.75);  // d = 0.5
  CHECK(dual_norm_value(m, NormKind::dual_bl) == Catch::Approx(0.4).margin(1e-9));
  CHECK(dual_norm_value(m, NormKind::dual_fm) == Catch::Approx(0.5).margin(1e-9));

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    double x = u(rng), y = u(rng);
    auto d = dirac_pair(x, y);
    for (auto kind : {NormKind::dual_bl, NormKind::dual_fm}) {
      REQUIRE(dual_norm_value(d, kind) ==
              Catch::Approx(dirac_pair_distance(x, y, kind)).margin(1e-9));
    }
  }
}

TEST_CASE("dual BL norm of a positive measure is its mass") {
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) {
    auto m = random_measure(rng, 6, true);
    auto r = dual_norm(m, NormKind::dual_bl);
    REQUIRE(r.value == Catch::Approx(mass(m)).margin(1e-9));
    REQUIRE(r.value == Catch::Approx(total_variation(m)).margin(1e-9));
  }
  CHECK(dual_norm_value(DiscreteMeasure{}, NormKind::dual_bl) == 0.0);
}

TEST_CASE("norm equivalence BL <= FM <= 2 BL and BL <= TV") {
  std::mt19937_64 rng(6);
  for (int i = 0; i < 50; ++i) {
    auto m = random_measure(rng, 6, false);
    double bl = dual_norm_value(m, NormKind::dual_bl);
    double fm = dual_norm_value(m, NormKind::dual_fm);
    REQUIRE(bl <= fm + 1e-9);
    REQUIRE(fm <= 2.0 * bl + 1e-9);
    REQUIRE(bl <= total_variation(m) + 1e-9);
  }
}

TEST_CASE("adjacent-pair Lipschitz constraints suffice in 1D") {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> upos(0.0, 1.0);
  std::uniform_real_distribution<double> uw(-1.0, 1.0);
  for (int i = 0; i < 40; ++i) {
    std::vector<Atom> atoms;
    for (int j = 0; j < 5; ++j) atoms.push_back({upos(rng), uw(rng)});
    auto m = DiscreteMeasure::from_atoms(atoms);
    for (auto kind : {NormKind::dual_bl, NormKind::dual_fm}) {
      double adj = detail::dual_norm_lp(m, kind, true).value;
      double all = detail::dual_norm_lp(m, kind, false).value;
      REQUIRE(adj == Catch::Approx(all).margin(1e-9));
    }
  }
}

TEST_CASE("triangle inequality and homogeneity") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> us(-2.0, 2.0);
  for (int i = 0; i < 30; ++i) {
    auto m1 = random_measure(rng, 4, false);
    auto m2 = random_measure(rng, 4, false);
    for (auto kind : {NormKind::dual_bl, NormKind::dual_fm}) {
      double lhs = dual_norm_value(linear_combine(1.0, m1, 1.0, m2), kind);
      REQUIRE(lhs <= dual_norm_value(m1, kind) + dual_norm_value(m2, kind) + 1e-9);
      double a = us(rng);
      double scaled = dual_norm_value(linear_combine(a, m1, 0.0, DiscreteMeasure{}), kind);
      REQUIRE(scaled == Catch::Approx(std::abs(a) * dual_norm_value(m1, kind)).margin(1e-9));
    }
  }
}

TEST_CASE("oracle equals the plain scan") {
  std::mt19937_64 rng(99);
  for (int i = 0; i < 25; ++i) {
    auto m = random_measure(rng, 4, false);
    for (auto kind : {NormKind::dual_bl, NormKind::dual_fm}) {
      double fast = dual_norm_oracle(m, kind, 41);
      double naive = detail::oracle_scan_all(m, kind, 41);
      REQUIRE(fast == naive);
    }
  }
}

TEST_CASE("oracle bounds the LP from below and converges") {
  auto m = dirac_pair(0.25, 0.75);
  double exact = dual_norm_value(m, NormKind::dual_bl);
  double prev_gap = 1e9;
  for (int grid : {21, 201, 2001}) {
    double o = dual_norm_oracle(m, NormKind::dual_bl, grid);
    REQUIRE(o <= exact + 1e-9);
    double gap = exact - o;
    REQUIRE(gap <= prev_gap + 1e-12);
    prev_gap = gap;
  }
  CHECK(dual_norm_oracle(m, NormKind::dual_bl, 2001) == Catch::Approx(0.4).margin(2e-3));

  auto single = DiscreteMeasure::dirac(0.37, 1.0);
  CHECK(dual_norm_oracle(single, NormKind::dual_bl, 201) == Catch::Approx(1.0).margin(1e-2));
  CHECK(dual_norm_oracle(DiscreteMeasure{}, NormKind::dual_bl, 201) == 0.0);

  CHECK_THROWS_AS(
      dual_norm_oracle(DiscreteMeasure::from_atoms(
                           {{0.1, 1.0}, {0.2, 1.0}, {0.3, 1.0}, {0.4, 1.0}, {0.5, 1.0}}),
                       NormKind::dual_bl, 41),
      Error);
}

TEST_CASE("oracle tracks the LP on random signed measures") {
  std::mt19937_64 rng(123);
  for (int i = 0; i < 20; ++i) {
    auto m = random_measure(rng, 3, false);
    for (auto kind : {NormKind::dual_bl, NormKind::dual_fm}) {
      double lp = dual_norm_value(m, kind);
      double o = dual_norm_oracle(m, kind, 801);
      REQUIRE(o <= lp + 1e-9);
      REQUIRE(lp - o <= 2e-2);
    }
  }
}

TEST_CASE("witness is feasible and attains the value") {
  std::mt19937_64 rng(31);
  for (int i = 0; i < 20; ++i) {
    auto m = random_measure(rng, 5, false);
    auto r = dual_norm(m, NormKind::dual_bl);  // throws on infeasible witness
    double obj = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j)
      obj += m.atoms()[j].weight * r.witness.values[j];
    REQUIRE(obj == Catch::Approx(r.value).margin(1e-9));
    REQUIRE(r.witness.sup_budget + r.witness.lip_budget <= 1.0 + 1e-9);
  }
}
