#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "setkoop/errors.hpp"
#include "setkoop/koopman.hpp"

using namespace setkoop;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

ControlSamplePtr scalars(std::vector<double> v) {
  return std::make_shared<const ControlSampleSet>(ControlSampleSet::scalars(v));
}

const SpatialGrid kGrid = SpatialGrid::cube(1, -2.0, 2.0, 5);

Observable bump() { return Observable::bump(v1(0.0), 2.0); }

}  // namespace

TEST_CASE("koopman set of the stable scalar system") {
  auto u = scalars({0.0});
  const auto set = koopman_set(bump(), VectorField::scalar_affine(-1.0),
                               constant_signals(u, 1.0), 0.0, std::log(2.0), kGrid, 1e-3);
  REQUIRE(set.size() == 1);
  // node 4 is x = 2, which flows to 1 where the bump is 0.5625
  CHECK(std::abs(set.members[0].values_on(kGrid)[4] - 0.5625) < 1e-9);
  CHECK(set.labels[0] == constant_signals(u, 1.0)[0].name());
  CHECK_THROWS_AS(koopman_set(bump(), VectorField::scalar_affine(-1.0), {}, 0.0, 1.0, kGrid, 1e-3),
                  InvalidArgument);
}

TEST_CASE("koopman set members follow the closed-form flow") {
  auto u = scalars({-1.0, 0.0, 1.0});
  const auto signals = constant_signals(u, 1.0);
  const auto set = koopman_set(bump(), VectorField::scalar_affine(-1.0), signals, 0.2, 0.9, kGrid, 1e-3);
  for (std::size_t i = 0; i < set.size(); ++i) {
    const double ui = u->at(static_cast<int>(i)).coords(0);
    const auto values = set.members[i].values_on(kGrid);
    for (std::size_t n = 0; n < kGrid.size(); ++n) {
      const double y = oracle::scalar_affine(-1.0, ui, kGrid.node(n)(0), 0.7);
      CHECK(std::abs(values[n] - oracle::bump(y, 0.0, 2.0)) < 1e-10);
    }
  }
}

TEST_CASE("splice closure adds the missing splices") {
  auto u = scalars({-1.0, 1.0});
  const auto closed = splice_closure(constant_signals(u, 1.0), 0.5);
  REQUIRE(closed.size() == 4);
  CHECK(closed[2].values() == std::vector<int>{0, 1});
  CHECK(closed[3].values() == std::vector<int>{1, 0});
  CHECK(splice_closure(closed, 0.5).size() == 4);
}

TEST_CASE("semigroup property") {
  auto u = scalars({-1.0, 0.0, 1.0});
  const auto signals = splice_closure(constant_signals(u, 1.0), 0.5);
  const auto field = VectorField::scalar_affine(-1.0);

  SUBCASE("commensurate steps reproduce the direct flow") {
    const auto r = check_semigroup(bump(), field, signals, 0.0, 0.5, 1.0, kGrid, 1e-3);
    CHECK(r.hausdorff <= semigroup_tolerance(1e-3, 0.0, 1.0));
  }
  SUBCASE("a step that does not divide the pieces still agrees to integrator accuracy") {
    const auto r = check_semigroup(bump(), field, signals, 0.0, 0.5, 1.0, kGrid, 7e-4);
    CHECK(r.hausdorff > 0.0);
    CHECK(r.hausdorff < 1e-9);
  }
  SUBCASE("zero field") {
    const auto family = splice_closure(constant_signals(u, 1.0), 0.3);
    const auto r = check_semigroup(bump(), VectorField::zero(1, 1), family, 0.0, 0.3, 0.8, kGrid, 1e-2);
    CHECK(r.hausdorff == 0.0);
  }
  SUBCASE("grid composition only adds interpolation error") {
    const auto fine = SpatialGrid::cube(1, -2.0, 2.0, 81);
    const auto r = check_semigroup(bump(), field, signals, 0.0, 0.5, 1.0, fine, 1e-3,
                                   CompositionMode::grid);
    CHECK(r.hausdorff < 1e-2);
  }
  SUBCASE("families not closed under splicing are rejected") {
    CHECK_THROWS_AS(check_semigroup(bump(), field, constant_signals(u, 1.0), 0.0, 0.5, 1.0, kGrid, 1e-3),
                    InvalidArgument);
  }
}

TEST_CASE("positive homogeneity and subadditivity") {
  auto u = scalars({-1.0, 0.0, 1.0});
  const auto signals = constant_signals(u, 1.0);
  const auto field = VectorField::scalar_affine(-1.0);
  for (double alpha : {2.5, -1.0, 0.0, 0.3}) {
    CHECK(check_homogeneity(bump(), alpha, field, signals, 0.0, 1.0, kGrid, 1e-3) <= 1e-12);
  }
  const auto other = Observable::bump(v1(0.5), 1.0);
  CHECK(check_subadditivity(bump(), other, field, signals, 0.0, 1.0, kGrid, 1e-3) <= 1e-12);
  CHECK(check_subadditivity(bump(), Complex(-1.0) * bump(), field, signals, 0.0, 1.0, kGrid, 1e-3) <= 1e-12);
}

TEST_CASE("lipschitz in the observable on random pairs") {
  auto u = scalars({-1.0, 0.0, 1.0});
  const auto signals = constant_signals(u, 1.0);
  const auto field = VectorField::scalar_affine(-1.0);
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> center(-1.0, 1.0), radius(0.5, 2.0), scale(-2.0, 2.0);
  for (int i = 0; i < 100; ++i) {
    const auto p1 = Complex(scale(rng)) * Observable::bump(v1(center(rng)), radius(rng));
    const auto p2 = Complex(scale(rng)) * Observable::bump(v1(center(rng)), radius(rng));
    const auto r = check_lipschitz_in_observable(p1, p2, field, signals, 0.0, 1.0, kGrid, 1e-2);
    CHECK(r.ok);
    CHECK(r.lhs <= r.rhs + 1e-12);
  }
  const auto same = check_lipschitz_in_observable(bump(), bump(), field, signals, 0.0, 1.0, kGrid, 1e-2);
  CHECK(same.lhs == 0.0);
  CHECK(same.rhs == 0.0);
}

TEST_CASE("observable curves follow the schedule") {
  auto u = scalars({-1.0, 1.0});
  const auto field = VectorField::scalar_affine(-1.0);
  const auto lo = ControlSignal::constant(u, 1.0, 0);
  const auto hi = ControlSignal::constant(u, 1.0, 1);
  const std::vector<ScheduleEntry> schedule{{0.0, 0.5, lo}, {0.5, 1.0, hi}};
  const auto curve = build_observable_curve(bump(), field, 0.0, {0.25, 0.5, 1.0}, schedule, kGrid, 1e-3);
  REQUIRE(curve.size() == 3);
  CHECK(curve[0].label == lo.name());
  CHECK(curve[1].label == hi.name());
  CHECK(curve[2].label == hi.name());
  const auto values = curve[2].value.values_on(kGrid);
  for (std::size_t n = 0; n < kGrid.size(); ++n) {
    const double y = oracle::scalar_affine(-1.0, 1.0, kGrid.node(n)(0), 1.0);
    CHECK(std::abs(values[n] - oracle::bump(y, 0.0, 2.0)) < 1e-10);
  }
  const std::vector<ScheduleEntry> gap{{0.0, 0.4, lo}, {0.5, 1.0, hi}};
  CHECK_THROWS_AS(build_observable_curve(bump(), field, 0.0, {0.5}, gap, kGrid, 1e-3), InvalidArgument);
  CHECK_THROWS_AS(build_observable_curve(bump(), field, 0.0, {0.5}, {}, kGrid, 1e-3), InvalidArgument);
}
