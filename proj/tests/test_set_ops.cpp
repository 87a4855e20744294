#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "setkoop/errors.hpp"
#include "setkoop/set_ops.hpp"

using namespace setkoop;

namespace {

const SpatialGrid kGrid = SpatialGrid::cube(1, -2.0, 2.0, 9);

Observable bump() { return Observable::bump(Vector::Zero(1), 2.0); }

ObservableSet set_of(std::initializer_list<Observable> members) {
  ObservableSet s;
  int i = 0;
  for (const auto& m : members) s.add(m, "m" + std::to_string(i++));
  return s;
}

ObservableSet random_set(std::mt19937_64& rng, int size) {
  std::normal_distribution<double> normal;
  ObservableSet s;
  for (int i = 0; i < size; ++i) {
    std::vector<Complex> v(kGrid.size());
    for (auto& z : v) z = Complex(normal(rng), normal(rng));
    s.add(Observable::grid_sampled(kGrid, v), "r");
  }
  return s;
}

}  // namespace

TEST_CASE("hausdorff reports on small sets") {
  const auto single = set_of({bump()});
  const auto r0 = hausdorff(single, single, kGrid);
  CHECK(r0.forward_defect == 0.0);
  CHECK(r0.backward_defect == 0.0);

  const auto r1 = hausdorff(single, set_of({bump(), Complex(2.0) * bump()}), kGrid);
  CHECK(r1.forward_defect == 0.0);
  CHECK(r1.backward_defect == 1.0);
  CHECK(r1.hausdorff == 1.0);

  CHECK(hausdorff(set_of({Observable::zero(1)}), single, kGrid).hausdorff == 1.0);
  CHECK_THROWS_AS(hausdorff(ObservableSet{}, single, kGrid), InvalidArgument);
}

TEST_CASE("hausdorff symmetry, identity, triangle and monotonicity") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    const auto a = random_set(rng, 3), b = random_set(rng, 4), c = random_set(rng, 2);
    const auto ab = hausdorff(a, b, kGrid);
    const auto ba = hausdorff(b, a, kGrid);
    CHECK(ab.forward_defect == ba.backward_defect);
    CHECK(ab.hausdorff == ba.hausdorff);
    CHECK(ab.hausdorff == std::max(ab.forward_defect, ab.backward_defect));
    CHECK(hausdorff(a, a, kGrid).hausdorff == 0.0);
    CHECK(hausdorff(a, c, kGrid).hausdorff <= ab.hausdorff + hausdorff(b, c, kGrid).hausdorff);

    auto bigger = b;
    for (std::size_t i = 0; i < c.size(); ++i) bigger.add(c.members[i], c.labels[i]);
    CHECK(one_sided_defect(a, bigger, kGrid) <= one_sided_defect(a, b, kGrid));
  }
}

TEST_CASE("scaled difference sets") {
  const auto base = bump();
  const double h = 0.125;
  const auto zero = scaled_difference_set(set_of({base}), base, h, kGrid);
  CHECK(sup_norm(zero.members[0], kGrid) == 0.0);

  const auto g = Observable::bump(Vector::Constant(1, 0.5), 1.0);
  const auto shifted = scaled_difference_set(set_of({base + Complex(h) * g}), base, h, kGrid);
  CHECK(sup_norm_diff(shifted.members[0], g, kGrid) < 1e-14);
  CHECK(shifted.labels[0] == "m0");
  CHECK_THROWS_AS(scaled_difference_set(set_of({base}), base, 0.0, kGrid), InvalidArgument);
}

TEST_CASE("kuratowski diagnostics") {
  const auto target = set_of({bump()});
  std::vector<SetSequenceEntry> constant, inflated;
  std::vector<double> hs{0.4, 0.2, 0.1, 0.05};
  for (double h : hs) {
    constant.push_back({h, target});
    inflated.push_back({h, set_of({bump() + Complex(h) * bump()})});
  }
  const auto c = kuratowski_diagnostic(constant, target, kGrid);
  for (const auto& r : c.rows) {
    CHECK(r.forward_defect == 0.0);
    CHECK(r.backward_defect == 0.0);
  }
  CHECK(std::isnan(c.forward_rate));

  const auto inf = kuratowski_diagnostic(inflated, target, kGrid);
  for (std::size_t i = 0; i < hs.size(); ++i) {
    CHECK(inf.rows[i].forward_defect == doctest::Approx(hs[i]));
    CHECK(inf.rows[i].backward_defect == doctest::Approx(hs[i]));
  }
  CHECK(inf.forward_rate == doctest::Approx(1.0));

  // approximants converge to a strict subset of the target
  const auto other = Observable::bump(Vector::Constant(1, 1.0), 0.5);
  const auto two = set_of({bump(), other});
  const auto partial = kuratowski_diagnostic(inflated, two, kGrid);
  const double gap = sup_norm_diff(bump(), other, kGrid);
  for (const auto& r : partial.rows) CHECK(r.backward_defect >= gap - 1e-12);
  CHECK(partial.rows.back().forward_defect == doctest::Approx(0.05));

  std::vector<SetSequenceEntry> bad{{0.1, target}, {0.2, target}};
  CHECK_THROWS_AS(kuratowski_diagnostic(bad, target, kGrid), InvalidArgument);
}

TEST_CASE("convex combinations") {
  const auto single = convex_combinations(set_of({bump()}), 5, 1);
  REQUIRE(single.size() == 6);
  for (const auto& m : single.members) CHECK(sup_norm_diff(m, bump(), kGrid) < 1e-15);

  const auto pair = set_of({Observable::zero(1), bump()});
  const auto half = convex_combination(pair, {0.5, 0.5});
  CHECK(sup_norm_diff(half, Complex(0.5) * bump(), kGrid) == 0.0);

  const auto b2 = Observable::bump(Vector::Constant(1, 1.0), 1.5);
  const auto mixed = convex_combinations(set_of({bump(), b2, Complex(-1.0) * b2}), 20, 9);
  const auto values = evaluate_members(mixed, kGrid);
  for (std::size_t n = 0; n < kGrid.size(); ++n) {
    double lo = 1e300, hi = -1e300;
    for (std::size_t i = 0; i < 3; ++i) {
      lo = std::min(lo, values[i][n].real());
      hi = std::max(hi, values[i][n].real());
    }
    for (std::size_t i = 3; i < values.size(); ++i) {
      CHECK(values[i][n].real() >= lo - 1e-15);
      CHECK(values[i][n].real() <= hi + 1e-15);
    }
  }
  // deterministic in the seed
  const auto again = convex_combinations(set_of({bump(), b2, Complex(-1.0) * b2}), 20, 9);
  CHECK(evaluate_members(again, kGrid) == values);
}

TEST_CASE("simplex weights lie on the simplex") {
  for (int resolution : {0, 4, 7}) {
    for (const auto& w : simplex_weights(3, 50, 42, resolution)) {
      double total = 0.0;
      for (double x : w) {
        CHECK(x >= 0.0);
        total += x;
        if (resolution > 0) CHECK(std::abs(x * resolution - std::round(x * resolution)) < 1e-12);
      }
      CHECK(total == doctest::Approx(1.0));
    }
  }
  CHECK(simplex_weights(1, 3, 0, 4).front() == std::vector<double>{1.0});
}

TEST_CASE("rate fitting and evidence") {
  const std::vector<double> h{0.1, 0.05, 0.025, 0.0125};
  std::vector<double> lin, quad;
  for (double x : h) {
    lin.push_back(3.0 * x);
    quad.push_back(x * x);
  }
  CHECK(fit_log_rate(h, lin) == doctest::Approx(1.0));
  CHECK(fit_log_rate(h, quad) == doctest::Approx(2.0));
  CHECK(std::isnan(fit_log_rate(h, {1.0, 0.0, 1.0, 1.0})));
  for (double r : successive_ratios(lin)) CHECK(r == doctest::Approx(0.5));
  CHECK(linear_rate_evidence(h, lin));
  CHECK_FALSE(linear_rate_evidence(h, {1.0, 1.0, 1.0, 1.0}));
  CHECK_FALSE(linear_rate_evidence(h, {0.1, 0.05, 0.025, 0.05}));
}

TEST_CASE("diagnostic CSV") {
  DiagnosticTable t{{{0.5, 0.25, 0.125}}, 1.0, 2.0};
  std::ostringstream out;
  write_diagnostic_csv(out, t);
  CHECK(out.str() == "h,forward_defect,backward_defect,fitted_rate\n0.5,0.25,0.125,2\n");
}
