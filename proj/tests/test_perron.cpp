#include <doctest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "oracles.hpp"
#include "setkoop/errors.hpp"
#include "setkoop/perron.hpp"

using namespace setkoop;

namespace {

Vector v1(double x) { return Vector::Constant(1, x); }

ControlSamplePtr scalars(std::vector<double> v) {
  return std::make_shared<const ControlSampleSet>(ControlSampleSet::scalars(v));
}

Observable bump() { return Observable::bump(v1(0.0), 2.0); }

}  // namespace

TEST_CASE("pairings with dirac measures") {
  CHECK(pairing(ParticleMeasure::dirac(v1(0.0)), bump()) == Complex(1.0));
  ParticleMeasure mu{{{v1(0.0), 0.5}, {v1(1.0), 1.0}}};
  // 0.5 * 1 + 1 * 0.5625
  CHECK(pairing(mu, bump()).real() == doctest::Approx(1.0625));
  ParticleMeasure nu{{{v1(1.0), Complex(0.0, 2.0)}}};
  CHECK(pairing(nu, bump()) == Complex(0.0, 1.125));
  CHECK(mu.total_variation() == 1.5);
  CHECK(ParticleMeasure{}.empty());
}

TEST_CASE("pushforward moves particles and keeps weights") {
  auto u = scalars({0.0});
  const auto field = VectorField::scalar_affine(-1.0);
  const auto signal = ControlSignal::constant(u, 1.0, 0);
  const auto pushed = pushforward(ParticleMeasure::dirac(v1(1.0), Complex(0.0, 3.0)), field, signal,
                                  0.0, std::log(2.0), 1e-3);
  REQUIRE(pushed.particles.size() == 1);
  CHECK(pushed.particles[0].position(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(pushed.particles[0].weight == Complex(0.0, 3.0));
  CHECK(std::abs(pairing(pushed, bump()) - Complex(0.0, 3.0 * 0.87890625)) < 1e-10);
}

TEST_CASE("duality between pushforward and pullback") {
  auto u = scalars({-1.0, 0.0, 1.0});
  const auto field = VectorField::scalar_affine(-1.0);
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), w(-1.0, 1.0), t(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    ParticleMeasure mu;
    for (int k = 0; k < 4; ++k) mu.particles.push_back({v1(pos(rng)), Complex(w(rng), w(rng))});
    std::vector<int> values{trial % 3, (trial / 3) % 3};
    const ControlSignal signal(u, 1.0, values);
    double a = t(rng), b = t(rng);
    if (a > b) std::swap(a, b);
    CHECK(check_duality(mu, bump(), field, signal, a, b, 1e-3) <= 1e-12);
  }
}

TEST_CASE("divergence pairing") {
  auto u = scalars({0.0});
  const auto field = VectorField::scalar_affine(-1.0);
  // grad b(1) f(1) = (-0.75)(-1)
  CHECK(divergence_pairing(ParticleMeasure::dirac(v1(1.0)), field, u->at(0), bump()) ==
        Complex(0.75));
  Matrix m(1, 1);
  m << 1.0;
  const auto rough_field = VectorField::control_affine(Primitive::abs(m), {Primitive::constant(v1(1.0))});
  const auto rough = Observable::pullback(bump(), rough_field, ControlSignal::constant(u, 1.0, 0), 0.0, 0.5, 1e-3);
  REQUIRE_FALSE(rough.is_c1());
  CHECK_THROWS_AS(divergence_pairing(ParticleMeasure::dirac(v1(0.0)), field, u->at(0), rough),
                  InvalidArgument);
}

TEST_CASE("generator residuals shrink linearly in h") {
  auto u = scalars({-1.0, 0.0, 1.0});
  const auto field = VectorField::scalar_affine(-1.0);
  ParticleMeasure mu{{{v1(-0.52), 1.0}, {v1(0.7), Complex(0.5, -0.25)}}};
  TestBank bank{{bump(), Observable::bump(v1(0.5), 1.5), product(bump(), bump())}};
  std::vector<double> hs;
  for (int k = 0; k < 6; ++k) hs.push_back(0.1 * std::ldexp(1.0, -k));
  const auto rows = perron_generator_study(mu, field, u, 0.0, hs, bank, 1e-3);
  CHECK(rows.size() == hs.size() * 3);
  for (int id = 0; id < 3; ++id) {
    const auto r = residuals_for_control(rows, id);
    REQUIRE(r.size() == hs.size());
    for (std::size_t i = 3; i < r.size(); ++i) CHECK(std::abs(r[i] / r[i - 1] - 0.5) < 0.15);
  }
  CHECK_THROWS_AS(perron_generator_study(mu, field, u, 0.0, hs, TestBank{}, 1e-3), InvalidArgument);
  CHECK_THROWS_AS(perron_generator_study(mu, field, u, 0.95, {0.1}, bank, 1e-3), InvalidArgument);
}

TEST_CASE("adjoint inequality") {
  const auto field = VectorField::scalar_affine(-1.0);
  ParticleMeasure mu{{{v1(0.3), 1.0}, {v1(-1.1), Complex(-0.5, 0.5)}}};
  TestBank bank{{bump(), Observable::bump(v1(0.5), 1.0)}};

  SUBCASE("single control gives equality") {
    auto u = scalars({0.5});
    const auto report = check_adjoint_inequality(mu, field, constant_signals(u, 1.0), 0.0, 1.0, bank, 1e-3);
    CHECK(std::abs(report.worst_margin) <= 1e-12);
    CHECK(report.matched_gap <= 1e-12);
    CHECK(report.comparisons > 0);
  }
  SUBCASE("a family keeps a non-negative margin") {
    auto u = scalars({-1.0, 0.0, 1.0});
    const auto report = check_adjoint_inequality(mu, field, constant_signals(u, 1.0), 0.2, 0.9, bank, 1e-3,
                                                 16, 5);
    CHECK(report.worst_margin >= -1e-12);
    CHECK(report.matched_gap <= 1e-12);
  }
}

TEST_CASE("measure CSV") {
  std::ostringstream out;
  write_measure_csv(out, ParticleMeasure{{{v1(0.5), Complex(1.0, -2.0)}}});
  CHECK(out.str() == "x_0,w_re,w_im\n0.5,1,-2\n");
}
