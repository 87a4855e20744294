// Acceptance run: one line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "setkoop/checks.hpp"
#include "setkoop/flow.hpp"
#include "setkoop/koopman.hpp"
#include "setkoop/liouville.hpp"
#include "setkoop/perron.hpp"
#include "setkoop/scenario.hpp"
#include "setkoop/spectral.hpp"

using namespace setkoop;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass;
  std::string detail;
};

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

Vector v1(double x) { return Vector::Constant(1, x); }

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

ControlSamplePtr scalars(std::vector<double> v) {
  return std::make_shared<const ControlSampleSet>(ControlSampleSet::scalars(v));
}

ControlSamplePtr ternary() { return scalars({-1.0, 0.0, 1.0}); }

const VectorField kScalar = VectorField::scalar_affine(-1.0);
const SpatialGrid kLine = SpatialGrid::cube(1, -2.0, 2.0, 41);

Observable bump() { return Observable::bump(v1(0.0), 2.0); }

std::vector<double> halving(double h0, int count) {
  std::vector<double> h;
  for (int k = 0; k < count; ++k) h.push_back(h0 * std::ldexp(1.0, -k));
  return h;
}

bool ratios_in(const std::vector<double>& values, double lo, double hi) {
  const std::vector<double> tail(values.end() - 3, values.end());
  for (double r : successive_ratios(tail))
    if (!(r >= lo && r <= hi)) return false;
  return true;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::string scenario_path(const char* name) { return std::string(SETKOOP_SCENARIO_DIR) + "/" + name; }

// ---------------------------------------------------------------------------

Verdict flow_oracles() {
  double worst = 0.0;
  auto u = ternary();
  for (int id = 0; id < 3; ++id) {
    const auto signal = ControlSignal::constant(u, 1.0, id);
    for (double t : {0.3, 1.0}) {
      const auto flowed = flow_on_grid(kScalar, signal, 0.0, t, kLine, 1e-3);
      for (std::size_t n = 0; n < kLine.size(); ++n) {
        const double exact = oracle::scalar_affine(-1.0, u->at(id).coords(0), kLine.node(n)(0), t);
        worst = std::max(worst, std::abs(flowed[n](0) - exact));
      }
    }
  }
  const ControlSignal switching(u, 1.0, {0, 2, 1, 0});
  const auto flowed = flow_on_grid(kScalar, switching, 0.0, 1.0, kLine, 1e-3);
  for (std::size_t n = 0; n < kLine.size(); ++n) {
    const double exact =
        oracle::scalar_affine_phases(-1.0, kLine.node(n)(0), {{0.25, -1.0}, {0.25, 1.0}, {0.25, 0.0}, {0.25, -1.0}});
    worst = std::max(worst, std::abs(flowed[n](0) - exact));
  }

  const Matrix a = mat2(-1, 0, 0, -2);
  const auto field = VectorField::linear_feedback(a, Matrix::Zero(2, 1));
  auto k = std::make_shared<const ControlSampleSet>(feedback_controls({Matrix::Zero(1, 2)}));
  const auto plane = SpatialGrid::cube(2, -2.0, 2.0, 21);
  const Eigen::MatrixXd m = oracle::expm(a);
  const auto lin = flow_on_grid(field, ControlSignal::constant(k, 1.0, 0), 0.0, 1.0, plane, 1e-3);
  for (std::size_t n = 0; n < plane.size(); ++n)
    worst = std::max(worst, (lin[n] - m * plane.node(n)).cwiseAbs().maxCoeff());
  return {worst <= 1e-8, "max error " + num(worst)};
}

Verdict zero_field() {
  const auto field = VectorField::zero(1, 1);
  auto u = ternary();
  const auto signals = constant_signals(u, 1.0);
  const auto phi = bump();
  const double step = 1e-2;  // the zero flow is exact at any step
  double worst = 0.0;
  for (const auto& m : koopman_set(phi, field, signals, 0.0, 1.0, kLine, step).members)
    worst = std::max(worst, sup_norm_diff(m, phi, kLine));
  for (const auto& m : liouville_set(phi, field, *u, kLine).members) worst = std::max(worst, sup_norm(m, kLine));
  const ParticleMeasure mu{{{v1(0.3), 1.0}, {v1(-1.2), Complex(0.0, 2.0)}}};
  const auto pushed = pushforward(mu, field, signals[1], 0.0, 1.0, step);
  for (std::size_t i = 0; i < mu.particles.size(); ++i)
    worst = std::max(worst, (pushed.particles[i].position - mu.particles[i].position).norm());
  worst = std::max(worst, check_semigroup(phi, field, splice_closure(signals, 0.5), 0.0, 0.5, 1.0, kLine, step).hausdorff);
  worst = std::max(worst, check_homogeneity(phi, 2.5, field, signals, 0.0, 1.0, kLine, step));
  worst = std::max(worst, check_duality(mu, phi, field, signals[2], 0.0, 1.0, step));
  const auto study = generator_study(phi, field, u, 0.0, halving(0.1, 3), kLine, step);
  for (const auto& r : study.rows) worst = std::max({worst, r.forward_defect, r.backward_defect});

  const auto sc = load_scenario(scenario_path("zero_field.yaml"));
  RunOptions options;
  options.output_dir = (fs::temp_directory_path() / "setkoop_acceptance_zero").string();
  const auto report = run_scenario(sc, options);
  for (const auto& o : report.outcomes) worst = std::max(worst, o.worst_defect);
  fs::remove_all(*options.output_dir);
  return {worst == 0.0 && report.exit_code == exit_code::pass,
          "largest defect " + num(worst) + " over " + std::to_string(report.outcomes.size()) + " checks"};
}

Verdict semigroup() {
  auto u = ternary();
  auto signals = constant_signals(u, 1.0);
  signals.emplace_back(u, 1.0, std::vector<int>{2, 0, 1, 1}, "switching");
  const auto r = check_semigroup(bump(), kScalar, splice_closure(signals, 0.5), 0.0, 0.5, 1.0, kLine, 1e-3);
  return {r.hausdorff <= 1e-6, "hausdorff " + num(r.hausdorff)};
}

Verdict koopman_algebra() {
  auto u = ternary();
  const auto signals = constant_signals(u, 1.0);
  double hom = 0.0;
  for (double alpha : {2.5, -1.0, 0.0}) hom = std::max(hom, check_homogeneity(bump(), alpha, kScalar, signals, 0.0, 1.0, kLine, 1e-3));
  const double sub = check_subadditivity(bump(), Observable::bump(v1(1.0), 1.0), kScalar, signals, 0.0, 1.0, kLine, 1e-3);
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> c(-2.0, 2.0), r(0.5, 2.0);
  int violations = 0;
  for (int i = 0; i < 100; ++i) {
    const auto a = Observable::bump(v1(c(rng)), r(rng));
    const auto b = Observable::bump(v1(c(rng)), r(rng));
    if (!check_lipschitz_in_observable(a, b, kScalar, signals, 0.0, 1.0, kLine, 1e-2).ok) ++violations;
  }
  return {hom <= 1e-12 && sub <= 1e-12 && violations == 0,
          "homogeneity " + num(hom) + ", subadditivity " + num(sub) + ", lipschitz violations " +
              std::to_string(violations) + "/100"};
}

Verdict koopman_generator() {
  const auto study = generator_study(bump(), kScalar, ternary(), 0.0, halving(0.1, 6), kLine, 1e-3);
  const bool rates = std::abs(study.backward_rate - 1.0) <= 0.2 && std::abs(study.forward_rate - 1.0) <= 0.2;
  const bool ratios = ratios_in(study.backward(), 0.35, 0.65) && ratios_in(study.forward(), 0.35, 0.65);
  return {rates && ratios, "rates " + num(study.backward_rate) + " / " + num(study.forward_rate)};
}

Verdict limsup() {
  GeneratorOptions options;
  options.chattering_probes = true;
  options.seed = 11;
  const auto study = generator_study(bump(), kScalar, scalars({-1.0, 1.0}), 0.0, halving(0.1, 6), kLine,
                                     1e-3, options);
  const auto& first = study.rows.front();
  const auto& last = study.rows.back();
  const bool stalls = last.forward_defect >= 0.5 * first.forward_defect && last.forward_defect > 0.1;
  const bool linear = std::abs(study.forward_convexified_rate - 1.0) <= 0.2;
  const double gap = last.forward_defect - last.forward_defect_convexified;
  const bool separated = gap > 10.0 * last.forward_defect_convexified;
  return {stalls && linear && separated, "plain " + num(last.forward_defect) + ", convexified " +
                                             num(last.forward_defect_convexified) + " (rate " +
                                             num(study.forward_convexified_rate) + ")"};
}

Verdict transport() {
  auto u = ternary();
  const ControlSignal signal(u, 1.0, {0, 0, 2, 2}, "generating");
  const double dtau = 1e-2;
  std::vector<double> taus;
  for (int i = 0; i <= 100; ++i) taus.push_back(i * dtau);
  const auto psi = transport_solve(product(bump(), bump()), kScalar, signal, 1.0, taus, 1e-3);
  std::vector<TimedObservable> curve;
  for (std::size_t i = 0; i < taus.size(); ++i) curve.push_back({taus[i], psi[i]});
  double worst = 0.0;
  int mismatches = 0;
  for (const auto& row : inclusion_residual(curve, kScalar, *u, kLine)) {
    if (std::abs(row.tau - 0.5) < dtau * (1 - 1e-9)) continue;  // window straddles the switch
    worst = std::max(worst, row.residual);
    if (row.per_control[signal.id_at(row.tau)] > row.residual) ++mismatches;
  }
  return {worst <= 1e-3 && mismatches == 0,
          "residual " + num(worst) + ", argmin mismatches " + std::to_string(mismatches)};
}

Verdict duality() {
  auto u = ternary();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), w(-1.0, 1.0), r(0.5, 2.0);
  std::uniform_int_distribution<int> id(0, 2);
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    ParticleMeasure mu;
    for (int k = 0; k < 3; ++k) mu.particles.push_back({v1(pos(rng)), Complex(w(rng), w(rng))});
    const auto phi = Observable::bump(v1(pos(rng)), r(rng));
    const ControlSignal signal(u, 1.0, {id(rng), id(rng), id(rng), id(rng)});
    worst = std::max(worst, check_duality(mu, phi, kScalar, signal, 0.0, 1.0, 1e-3));
  }
  return {worst <= 1e-12, "max defect " + num(worst)};
}

Verdict perron() {
  auto u = ternary();
  const auto mu = ParticleMeasure::dirac(v1(-0.52));
  const TestBank bank{{bump(), Observable::bump(v1(1.0), 2.0), product(bump(), bump())}};
  const auto rows = perron_generator_study(mu, kScalar, u, 0.0, halving(0.1, 6), bank, 1e-3);
  bool ok = true;
  double lo = 1.0, hi = 0.0;
  for (int id = 0; id < 3; ++id) {
    const auto res = residuals_for_control(rows, id);
    const std::vector<double> tail(res.end() - 3, res.end());
    for (double ratio : successive_ratios(tail)) {
      lo = std::min(lo, ratio);
      hi = std::max(hi, ratio);
      ok = ok && ratio >= 0.35 && ratio <= 0.65;
    }
  }
  return {ok, "ratios in [" + num(lo) + ", " + num(hi) + "]"};
}

Verdict adjoint() {
  auto u = ternary();
  auto signals = constant_signals(u, 1.0);
  signals.emplace_back(u, 1.0, std::vector<int>{2, 0, 1, 0}, "switching");
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> pos(-2.0, 2.0), r(0.5, 2.0);
  std::normal_distribution<double> normal;
  double margin = 1e300, gap = 0.0;
  for (int i = 0; i < 50; ++i) {
    ParticleMeasure mu;
    for (int k = 0; k < 3; ++k) {
      const double x = pos(rng), re = normal(rng), im = normal(rng);
      mu.particles.push_back({v1(x), Complex(re, im)});
    }
    const double c1 = pos(rng), r1 = r(rng), c2 = pos(rng), r2 = r(rng);
    const TestBank bank{{Observable::bump(v1(c1), r1), Observable::bump(v1(c2), r2)}};
    const auto rep = check_adjoint_inequality(mu, kScalar, signals, 0.0, 1.0, bank, 1e-3, 8, i);
    margin = std::min(margin, rep.worst_margin);
    gap = std::max(gap, rep.matched_gap);
  }
  return {margin >= -1e-9 && gap <= 1e-12, "worst margin " + num(margin) + ", matched gap " + num(gap)};
}

Verdict spectral() {
  const auto plane = SpatialGrid::cube(2, -2.0, 2.0, 11);
  const double pi = std::acos(-1.0);
  double lio = 0.0, map = 0.0, converse = 0.0;
  bool inconclusive = false;
  const std::vector<double> hs = halving(0.1, 6);
  struct System {
    Matrix a, b, k;
  };
  // the second closed loop is the rotation [[0, 1], [-1, 0]]
  const std::vector<System> systems{{mat2(-1, 0, 0, -2), Matrix::Zero(2, 1), Matrix::Zero(1, 2)},
                                    {mat2(-1, 0, 0, -2), Matrix::Identity(2, 2), mat2(1, 1, -1, 2)}};
  for (const auto& [a, b, k] : systems) {
    const auto field = VectorField::linear_feedback(a, b);
    auto controls = std::make_shared<const ControlSampleSet>(feedback_controls({k}));
    for (const auto& p : liouville_eigenpairs_linear(a, b, {k})) {
      lio = std::max(lio, verify_liouville_eigen(p, field, plane));
      for (double t : {1.0, pi}) map = std::max(map, verify_spectral_mapping(p, field, 0.0, t, plane, 1e-3));
      const auto probe = converse_spectral_probe(p.eigenfunction(), field, constant_signals(controls, 1.0), 0.0,
                                                 hs, plane, 1e-3);
      if (probe.inconclusive) {
        inconclusive = true;
        continue;
      }
      converse = std::max(converse, std::abs(probe.rows.back().lambda_est - p.lambda) / hs.back());
    }
  }
  return {lio <= 1e-8 && map <= 1e-6 && converse <= 10.0 && !inconclusive,
          "liouville " + num(lio) + ", mapping " + num(map) + ", converse |err|/h_min " + num(converse)};
}

Verdict eigen_products() {
  const Matrix a = mat2(-1, 0, 0, -2);
  const auto pairs = liouville_eigenpairs_linear(a, Matrix::Zero(2, 1), {Matrix::Zero(1, 2)});
  const auto field = VectorField::linear_feedback(a, Matrix::Zero(2, 1));
  const double lambda = (pairs[0].lambda + pairs[1].lambda).real();
  const double r = eigen_product_check(pairs[1], pairs[0], 1.0, 1.0, field, SpatialGrid::cube(2, -2.0, 2.0, 11));
  return {lambda == -3.0 && r <= 1e-10, "eigenvalue " + num(lambda) + ", residual " + num(r)};
}

Verdict continuity() {
  auto u = ternary();
  const auto reference = ControlSignal::constant(u, 1.0, 0);
  std::vector<ControlSignal> perturbations;
  const int n = 64;
  for (int k = 1; k <= 6; ++k) {
    std::vector<int> values(n, 0);
    std::fill(values.begin(), values.begin() + (n >> k), 2);
    perturbations.emplace_back(u, 1.0, values);
  }
  const auto rows = check_continuity_in_control(kScalar, reference, perturbations, kLine, 0.0, 1.0, 1e-3);
  double oracle_err = 0.0;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const double w = std::ldexp(1.0, -static_cast<int>(k + 1));
    oracle_err = std::max(oracle_err, std::abs(rows[k].flow_discrepancy - 2.0 * (1.0 - std::exp(-w)) * std::exp(-(1.0 - w))));
  }
  const bool monotone = discrepancies_non_increasing(rows, 1.1);
  return {monotone && oracle_err <= 1e-8, std::string(monotone ? "monotone" : "not monotone") +
                                              ", oracle error " + num(oracle_err)};
}

Verdict end_to_end() {
  const auto sc = load_scenario(scenario_path("scalar_affine_full.yaml"));
  const fs::path base = fs::temp_directory_path() / "setkoop_acceptance_e2e";
  fs::remove_all(base);
  double slowest = 0.0;
  int codes[2];
  for (int i = 0; i < 2; ++i) {
    RunOptions options;
    options.output_dir = (base / std::to_string(i)).string();
    const auto start = std::chrono::steady_clock::now();
    codes[i] = run_scenario(sc, options).exit_code;
    slowest = std::max(slowest, std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  }
  bool identical = true;
  std::size_t files = 0;
  for (const auto& entry : fs::directory_iterator(base / "0")) {
    const auto other = base / "1" / entry.path().filename();
    identical = identical && fs::exists(other) && read_file(entry.path()) == read_file(other);
    ++files;
  }
  fs::remove_all(base);
  const bool ok = codes[0] == 0 && codes[1] == 0 && slowest < 60.0 && identical && files > 1;
  return {ok, "exit codes " + std::to_string(codes[0]) + "/" + std::to_string(codes[1]) + ", slowest run " +
                  num(slowest) + " s, " + std::to_string(files) + " files " +
                  (identical ? "identical" : "differ")};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Verdict()> run;
    double budget;  // seconds, 0 for none
  };
  const std::vector<Criterion> criteria{
      {1, "flow oracle agreement", flow_oracles, 5.0},
      {2, "zero-field identities", zero_field, 5.0},
      {3, "semigroup law", semigroup, 0.0},
      {4, "koopman algebra", koopman_algebra, 0.0},
      {5, "koopman generator", koopman_generator, 30.0},
      {6, "limsup convexification", limsup, 0.0},
      {7, "transport inclusion", transport, 0.0},
      {8, "koopman-perron duality", duality, 0.0},
      {9, "perron generator", perron, 0.0},
      {10, "adjoint inequality", adjoint, 0.0},
      {11, "spectral mapping", spectral, 0.0},
      {12, "eigen products", eigen_products, 0.0},
      {13, "continuity in control", continuity, 0.0},
      {14, "end-to-end scenario", end_to_end, 0.0},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v{false, ""};
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.budget > 0.0 && elapsed >= c.budget) {
      v.pass = false;
      v.detail += ", over the " + num(c.budget) + " s budget";
    }
    if (!v.pass) ++failures;
    std::printf("criterion %d: %s %s: %s (%.2f s)\n", c.id, v.pass ? "PASS" : "FAIL", c.name, v.detail.c_str(),
                elapsed);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
