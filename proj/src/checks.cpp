#include "setkoop/checks.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <limits>
#include <random>
#include <sstream>

#include "setkoop/csv.hpp"
#include "setkoop/flow.hpp"
#include "setkoop/koopman.hpp"
#include "setkoop/liouville.hpp"
#include "setkoop/perron.hpp"
#include "setkoop/set_ops.hpp"
#include "setkoop/spectral.hpp"

namespace setkoop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<ControlSignal> build_signals(const Scenario& sc, const ControlSamplePtr& controls,
                                         std::uint64_t seed) {
  auto signals = constant_signals(controls, sc.horizon);
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> pick(0, static_cast<int>(controls->size()) - 1);
  for (int i = 0; i < sc.random_signals; ++i) {
    std::vector<int> values(sc.segments);
    for (auto& v : values) v = pick(rng);
    signals.emplace_back(controls, sc.horizon, std::move(values), "rand" + std::to_string(i));
  }
  return signals;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

Vector random_point(std::mt19937_64& rng, const SpatialGrid& grid) {
  Vector x(grid.dim());
  for (int k = 0; k < grid.dim(); ++k) x(k) = uniform(rng, grid.lower()(k), grid.upper()(k));
  return x;
}

Observable random_bump(std::mt19937_64& rng, const SpatialGrid& grid) {
  const double half = 0.5 * (grid.upper() - grid.lower()).minCoeff();
  const Vector c = random_point(rng, grid);
  return Observable::bump(c, uniform(rng, 0.25 * half, half));
}

ParticleMeasure random_measure(std::mt19937_64& rng, const SpatialGrid& grid, int particles) {
  std::normal_distribution<double> normal;
  ParticleMeasure mu;
  for (int i = 0; i < particles; ++i) {
    const Vector x = random_point(rng, grid);
    const double re = normal(rng);
    const double im = normal(rng);
    mu.particles.push_back({x, Complex(re, im)});
  }
  return mu;
}

Observable shifted_bump(const CheckContext& ctx) {
  const Vector shift = 0.25 * (ctx.grid.upper() - ctx.grid.lower());
  return Observable::bump(ctx.scenario.center + shift, ctx.scenario.radius);
}

bool all_below(const std::vector<double>& values, double eps) {
  return std::all_of(values.begin(), values.end(), [&](double v) { return std::abs(v) <= eps; });
}

double rate_error(double rate) { return std::isfinite(rate) ? std::abs(rate - 1.0) : kInf; }

CheckOutcome outcome(double worst, std::string csv, std::string message = {}) {
  CheckOutcome out;
  out.status = CheckStatus::pass;
  out.worst_defect = worst;
  out.csv = std::move(csv);
  out.message = std::move(message);
  return out;
}

std::string header(std::initializer_list<const char*> names) {
  std::ostringstream out;
  write_csv_row(out, std::vector<std::string>(names.begin(), names.end()));
  return out.str();
}

// ---- controlled_flow ----------------------------------------------------

CheckOutcome run_flow_estimates(const CheckContext& ctx, double) {
  const auto r = check_flow_estimates(ctx.field, ctx.signals, ctx.grid, ctx.grid.max_norm(), ctx.step);
  std::ostringstream csv;
  csv << header({"max_norm_observed", "lipschitz_observed", "gronwall_bound"});
  write_csv_row(csv, std::vector<double>{r.max_norm_observed, r.lipschitz_observed, r.gronwall_bound});
  const double worst = r.growth_ok ? std::max(0.0, r.max_norm_observed - r.gronwall_bound) : kInf;
  return outcome(worst, csv.str());
}

CheckOutcome run_continuity(const CheckContext& ctx, double) {
  const auto& sc = ctx.scenario;
  const int alt = static_cast<int>(ctx.controls->size()) - 1;
  const auto reference = ControlSignal::constant(ctx.controls, sc.horizon, 0);
  const int n = 1 << sc.count;
  std::vector<ControlSignal> perturbations;
  for (int k = 1; k <= sc.count; ++k) {
    std::vector<int> values(n, 0);
    std::fill(values.begin(), values.begin() + (n >> k), alt);
    perturbations.emplace_back(ctx.controls, sc.horizon, std::move(values), "pert" + std::to_string(k));
  }
  const auto rows = check_continuity_in_control(ctx.field, reference, perturbations, ctx.grid,
                                                sc.tau, sc.t, ctx.step);
  std::ostringstream csv;
  csv << header({"control_distance", "flow_discrepancy"});
  double worst = 0.0;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    write_csv_row(csv, std::vector<double>{rows[i].control_distance, rows[i].flow_discrepancy});
    if (i) worst = std::max(worst, rows[i].flow_discrepancy - 1.1 * rows[i - 1].flow_discrepancy);
  }
  return outcome(worst, csv.str());
}

// ---- koopman ------------------------------------------------------------

CheckOutcome run_semigroup(const CheckContext& ctx, double) {
  const auto& sc = ctx.scenario;
  const auto family = splice_closure(ctx.signals, sc.s);
  const auto r = check_semigroup(ctx.phi, ctx.field, family, sc.tau, sc.s, sc.t, ctx.grid, ctx.step);
  std::ostringstream csv;
  csv << header({"forward_defect", "backward_defect", "hausdorff"});
  write_csv_row(csv, std::vector<double>{r.forward_defect, r.backward_defect, r.hausdorff});
  return outcome(r.hausdorff, csv.str());
}

CheckOutcome run_homogeneity(const CheckContext& ctx, double) {
  const auto& sc = ctx.scenario;
  std::ostringstream csv;
  csv << header({"alpha", "defect"});
  double worst = 0.0;
  for (double alpha : {2.5, -1.0, 0.0}) {
    const double d = check_homogeneity(ctx.phi, alpha, ctx.field, ctx.signals, sc.tau, sc.t, ctx.grid, ctx.step);
    write_csv_row(csv, std::vector<double>{alpha, d});
    worst = std::max(worst, d);
  }
  return outcome(worst, csv.str());
}

CheckOutcome run_subadditivity(const CheckContext& ctx, double) {
  const auto& sc = ctx.scenario;
  const double d = check_subadditivity(ctx.phi, shifted_bump(ctx), ctx.field, ctx.signals, sc.tau,
                                       sc.t, ctx.grid, ctx.step);
  std::ostringstream csv;
  csv << header({"defect"});
  write_csv_row(csv, std::vector<double>{d});
  return outcome(d, csv.str());
}

CheckOutcome run_lipschitz(const CheckContext& ctx, double) {
  const auto& sc = ctx.scenario;
  std::mt19937_64 rng(ctx.seed);
  std::ostringstream csv;
  csv << header({"pair", "lhs", "rhs"});
  double worst = 0.0;
  for (int i = 0; i < sc.lipschitz_pairs; ++i) {
    const auto a = random_bump(rng, ctx.grid);
    const auto b = random_bump(rng, ctx.grid);
    const auto r = check_lipschitz_in_observable(a, b, ctx.field, ctx.signals, sc.tau, sc.t, ctx.grid, ctx.step);
    write_csv_row(csv, std::vector<double>{static_cast<double>(i), r.lhs, r.rhs});
    worst = std::max(worst, r.lhs - r.rhs);
  }
  return outcome(worst, csv.str());
}

// ---- liouville ----------------------------------------------------------

GeneratorStudy generator(const CheckContext& ctx, bool probes) {
  GeneratorOptions options;
  options.horizon = ctx.scenario.horizon;
  options.seed = ctx.seed;
  options.chattering_probes = probes;
  return generator_study(ctx.phi, ctx.field, ctx.controls, ctx.scenario.tau, ctx.scenario.h_values(),
                         ctx.grid, ctx.step, options);
}

std::string generator_csv(const GeneratorStudy& study) {
  std::ostringstream csv;
  write_generator_csv(csv, study);
  return csv.str();
}

CheckOutcome run_generator_koopman(const CheckContext& ctx, double) {
  const auto study = generator(ctx, false);
  if (all_below(study.backward(), 0.0) && all_below(study.forward(), 0.0))
    return outcome(0.0, generator_csv(study), "all defects vanish");
  return outcome(std::max(rate_error(study.backward_rate), rate_error(study.forward_rate)),
                 generator_csv(study));
}

CheckOutcome run_limsup(const CheckContext& ctx, double) {
  const auto study = generator(ctx, true);
  if (all_below(study.forward(), 0.0)) return outcome(0.0, generator_csv(study), "all defects vanish");
  auto out = outcome(rate_error(study.forward_convexified_rate), generator_csv(study));
  const auto& last = study.rows.back();
  if (!(last.forward_defect - last.forward_defect_convexified > 10.0 * last.forward_defect_convexified)) {
    out.status = CheckStatus::fail;
    out.message = "plain and convexified defects are not separated";
  }
  return out;
}

/// First control before s, last control after it.
ControlSignal switching_signal(const CheckContext& ctx) {
  const auto& sc = ctx.scenario;
  for (int n = 1; n <= 4096; ++n) {
    const double position = sc.s / sc.horizon * n;
    if (std::abs(position - std::round(position)) <= 1e-9 * n)
      return ControlSignal::splice(ctx.signals.front(), ctx.signals[ctx.controls->size() - 1], sc.s, n);
  }
  throw InvalidArgument("time.s is not commensurate with the horizon");
}

CheckOutcome run_transport(const CheckContext& ctx, double) {
  const auto& sc = ctx.scenario;
  const ControlSignal signal = sc.random_signals > 0 ? ctx.signals[ctx.controls->size()]
                                                     : switching_signal(ctx);
  const Observable phi = product(ctx.phi, ctx.phi);
  const int n = static_cast<int>(std::lround((sc.t - sc.tau) / sc.dtau));
  std::vector<double> taus;
  for (int i = 0; i <= n; ++i) taus.push_back(sc.tau + i * sc.dtau);
  const auto psi = transport_solve(phi, ctx.field, signal, sc.t, taus, ctx.step);
  std::vector<TimedObservable> curve;
  for (std::size_t i = 0; i < taus.size(); ++i) curve.push_back({taus[i], psi[i]});
  const auto rows = inclusion_residual(curve, ctx.field, *ctx.controls, ctx.grid);

  std::vector<double> switches;
  for (int k = 1; k < signal.segments(); ++k)
    if (signal.values()[k] != signal.values()[k - 1]) switches.push_back(k * signal.segment_length());

  std::ostringstream csv;
  csv << header({"tau", "residual", "control_id", "generating_id"});
  double worst = 0.0;
  int mismatches = 0;
  for (const auto& row : rows) {
    const bool straddles = std::any_of(switches.begin(), switches.end(), [&](double s) {
      return s > row.tau - sc.dtau * (1 - 1e-9) && s < row.tau + sc.dtau * (1 - 1e-9);
    });
    if (straddles) continue;
    const int generating = signal.id_at(row.tau);
    write_csv_row(csv, std::vector<double>{row.tau, row.residual, static_cast<double>(row.control_id),
                                           static_cast<double>(generating)});
    worst = std::max(worst, row.residual);
    if (row.per_control[generating] > row.residual) ++mismatches;
  }
  auto out = outcome(worst, csv.str());
  if (mismatches) {
    out.status = CheckStatus::fail;
    out.message = std::to_string(mismatches) + " samples select a control other than the generating one";
  }
  return out;
}

// ---- perron_frobenius ---------------------------------------------------

CheckOutcome run_duality(const CheckContext& ctx, double) {
  const auto& sc = ctx.scenario;
  std::mt19937_64 rng(ctx.seed);
  std::uniform_int_distribution<std::size_t> pick(0, ctx.signals.size() - 1);
  std::ostringstream csv;
  csv << header({"trial", "defect"});
  double worst = 0.0;
  for (int i = 0; i < sc.duality_trials; ++i) {
    const auto mu = random_measure(rng, ctx.grid, 3);
    const auto phi = random_bump(rng, ctx.grid);
    const auto& u = ctx.signals[pick(rng)];
    const double d = check_duality(mu, phi, ctx.field, u, sc.tau, sc.t, ctx.step);
    write_csv_row(csv, std::vector<double>{static_cast<double>(i), d});
    worst = std::max(worst, d);
  }
  return outcome(worst, csv.str());
}

CheckOutcome run_perron_generator(const CheckContext& ctx, double) {
  const auto& sc = ctx.scenario;
  const Vector x0 = ctx.grid.lower() + 0.37 * (ctx.grid.upper() - ctx.grid.lower());
  const auto mu = ParticleMeasure::dirac(x0);
  TestBank bank{{ctx.phi, shifted_bump(ctx), product(ctx.phi, ctx.phi)}};
  const auto rows = perron_generator_study(mu, ctx.field, ctx.controls, sc.tau, sc.h_values(), bank,
                                           ctx.step, sc.horizon);
  std::ostringstream csv;
  csv << header({"h", "control_id", "residual"});
  for (const auto& r : rows)
    write_csv_row(csv, std::vector<double>{r.h, static_cast<double>(r.control_id), r.residual});

  double worst = 0.0;
  for (const auto& p : ctx.controls->points()) {
    const auto res = residuals_for_control(rows, p.id);
    if (all_below(res, 1e-13)) continue;
    if (res.size() < 3) continue;
    const std::vector<double> tail(res.end() - 3, res.end());
    for (double ratio : successive_ratios(tail))
      worst = std::max(worst, std::isfinite(ratio) ? std::abs(ratio / sc.factor - 1.0) : kInf);
  }
  return outcome(worst, csv.str());
}

CheckOutcome run_adjoint(const CheckContext& ctx, double) {
  const auto& sc = ctx.scenario;
  std::mt19937_64 rng(ctx.seed);
  std::ostringstream csv;
  csv << header({"trial", "worst_margin", "matched_gap"});
  double worst = 0.0;
  for (int i = 0; i < sc.adjoint_trials; ++i) {
    const auto mu = random_measure(rng, ctx.grid, 3);
    TestBank bank{{random_bump(rng, ctx.grid), random_bump(rng, ctx.grid)}};
    const auto r = check_adjoint_inequality(mu, ctx.field, ctx.signals, sc.tau, sc.t, bank, ctx.step,
                                            8, ctx.seed + static_cast<std::uint64_t>(i));
    write_csv_row(csv, std::vector<double>{static_cast<double>(i), r.worst_margin, r.matched_gap});
    worst = std::max({worst, -r.worst_margin, r.matched_gap});
  }
  return outcome(worst, csv.str());
}

// ---- spectral -----------------------------------------------------------

std::vector<EigenPair> eigenpairs(const CheckContext& ctx) {
  return liouville_eigenpairs_linear(ctx.scenario.state_matrix, ctx.scenario.input_matrix,
                                     ctx.scenario.feedbacks);
}

struct EigenTable {
  std::vector<EigenPair> pairs;
  std::vector<double> liouville;
  std::vector<double> mapping;
  std::string csv;
};

EigenTable eigen_table(const CheckContext& ctx) {
  EigenTable table;
  table.pairs = eigenpairs(ctx);
  for (const auto& p : table.pairs) {
    table.liouville.push_back(verify_liouville_eigen(p, ctx.field, ctx.grid));
    table.mapping.push_back(
        verify_spectral_mapping(p, ctx.field, ctx.scenario.tau, ctx.scenario.t, ctx.grid, ctx.step));
  }
  std::ostringstream csv;
  write_eigenpair_csv(csv, table.pairs, table.liouville, table.mapping);
  table.csv = csv.str();
  return table;
}

double max_of(const std::vector<double>& v) {
  return v.empty() ? 0.0 : *std::max_element(v.begin(), v.end());
}

CheckOutcome run_liouville_eigen(const CheckContext& ctx, double) {
  auto table = eigen_table(ctx);
  return outcome(max_of(table.liouville), std::move(table.csv));
}

CheckOutcome run_spectral_mapping(const CheckContext& ctx, double) {
  auto table = eigen_table(ctx);
  return outcome(max_of(table.mapping), std::move(table.csv));
}

CheckOutcome run_eigen_product(const CheckContext& ctx, double) {
  const auto pairs = eigenpairs(ctx);
  std::ostringstream csv;
  csv << header({"feedback_id", "first", "second", "alpha1", "alpha2", "residual"});
  double worst = 0.0;
  auto record = [&](std::size_t i, std::size_t j, double a1, double a2) {
    const double r = eigen_product_check(pairs[i], pairs[j], a1, a2, ctx.field, ctx.grid);
    write_csv_row(csv, std::vector<double>{static_cast<double>(pairs[i].feedback_id), static_cast<double>(i),
                                           static_cast<double>(j), a1, a2, r});
    worst = std::max(worst, r);
  };
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    record(i, i, 2.0, 0.0);
    for (std::size_t j = i + 1; j < pairs.size(); ++j)
      if (pairs[j].feedback_id == pairs[i].feedback_id) record(i, j, 1.0, 1.0);
  }
  return outcome(worst, csv.str());
}

CheckOutcome run_converse_spectral(const CheckContext& ctx, double) {
  const auto pairs = eigenpairs(ctx);
  const auto constants = constant_signals(ctx.controls, ctx.scenario.horizon);
  const auto h = ctx.scenario.h_values();
  std::ostringstream csv;
  csv << header({"pair", "h", "lambda_est_re", "lambda_est_im", "generator_gap", "proportional"});
  double worst = 0.0;
  int inconclusive = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const auto probe = converse_spectral_probe(pairs[i].eigenfunction(), ctx.field, constants,
                                               ctx.scenario.tau, h, ctx.grid, ctx.step);
    for (const auto& r : probe.rows)
      write_csv_row(csv, std::vector<double>{static_cast<double>(i), r.h, r.lambda_est.real(),
                                             r.lambda_est.imag(), r.generator_gap,
                                             r.proportional ? 1.0 : 0.0});
    if (probe.inconclusive) {
      ++inconclusive;
      continue;
    }
    const ConverseRow* smallest = nullptr;
    for (const auto& r : probe.rows)
      if (r.proportional && (!smallest || r.h < smallest->h)) smallest = &r;
    worst = std::max(worst, std::abs(smallest->lambda_est - pairs[i].lambda) / smallest->h);
  }
  return outcome(worst, csv.str(),
                 inconclusive ? std::to_string(inconclusive) + " eigenpairs inconclusive" : "");
}

std::vector<CheckInfo> make_registry() {
  return {
      {"flow_estimates", "controlled_flow", "Well-posedness, stability and representation of solutions",
       "observed sup-norm of flows against the Gronwall bound", 1e-12, false, run_flow_estimates},
      {"continuity_in_control", "controlled_flow", "Continuity in the control",
       "flow discrepancy shrinks with the control distance (10% slack)", 1e-12, false, run_continuity},
      {"semigroup", "koopman", "Semigroup law of set-valued Koopman operators",
       "Hausdorff distance between K_(tau,t) and K_(s,t) o K_(tau,s)", 1e-6, false, run_semigroup},
      {"homogeneity", "koopman", "Positive homogeneity of Koopman sets",
       "K(alpha phi) against alpha K(phi)", 1e-12, false, run_homogeneity},
      {"subadditivity", "koopman", "Subadditivity of Koopman sets",
       "K(phi1 + phi2) inside K(phi1) + K(phi2)", 1e-12, false, run_subadditivity},
      {"lipschitz", "koopman", "Regularity properties of set-valued Koopman operators",
       "one-sided Koopman distance bounded by the flowed sup-norm", 1e-12, false, run_lipschitz},
      {"generator_koopman", "liouville", "Generator of the Koopman semigroups",
       "difference quotients approach the Liouville set at rate one", 0.2, false, run_generator_koopman},
      {"limsup_convexification", "liouville", "Generator of the Koopman semigroups, upper limit",
       "chattering quotients approach the convexified Liouville set only", 0.2, false, run_limsup},
      {"transport", "liouville", "Dynamics of time-dependent Koopman observables",
       "transport residual of pulled-back observables and argmin control", 1e-3, false, run_transport},
      {"duality", "perron_frobenius", "Image-measure formula",
       "<P mu, phi> against <mu, K phi> on seeded triples", 1e-12, false, run_duality},
      {"perron_generator", "perron_frobenius", "Generator of the Perron-Frobenius semigroup",
       "residual ratio over halved h against the h factor", 0.3, false, run_perron_generator},
      {"adjoint", "perron_frobenius", "Set-valued adjoints of the Liouville and Koopman operators",
       "Perron pairings bounded by the best Koopman pairing", 1e-9, false, run_adjoint},
      {"liouville_eigen", "spectral", "Eigenvalues and eigenvectors of closed processes",
       "linear eigenfunctions satisfy grad phi . f = lambda phi", 1e-8, true, run_liouville_eigen},
      {"spectral_mapping", "spectral", "Set-valued spectral mapping theorem",
       "flowed eigenfunctions equal e^{lambda (t - tau)} phi", 1e-6, true, run_spectral_mapping},
      {"eigen_product", "spectral", "On the structure of the point spectrum",
       "products of eigenfunctions of one feedback are eigenfunctions", 1e-8, true, run_eigen_product},
      {"converse_spectral", "spectral", "Set-valued spectral mapping theorem, converse",
       "|lambda_est - lambda| / h at the smallest proportional h", 10.0, true, run_converse_spectral},
  };
}

}  // namespace

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::error: return "error";
    case CheckStatus::diverged: return "diverged";
  }
  return "unknown";
}

CheckContext::CheckContext(Scenario sc)
    : scenario(std::move(sc)),
      field(scenario.field()),
      controls(scenario.controls()),
      grid(scenario.grid()),
      phi(scenario.observable()),
      signals(build_signals(scenario, controls, scenario.seed)),
      seed(scenario.seed),
      step(scenario.step) {}

const std::vector<CheckInfo>& check_registry() {
  static const std::vector<CheckInfo> registry = make_registry();
  return registry;
}

const CheckInfo* find_check(const std::string& name) {
  for (const auto& c : check_registry())
    if (c.name == name) return &c;
  return nullptr;
}

std::string list_checks_text() {
  std::size_t width = 0;
  for (const auto& c : check_registry()) width = std::max(width, c.name.size());
  std::ostringstream out;
  for (const auto& c : check_registry()) {
    out << c.name << std::string(width + 2 - c.name.size(), ' ') << "[" << c.module << "] "
        << c.description << " (" << c.anchor << "; default tolerance "
        << format_number(c.default_tolerance) << ")\n";
  }
  return out.str();
}

void validate_checks(const Scenario& scenario) {
  for (const auto& req : scenario.checks) {
    const auto* info = find_check(req.name);
    if (!info) throw ConfigError("unknown check '" + req.name + "'");
    if (info->needs_linear_feedback && scenario.family != "linear_feedback")
      throw ConfigError("check '" + req.name + "' needs a linear_feedback system");
  }
}

namespace {

CheckOutcome run_one(const CheckContext& ctx, const CheckInfo& info, double tolerance) {
  CheckOutcome out;
  try {
    out = info.run(ctx, tolerance);
    if (!(out.worst_defect <= tolerance)) out.status = CheckStatus::fail;
  } catch (const DivergenceError& e) {
    out = CheckOutcome{};
    out.status = CheckStatus::diverged;
    out.worst_defect = kInf;
    out.message = e.what();
  } catch (const Error& e) {
    out = CheckOutcome{};
    out.status = CheckStatus::error;
    out.worst_defect = kInf;
    out.message = e.what();
  }
  out.name = info.name;
  out.tolerance = tolerance;
  return out;
}

}  // namespace

RunReport run_scenario(Scenario scenario, const RunOptions& options) {
  if (options.seed) scenario.seed = *options.seed;
  if (options.step) {
    if (!(*options.step > 0.0)) throw ConfigError("step override must be positive");
    scenario.step = *options.step;
  }
  if (options.output_dir) scenario.output_dir = *options.output_dir;
  validate_checks(scenario);

  RunReport report;
  report.output_dir = scenario.output_dir;
  const CheckContext ctx(scenario);

  std::vector<std::pair<const CheckInfo*, double>> jobs;
  for (const auto& req : scenario.checks) {
    const auto* info = find_check(req.name);
    jobs.emplace_back(info, req.tolerance.value_or(info->default_tolerance));
  }

  if (options.parallel) {
    std::vector<std::future<CheckOutcome>> futures;
    for (const auto& [info, tol] : jobs)
      futures.push_back(std::async(std::launch::async, run_one, std::cref(ctx), std::cref(*info), tol));
    for (auto& f : futures) report.outcomes.push_back(f.get());
  } else {
    for (const auto& [info, tol] : jobs) report.outcomes.push_back(run_one(ctx, *info, tol));
  }

  namespace fs = std::filesystem;
  const fs::path dir(scenario.output_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
  for (const auto& o : report.outcomes) {
    if (o.csv.empty()) continue;
    std::ofstream out(dir / (o.name + ".csv"), std::ios::binary);
    out << o.csv;
  }
  std::ofstream summary(dir / "summary.csv", std::ios::binary);
  write_csv_row(summary, std::vector<std::string>{"check", "status", "worst_defect", "tolerance"});
  for (const auto& o : report.outcomes)
    write_csv_row(summary, std::vector<std::string>{o.name, to_string(o.status),
                                                    format_number(o.worst_defect),
                                                    format_number(o.tolerance)});
  if (!summary) throw Error("cannot write summary.csv in " + dir.string());

  auto has = [&](CheckStatus s) {
    return std::any_of(report.outcomes.begin(), report.outcomes.end(),
                       [&](const CheckOutcome& o) { return o.status == s; });
  };
  if (has(CheckStatus::diverged)) report.exit_code = exit_code::divergence;
  else if (has(CheckStatus::error)) report.exit_code = exit_code::invalid;
  else if (has(CheckStatus::fail)) report.exit_code = exit_code::check_failure;
  return report;
}

}  // namespace setkoop
