#include "setkoop/set_ops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>

#include "setkoop/csv.hpp"
#include "setkoop/errors.hpp"

namespace setkoop {

std::vector<std::vector<Complex>> evaluate_members(const ObservableSet& set,
                                                   const SpatialGrid& grid) {
  std::vector<std::vector<Complex>> out;
  out.reserve(set.size());
  for (const auto& m : set.members) out.push_back(m.values_on(grid));
  return out;
}

double one_sided_defect(const std::vector<std::vector<Complex>>& a,
                        const std::vector<std::vector<Complex>>& b) {
  if (a.empty() || b.empty()) throw InvalidArgument("inclusion defects need nonempty sets");
  double worst = 0.0;
  for (const auto& x : a) {
    double nearest = std::numeric_limits<double>::infinity();
    for (const auto& y : b) nearest = std::min(nearest, sup_norm_diff(x, y));
    worst = std::max(worst, nearest);
  }
  return worst;
}

double one_sided_defect(const ObservableSet& a, const ObservableSet& b, const SpatialGrid& grid) {
  return one_sided_defect(evaluate_members(a, grid), evaluate_members(b, grid));
}

InclusionReport hausdorff(const ObservableSet& a, const ObservableSet& b, const SpatialGrid& grid) {
  if (a.empty() || b.empty()) throw InvalidArgument("hausdorff distance needs nonempty sets");
  const auto va = evaluate_members(a, grid);
  const auto vb = evaluate_members(b, grid);
  InclusionReport r;
  r.forward_defect = one_sided_defect(va, vb);
  r.backward_defect = one_sided_defect(vb, va);
  r.hausdorff = std::max(r.forward_defect, r.backward_defect);
  return r;
}

ObservableSet scaled_difference_set(const ObservableSet& set, const Observable& base, double h,
                                    const SpatialGrid& grid) {
  if (h == 0.0 || !std::isfinite(h)) throw InvalidArgument("difference scale must be nonzero");
  const auto b = base.values_on(grid);
  ObservableSet out;
  for (std::size_t i = 0; i < set.size(); ++i) {
    auto v = set.members[i].values_on(grid);
    for (std::size_t j = 0; j < v.size(); ++j) v[j] = (v[j] - b[j]) / h;
    out.add(Observable::grid_sampled(grid, std::move(v)), set.labels[i]);
  }
  return out;
}

DiagnosticTable kuratowski_diagnostic(const std::vector<SetSequenceEntry>& sequence,
                                      const ObservableSet& target, const SpatialGrid& grid) {
  for (std::size_t i = 1; i < sequence.size(); ++i)
    if (!(sequence[i].h < sequence[i - 1].h))
      throw InvalidArgument("h values must be strictly decreasing");
  for (const auto& e : sequence)
    if (!(e.h > 0.0)) throw InvalidArgument("h values must be positive");
  const auto vt = evaluate_members(target, grid);
  DiagnosticTable table;
  std::vector<double> hs, fw, bw;
  for (const auto& e : sequence) {
    const auto vs = evaluate_members(e.set, grid);
    const DiagnosticRow row{e.h, one_sided_defect(vs, vt), one_sided_defect(vt, vs)};
    table.rows.push_back(row);
    hs.push_back(row.h);
    fw.push_back(row.forward_defect);
    bw.push_back(row.backward_defect);
  }
  table.forward_rate = fit_log_rate(hs, fw);
  table.backward_rate = fit_log_rate(hs, bw);
  return table;
}

std::vector<std::vector<double>> simplex_weights(std::size_t k, std::size_t count,
                                                 std::uint64_t seed, int resolution) {
  if (k == 0) throw InvalidArgument("simplex needs at least one vertex");
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> out;
  out.reserve(count);
  for (std::size_t c = 0; c < count; ++c) {
    std::vector<double> w(k);
    if (resolution > 0) {
      // Uniform composition of `resolution` units into k parts (stars and bars).
      std::vector<int> bars(k - 1);
      std::vector<int> slots(resolution + k - 1);
      std::iota(slots.begin(), slots.end(), 0);
      std::shuffle(slots.begin(), slots.end(), rng);
      std::copy_n(slots.begin(), k - 1, bars.begin());
      std::sort(bars.begin(), bars.end());
      int prev = -1;
      for (std::size_t i = 0; i + 1 < k; ++i) {
        w[i] = static_cast<double>(bars[i] - prev - 1) / resolution;
        prev = bars[i];
      }
      w[k - 1] = static_cast<double>(resolution + static_cast<int>(k) - 2 - prev) / resolution;
    } else {
      std::exponential_distribution<double> expo(1.0);
      double total = 0.0;
      for (auto& x : w) total += (x = expo(rng));
      for (auto& x : w) x /= total;
    }
    out.push_back(std::move(w));
  }
  return out;
}

Observable convex_combination(const ObservableSet& set, const std::vector<double>& weights) {
  if (set.empty() || weights.size() != set.size())
    throw InvalidArgument("one weight per member is required");
  Observable out = Complex(weights[0]) * set.members[0];
  for (std::size_t i = 1; i < set.size(); ++i) out = out + Complex(weights[i]) * set.members[i];
  return out;
}

ObservableSet convex_combinations(const ObservableSet& set, std::size_t count,
                                  std::uint64_t seed) {
  ObservableSet out = set;
  const auto weights = simplex_weights(set.size(), count, seed);
  for (std::size_t c = 0; c < weights.size(); ++c)
    out.add(convex_combination(set, weights[c]), "co" + std::to_string(c));
  return out;
}

double fit_log_rate(const std::vector<double>& h, const std::vector<double>& values) {
  if (h.size() != values.size() || h.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  std::vector<double> x, y;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (!(values[i] > 0.0) || !(h[i] > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    x.push_back(std::log(h[i]));
    y.push_back(std::log(values[i]));
  }
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
}

std::vector<double> successive_ratios(const std::vector<double>& values) {
  std::vector<double> out;
  for (std::size_t i = 1; i < values.size(); ++i) out.push_back(values[i] / values[i - 1]);
  return out;
}

bool linear_rate_evidence(const std::vector<double>& h, const std::vector<double>& defects,
                          double slack) {
  if (h.size() != defects.size() || h.size() < 3) return false;
  std::vector<std::size_t> order(h.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return h[a] < h[b]; });
  double c = 0.0;
  for (int i = 0; i < 3; ++i) c += defects[order[i]] / h[order[i]] / 3.0;
  for (int i = 0; i < 3; ++i)
    if (defects[order[i]] > slack * c * h[order[i]] + 1e-15) return false;
  return true;
}

void write_diagnostic_csv(std::ostream& out, const DiagnosticTable& table) {
  write_csv_row(out, std::vector<std::string>{"h", "forward_defect", "backward_defect", "fitted_rate"});
  for (const auto& r : table.rows)
    write_csv_row(out, std::vector<double>{r.h, r.forward_defect, r.backward_defect,
                                           table.backward_rate});
}

}  // namespace setkoop
