#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "setkoop/grid.hpp"
#include "setkoop/observable.hpp"

namespace setkoop {

/// One-sided and two-sided distances between finite observable sets in the
/// grid sup-norm.
struct InclusionReport {
  double forward_defect = 0.0;   // sup over A of dist(a, B)
  double backward_defect = 0.0;  // sup over B of dist(b, A)
  double hausdorff = 0.0;        // max of the two
};

/// Grid values of every member of a set.
std::vector<std::vector<Complex>> evaluate_members(const ObservableSet& set,
                                                   const SpatialGrid& grid);

/// sup over a in A of min over b in B of ||a - b||, on precomputed values.
double one_sided_defect(const std::vector<std::vector<Complex>>& a,
                        const std::vector<std::vector<Complex>>& b);
double one_sided_defect(const ObservableSet& a, const ObservableSet& b, const SpatialGrid& grid);

InclusionReport hausdorff(const ObservableSet& a, const ObservableSet& b, const SpatialGrid& grid);

/// Members (psi - base) / h as grid samples, labels preserved.
ObservableSet scaled_difference_set(const ObservableSet& set, const Observable& base, double h,
                                    const SpatialGrid& grid);

struct DiagnosticRow {
  double h;
  double forward_defect;
  double backward_defect;
};

struct DiagnosticTable {
  std::vector<DiagnosticRow> rows;
  /// Least-squares slopes of log defect against log h; NaN when some defect
  /// in the fit vanishes.
  double forward_rate;
  double backward_rate;
};

struct SetSequenceEntry {
  double h;
  ObservableSet set;
};

/// Defects of each set against `target`. Vanishing backward defects are
/// evidence for the lower limit containing the target, vanishing forward
/// defects for the upper limit being contained in it.
DiagnosticTable kuratowski_diagnostic(const std::vector<SetSequenceEntry>& sequence,
                                      const ObservableSet& target, const SpatialGrid& grid);

/// `count` weight vectors on the simplex with `k` vertices, drawn from a
/// flat Dirichlet distribution seeded by `seed`. With resolution > 0 every
/// weight is a multiple of 1 / resolution.
std::vector<std::vector<double>> simplex_weights(std::size_t k, std::size_t count,
                                                 std::uint64_t seed, int resolution = 0);

Observable convex_combination(const ObservableSet& set, const std::vector<double>& weights);

/// The set followed by `count` random convex combinations of its members.
ObservableSet convex_combinations(const ObservableSet& set, std::size_t count,
                                  std::uint64_t seed);

/// Least-squares slope of log(values) against log(h).
double fit_log_rate(const std::vector<double>& h, const std::vector<double>& values);

/// values[i + 1] / values[i] for consecutive entries.
std::vector<double> successive_ratios(const std::vector<double>& values);

/// defect(h) <= C h on the three smallest h, with C the mean of defect / h
/// over those three and `slack` the allowed excess factor.
bool linear_rate_evidence(const std::vector<double>& h, const std::vector<double>& defects,
                          double slack = 1.5);

/// CSV with header h,forward_defect,backward_defect,fitted_rate.
void write_diagnostic_csv(std::ostream& out, const DiagnosticTable& table);

}  // namespace setkoop
