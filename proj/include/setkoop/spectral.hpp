#pragma once

#include <iosfwd>
#include <vector>

#include "setkoop/control.hpp"
#include "setkoop/grid.hpp"
#include "setkoop/observable.hpp"
#include "setkoop/vector_field.hpp"

namespace setkoop {

/// Liouville eigenpair of a linear feedback system x' = (A + B K) x.
/// `evec` solves (A + B K)^H e = conj(lambda) e with |e| = 1, and the
/// eigenfunction x -> e^H x satisfies grad phi . (A + B K) x = lambda phi.
struct EigenPair {
  Complex lambda;
  CVector evec;
  int feedback_id = 0;
  Matrix feedback;

  Observable eigenfunction() const;
  /// Control coordinates of the feedback, row-major.
  Vector control() const;
};

/// All eigenpairs of every closed loop, ordered by (feedback_id, Re, Im).
/// Throws Error naming the feedback when the eigensolver fails.
std::vector<EigenPair> liouville_eigenpairs_linear(const Matrix& a, const Matrix& b,
                                                   const std::vector<Matrix>& feedbacks);

/// sup over the grid of |grad phi . f_u - lambda phi| at the pair's feedback.
double verify_liouville_eigen(const EigenPair& pair, const VectorField& field,
                              const SpatialGrid& grid);

/// sup over the grid of |phi(Phi^u_(tau,t)(x)) - e^{lambda (t - tau)} phi(x)|
/// under the constant feedback of the pair.
double verify_spectral_mapping(const EigenPair& pair, const VectorField& field, double tau,
                               double t, const SpatialGrid& grid, double step);

struct ConverseRow {
  double h;
  Complex lambda_est;
  double generator_gap;
  double proportionality;  // sup |psi - rho phi| of the chosen signal
  bool proportional;
  int signal_index;  // -1 when no signal is proportional
};

struct ConverseProbe {
  std::vector<ConverseRow> rows;
  bool inconclusive = false;  // no proportional member at any h
  bool converged = false;     // Cauchy test on the two smallest h
  double gap_rate = 0.0;
};

/// For each h, fits phi o Phi^u_(tau,tau+h) = rho phi over the signals and
/// reports lambda_est = (rho - 1) / h together with its distance to the
/// Liouville set of the signals' control sample.
ConverseProbe converse_spectral_probe(const Observable& phi, const VectorField& field,
                                      const std::vector<ControlSignal>& signals, double tau,
                                      const std::vector<double>& h_values,
                                      const SpatialGrid& grid, double step,
                                      double proportionality_tolerance = 1e-6);

/// Residual of phi1^a1 phi2^a2 as a Liouville eigenfunction with eigenvalue
/// a1 lambda1 + a2 lambda2. Nodes where a base with exponent below one
/// vanishes are skipped. Non-integer exponents need positive real bases.
double eigen_product_check(const EigenPair& pair1, const EigenPair& pair2, double alpha1,
                           double alpha2, const VectorField& field, const SpatialGrid& grid);

/// CSV with header feedback_id,lambda_re,lambda_im,residual_liouville,residual_mapping.
void write_eigenpair_csv(std::ostream& out, const std::vector<EigenPair>& pairs,
                         const std::vector<double>& residual_liouville,
                         const std::vector<double>& residual_mapping);

}  // namespace setkoop
