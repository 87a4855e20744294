#include "setkoop/spectral.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include "setkoop/csv.hpp"
#include "setkoop/errors.hpp"
#include "setkoop/flow.hpp"
#include "setkoop/liouville.hpp"
#include "setkoop/set_ops.hpp"

namespace setkoop {

namespace {

Vector flatten_row_major(const Matrix& k) {
  Vector out(k.size());
  for (Eigen::Index i = 0; i < k.rows(); ++i)
    for (Eigen::Index j = 0; j < k.cols(); ++j) out(i * k.cols() + j) = k(i, j);
  return out;
}

void require_feedback_field(const EigenPair& pair, const VectorField& field) {
  if (field.family() != VectorField::Family::linear_feedback)
    throw InvalidArgument("eigenpair checks need a linear feedback field");
  if (pair.feedback.rows() != field.input_matrix().cols() ||
      pair.feedback.cols() != field.state_dim() || pair.evec.size() != field.state_dim())
    throw InvalidArgument("eigenpair feedback does not match the field");
}

bool is_integer(double a) { return a == std::round(a); }

Complex ipow(Complex z, long n) {
  if (n < 0) return 1.0 / ipow(z, -n);
  Complex result = 1.0;
  while (n) {
    if (n & 1) result *= z;
    z *= z;
    n >>= 1;
  }
  return result;
}

Complex power(Complex z, double alpha) {
  if (is_integer(alpha)) return ipow(z, std::lround(alpha));
  if (std::abs(z.imag()) > 1e-12 * std::max(1.0, std::abs(z)) || z.real() < 0.0)
    throw InvalidArgument("non-integer exponent needs a positive real base");
  return std::pow(z.real(), alpha);
}

}  // namespace

Observable EigenPair::eigenfunction() const { return Observable::linear_window(evec.conjugate()); }

Vector EigenPair::control() const { return flatten_row_major(feedback); }

std::vector<EigenPair> liouville_eigenpairs_linear(const Matrix& a, const Matrix& b,
                                                   const std::vector<Matrix>& feedbacks) {
  if (a.rows() != a.cols()) throw InvalidArgument("A must be square");
  if (b.rows() != a.rows()) throw InvalidArgument("B must have as many rows as A");
  std::vector<EigenPair> out;
  for (std::size_t id = 0; id < feedbacks.size(); ++id) {
    const Matrix& k = feedbacks[id];
    if (k.rows() != b.cols() || k.cols() != a.cols())
      throw InvalidArgument("feedback " + std::to_string(id) + " has the wrong shape");
    const CMatrix adjoint = (a + b * k).adjoint().cast<Complex>();
    Eigen::ComplexEigenSolver<CMatrix> solver(adjoint);
    if (solver.info() != Eigen::Success)
      throw Error("eigensolver did not converge for feedback " + std::to_string(id));
    std::vector<EigenPair> pairs;
    for (Eigen::Index j = 0; j < adjoint.rows(); ++j) {
      CVector e = solver.eigenvectors().col(j);
      e.normalize();
      for (Eigen::Index i = 0; i < e.size(); ++i)
        if (std::abs(e(i)) > 1e-12) {
          e *= std::conj(e(i)) / std::abs(e(i));
          e(i) = std::abs(e(i));
          break;
        }
      pairs.push_back({std::conj(solver.eigenvalues()(j)), e, static_cast<int>(id), k});
    }
    std::stable_sort(pairs.begin(), pairs.end(), [](const EigenPair& x, const EigenPair& y) {
      if (x.lambda.real() != y.lambda.real()) return x.lambda.real() < y.lambda.real();
      return x.lambda.imag() < y.lambda.imag();
    });
    out.insert(out.end(), pairs.begin(), pairs.end());
  }
  return out;
}

double verify_liouville_eigen(const EigenPair& pair, const VectorField& field,
                              const SpatialGrid& grid) {
  require_feedback_field(pair, field);
  const Observable phi = pair.eigenfunction();
  const Vector u = pair.control();
  double worst = 0.0;
  for (const auto& x : grid.nodes()) {
    const Vector f = field.evaluate(x, u);
    const Complex lhs = phi.gradient(x).cwiseProduct(f.cast<Complex>()).sum();
    worst = std::max(worst, std::abs(lhs - pair.lambda * phi.eval(x)));
  }
  return worst;
}

double verify_spectral_mapping(const EigenPair& pair, const VectorField& field, double tau,
                               double t, const SpatialGrid& grid, double step) {
  require_feedback_field(pair, field);
  if (t == tau) return 0.0;
  const double horizon = std::max({tau, t, 1.0});
  auto controls = std::make_shared<const ControlSampleSet>(std::vector<Vector>{pair.control()});
  const auto signal = ControlSignal::constant(controls, horizon, 0);
  const Observable phi = pair.eigenfunction();
  const Complex factor = std::exp(pair.lambda * (t - tau));
  const auto flowed = flow_on_grid(field, signal, tau, t, grid, step);
  double worst = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    worst = std::max(worst, std::abs(phi.eval(flowed[i]) - factor * phi.eval(grid.nodes()[i])));
  return worst;
}

ConverseProbe converse_spectral_probe(const Observable& phi, const VectorField& field,
                                      const std::vector<ControlSignal>& signals, double tau,
                                      const std::vector<double>& h_values,
                                      const SpatialGrid& grid, double step,
                                      double proportionality_tolerance) {
  if (signals.empty()) throw InvalidArgument("converse probe needs signals");
  if (h_values.empty()) throw InvalidArgument("converse probe needs h values");
  const auto base = phi.values_on(grid);
  double norm2 = 0.0;
  for (const auto& v : base) norm2 += std::norm(v);

  const auto liouville = evaluate_members(liouville_set(phi, field, signals.front().controls(), grid), grid);

  ConverseProbe probe;
  for (double h : h_values) {
    if (!(h > 0.0)) throw InvalidArgument("h values must be positive");
    ConverseRow row{h, Complex(std::numeric_limits<double>::quiet_NaN(), 0.0),
                    std::numeric_limits<double>::quiet_NaN(),
                    std::numeric_limits<double>::infinity(), false, -1};
    if (norm2 > 0.0) {
      for (std::size_t k = 0; k < signals.size(); ++k) {
        const auto flowed = flow_on_grid(field, signals[k], tau, tau + h, grid, step);
        std::vector<Complex> psi(grid.size());
        Complex inner = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
          psi[i] = phi.eval(flowed[i]);
          inner += std::conj(base[i]) * psi[i];
        }
        const Complex rho = inner / norm2;
        double misfit = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i)
          misfit = std::max(misfit, std::abs(psi[i] - rho * base[i]));
        if (misfit < row.proportionality) {
          row.proportionality = misfit;
          row.lambda_est = (rho - 1.0) / h;
          row.signal_index = static_cast<int>(k);
        }
      }
      row.proportional = row.proportionality <= proportionality_tolerance;
      if (!row.proportional) {
        row.lambda_est = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
        row.signal_index = -1;
      } else {
        std::vector<Complex> scaled(base.size());
        for (std::size_t i = 0; i < base.size(); ++i) scaled[i] = row.lambda_est * base[i];
        row.generator_gap = one_sided_defect({scaled}, liouville);
      }
    }
    probe.rows.push_back(row);
  }

  std::vector<const ConverseRow*> good;
  for (const auto& r : probe.rows)
    if (r.proportional) good.push_back(&r);
  probe.inconclusive = good.empty();
  if (good.size() >= 2) {
    std::sort(good.begin(), good.end(), [](auto* x, auto* y) { return x->h < y->h; });
    probe.converged = std::abs(good[0]->lambda_est - good[1]->lambda_est) <= 10.0 * good[1]->h;
    std::vector<double> hs, gaps;
    for (auto* r : good) {
      hs.push_back(r->h);
      gaps.push_back(r->generator_gap);
    }
    probe.gap_rate = fit_log_rate(hs, gaps);
  }
  return probe;
}

double eigen_product_check(const EigenPair& pair1, const EigenPair& pair2, double alpha1,
                           double alpha2, const VectorField& field, const SpatialGrid& grid) {
  if (pair1.feedback_id != pair2.feedback_id)
    throw InvalidArgument("eigen products need pairs from the same feedback");
  require_feedback_field(pair1, field);
  require_feedback_field(pair2, field);
  const Observable phi1 = pair1.eigenfunction();
  const Observable phi2 = pair2.eigenfunction();
  const CVector g1 = pair1.evec.conjugate();
  const CVector g2 = pair2.evec.conjugate();
  const Complex lambda = alpha1 * pair1.lambda + alpha2 * pair2.lambda;
  const Vector u = pair1.control();

  double worst = 0.0;
  for (const auto& x : grid.nodes()) {
    const Complex z1 = phi1.eval(x);
    const Complex z2 = phi2.eval(x);
    const bool skip1 = alpha1 != 0.0 && alpha1 < 1.0 && std::abs(z1) < 1e-12;
    const bool skip2 = alpha2 != 0.0 && alpha2 < 1.0 && std::abs(z2) < 1e-12;
    if (skip1 || skip2) continue;
    const Complex p1 = power(z1, alpha1);
    const Complex p2 = power(z2, alpha2);
    const Vector f = field.evaluate(x, u);
    const Complex d1 = alpha1 == 0.0 ? Complex(0.0)
                                     : alpha1 * power(z1, alpha1 - 1.0) * p2 *
                                           g1.cwiseProduct(f.cast<Complex>()).sum();
    const Complex d2 = alpha2 == 0.0 ? Complex(0.0)
                                     : alpha2 * power(z2, alpha2 - 1.0) * p1 *
                                           g2.cwiseProduct(f.cast<Complex>()).sum();
    worst = std::max(worst, std::abs(d1 + d2 - lambda * (p1 * p2)));
  }
  return worst;
}

void write_eigenpair_csv(std::ostream& out, const std::vector<EigenPair>& pairs,
                         const std::vector<double>& residual_liouville,
                         const std::vector<double>& residual_mapping) {
  if (residual_liouville.size() != pairs.size() || residual_mapping.size() != pairs.size())
    throw InvalidArgument("one residual per eigenpair is required");
  write_csv_row(out, std::vector<std::string>{"feedback_id", "lambda_re", "lambda_im",
                                              "residual_liouville", "residual_mapping"});
  for (std::size_t i = 0; i < pairs.size(); ++i)
    write_csv_row(out, std::vector<double>{static_cast<double>(pairs[i].feedback_id),
                                           pairs[i].lambda.real(), pairs[i].lambda.imag(),
                                           residual_liouville[i], residual_mapping[i]});
}

}  // namespace setkoop
