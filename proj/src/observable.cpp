#include "setkoop/observable.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <variant>

#include "setkoop/csv.hpp"
#include "setkoop/errors.hpp"
#include "setkoop/flow.hpp"

namespace setkoop {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct BumpForm {
  Vector center;
  double radius;
};

struct LinearForm {
  CVector coeffs;
};

struct ConstantForm {
  int dim;
  Complex value;
};

struct GridForm {
  SpatialGrid grid;
  std::vector<Complex> values;
  double fd_step;
};

struct PullbackForm {
  Observable base;
  VectorField field;
  ControlSignal signal;
  double tau;
  double t;
  double step;
};

struct SumForm {
  Observable a;
  Observable b;
};

struct ProductForm {
  Observable a;
  Observable b;
};

struct ScaledForm {
  Complex factor;
  Observable a;
};

}  // namespace

struct Observable::Node {
  std::variant<BumpForm, LinearForm, ConstantForm, GridForm, PullbackForm, SumForm, ProductForm,
               ScaledForm>
      form;
  int dim;
};

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double snap(double p) {
  const double r = std::round(p);
  return std::abs(p - r) < 1e-10 ? r : p;
}

double box_slack(const SpatialGrid& g) {
  return 1e-10 * std::max(1.0, (g.upper() - g.lower()).cwiseAbs().maxCoeff());
}

Complex interpolate(const GridForm& f, const Vector& x) {
  const auto& g = f.grid;
  const int d = g.dim();
  const int n = g.points_per_axis();
  if (!g.contains(x, box_slack(g)))
    throw WindowError("grid-sampled observable evaluated outside its box");
  std::vector<int> base(d);
  std::vector<double> frac(d);
  for (int k = 0; k < d; ++k) {
    double p = snap((x(k) - g.lower()(k)) / g.spacing(k));
    p = std::clamp(p, 0.0, static_cast<double>(n - 1));
    int i = static_cast<int>(std::floor(p));
    if (i >= n - 1) i = n - 2;
    base[k] = i;
    frac[k] = p - i;
  }
  Complex total = 0.0;
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    std::size_t index = 0;
    for (int k = 0; k < d; ++k) {
      const int bit = (corner >> (d - 1 - k)) & 1;
      w *= bit ? frac[k] : 1.0 - frac[k];
      index = index * n + static_cast<std::size_t>(base[k] + bit);
    }
    if (w != 0.0) total += w * f.values[index];
  }
  return total;
}

CVector grid_gradient(const GridForm& f, const Vector& x) {
  const auto& g = f.grid;
  CVector grad(g.dim());
  const double slack = box_slack(g);
  for (int k = 0; k < g.dim(); ++k) {
    const double h = f.fd_step > 0 ? f.fd_step : g.spacing(k);
    Vector e = Vector::Zero(g.dim());
    e(k) = h;
    const bool up = g.contains(x + e, slack);
    const bool down = g.contains(x - e, slack);
    if (up && down) {
      grad(k) = (interpolate(f, x + e) - interpolate(f, x - e)) / (2.0 * h);
    } else if (up) {
      grad(k) = (-3.0 * interpolate(f, x) + 4.0 * interpolate(f, x + e) -
                 interpolate(f, x + 2.0 * e)) /
                (2.0 * h);
    } else if (down) {
      grad(k) = (3.0 * interpolate(f, x) - 4.0 * interpolate(f, x - e) +
                 interpolate(f, x - 2.0 * e)) /
                (2.0 * h);
    } else {
      throw InvalidArgument("finite-difference step exceeds the grid box");
    }
  }
  return grad;
}

void require_dim(const Vector& x, int dim) {
  if (x.size() != dim) throw InvalidArgument("point has wrong dimension for observable");
}

}  // namespace

Observable Observable::bump(Vector center, double radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) throw InvalidArgument("bump radius must be positive");
  const int dim = static_cast<int>(center.size());
  return Observable(std::make_shared<const Node>(Node{BumpForm{std::move(center), radius}, dim}));
}

Observable Observable::linear_window(CVector coeffs) {
  const int dim = static_cast<int>(coeffs.size());
  return Observable(std::make_shared<const Node>(Node{LinearForm{std::move(coeffs)}, dim}));
}

Observable Observable::constant(int dim, Complex value) {
  return Observable(std::make_shared<const Node>(Node{ConstantForm{dim, value}, dim}));
}

Observable Observable::grid_sampled(SpatialGrid grid, std::vector<Complex> values,
                                    double fd_step) {
  if (values.size() != grid.size()) throw InvalidArgument("grid values do not match node count");
  const int dim = grid.dim();
  return Observable(std::make_shared<const Node>(
      Node{GridForm{std::move(grid), std::move(values), fd_step}, dim}));
}

Observable Observable::pullback(Observable base, VectorField field, ControlSignal signal,
                                double tau, double t, double step) {
  if (base.dim() != field.state_dim()) throw InvalidArgument("pullback dimension mismatch");
  const int dim = base.dim();
  return Observable(std::make_shared<const Node>(Node{
      PullbackForm{std::move(base), std::move(field), std::move(signal), tau, t, step}, dim}));
}

Observable operator+(const Observable& a, const Observable& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("observable dimension mismatch");
  return Observable(std::make_shared<const Observable::Node>(Observable::Node{SumForm{a, b}, a.dim()}));
}

Observable operator-(const Observable& a, const Observable& b) { return a + Complex(-1.0) * b; }

Observable operator*(Complex c, const Observable& a) {
  return Observable(
      std::make_shared<const Observable::Node>(Observable::Node{ScaledForm{c, a}, a.dim()}));
}

Observable product(const Observable& a, const Observable& b) {
  if (a.dim() != b.dim()) throw InvalidArgument("observable dimension mismatch");
  return Observable(
      std::make_shared<const Observable::Node>(Observable::Node{ProductForm{a, b}, a.dim()}));
}

Observable::Kind Observable::kind() const {
  return std::visit(overloaded{
                        [](const BumpForm&) { return Kind::bump; },
                        [](const LinearForm&) { return Kind::linear_window; },
                        [](const ConstantForm&) { return Kind::constant; },
                        [](const GridForm&) { return Kind::grid_sampled; },
                        [](const PullbackForm&) { return Kind::pullback; },
                        [](const SumForm&) { return Kind::sum; },
                        [](const ProductForm&) { return Kind::product; },
                        [](const ScaledForm&) { return Kind::scaled; },
                    },
                    node_->form);
}

int Observable::dim() const { return node_->dim; }

Complex Observable::eval(const Vector& x) const {
  require_dim(x, dim());
  return std::visit(
      overloaded{
          [&](const BumpForm& f) -> Complex {
            const double s = (x - f.center).squaredNorm() / (f.radius * f.radius);
            if (s >= 1.0) return 0.0;
            return (1.0 - s) * (1.0 - s);
          },
          [&](const LinearForm& f) -> Complex { return f.coeffs.cwiseProduct(x.cast<Complex>()).sum(); },
          [&](const ConstantForm& f) -> Complex { return f.value; },
          [&](const GridForm& f) -> Complex { return interpolate(f, x); },
          [&](const PullbackForm& f) -> Complex {
            const auto y = integrate_flow(f.field, f.signal, f.tau, f.t, x, f.step).final_state;
            if (!f.base.evaluable_at(y)) throw WindowError("pullback left the evaluable region");
            return f.base.eval(y);
          },
          [&](const SumForm& f) -> Complex { return f.a.eval(x) + f.b.eval(x); },
          [&](const ProductForm& f) -> Complex { return f.a.eval(x) * f.b.eval(x); },
          [&](const ScaledForm& f) -> Complex { return f.factor * f.a.eval(x); },
      },
      node_->form);
}

CVector Observable::gradient(const Vector& x) const {
  require_dim(x, dim());
  return std::visit(
      overloaded{
          [&](const BumpForm& f) -> CVector {
            const double s = (x - f.center).squaredNorm() / (f.radius * f.radius);
            if (s >= 1.0) return CVector::Zero(x.size());
            const Vector g = (-4.0 * (1.0 - s) / (f.radius * f.radius)) * (x - f.center);
            return g.cast<Complex>();
          },
          [&](const LinearForm& f) -> CVector { return f.coeffs; },
          [&](const ConstantForm& f) -> CVector { return CVector::Zero(f.dim); },
          [&](const GridForm& f) -> CVector { return grid_gradient(f, x); },
          [&](const PullbackForm& f) -> CVector {
            const auto flow = integrate_flow_jacobian(f.field, f.signal, f.tau, f.t, x, f.step);
            return flow.jacobian.cast<Complex>().transpose() * f.base.gradient(flow.state);
          },
          [&](const SumForm& f) -> CVector { return f.a.gradient(x) + f.b.gradient(x); },
          [&](const ProductForm& f) -> CVector {
            return f.b.eval(x) * f.a.gradient(x) + f.a.eval(x) * f.b.gradient(x);
          },
          [&](const ScaledForm& f) -> CVector { return f.factor * f.a.gradient(x); },
      },
      node_->form);
}

std::vector<Complex> Observable::values_on(const SpatialGrid& grid) const {
  if (grid.dim() != dim()) throw InvalidArgument("grid dimension does not match observable");
  auto pointwise = [&]() {
    std::vector<Complex> out;
    out.reserve(grid.size());
    for (const auto& x : grid.nodes()) out.push_back(eval(x));
    return out;
  };
  return std::visit(
      overloaded{
          [&](const GridForm& f) { return f.grid == grid ? f.values : pointwise(); },
          [&](const SumForm& f) {
            auto a = f.a.values_on(grid);
            const auto b = f.b.values_on(grid);
            for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
            return a;
          },
          [&](const ProductForm& f) {
            auto a = f.a.values_on(grid);
            const auto b = f.b.values_on(grid);
            for (std::size_t i = 0; i < a.size(); ++i) a[i] *= b[i];
            return a;
          },
          [&](const ScaledForm& f) {
            auto a = f.a.values_on(grid);
            for (auto& v : a) v = f.factor * v;
            return a;
          },
          [&](const auto&) { return pointwise(); },
      },
      node_->form);
}

bool Observable::is_c1() const {
  return std::visit(overloaded{
                        [](const PullbackForm& f) { return f.base.is_c1() && f.field.is_c1(); },
                        [](const SumForm& f) { return f.a.is_c1() && f.b.is_c1(); },
                        [](const ProductForm& f) { return f.a.is_c1() && f.b.is_c1(); },
                        [](const ScaledForm& f) { return f.a.is_c1(); },
                        [](const auto&) { return true; },
                    },
                    node_->form);
}

bool Observable::compact() const {
  return std::visit(overloaded{
                        [](const PullbackForm& f) { return f.base.compact(); },
                        [](const SumForm& f) { return f.a.compact() && f.b.compact(); },
                        [](const ProductForm& f) { return f.a.compact() || f.b.compact(); },
                        [](const ScaledForm& f) { return f.factor == Complex(0.0) || f.a.compact(); },
                        [this](const auto&) { return std::isfinite(support_radius()); },
                    },
                    node_->form);
}

double Observable::support_radius() const {
  return std::visit(
      overloaded{
          [](const BumpForm& f) { return f.radius; },
          [](const LinearForm& f) { return f.coeffs.isZero(0.0) ? 0.0 : kInf; },
          [](const ConstantForm& f) { return f.value == Complex(0.0) ? 0.0 : kInf; },
          [](const GridForm& f) { return 0.5 * (f.grid.upper() - f.grid.lower()).norm(); },
          [](const PullbackForm&) { return kInf; },
          [](const SumForm& f) {
            const double ra = f.a.support_radius();
            const double rb = f.b.support_radius();
            if (!std::isfinite(ra) || !std::isfinite(rb)) return kInf;
            if (ra == 0.0) return rb;
            if (rb == 0.0) return ra;
            const double gap = (f.a.support_center() - f.b.support_center()).norm();
            return std::max({ra, rb, 0.5 * (gap + ra + rb)});
          },
          [](const ProductForm& f) {
            const double ra = f.a.support_radius();
            const double rb = f.b.support_radius();
            return std::min(ra, rb);
          },
          [](const ScaledForm& f) { return f.factor == Complex(0.0) ? 0.0 : f.a.support_radius(); },
      },
      node_->form);
}

Vector Observable::support_center() const {
  return std::visit(
      overloaded{
          [](const BumpForm& f) -> Vector { return f.center; },
          [](const GridForm& f) -> Vector { return 0.5 * (f.grid.lower() + f.grid.upper()); },
          [](const SumForm& f) -> Vector {
            const double ra = f.a.support_radius();
            const double rb = f.b.support_radius();
            const Vector ca = f.a.support_center();
            const Vector cb = f.b.support_center();
            if (!std::isfinite(ra) || !std::isfinite(rb) || rb == 0.0) return ca;
            if (ra == 0.0) return cb;
            const double gap = (ca - cb).norm();
            const double radius = 0.5 * (gap + ra + rb);
            if (radius <= std::max(ra, rb) || gap == 0.0) return ra >= rb ? ca : cb;
            // Smallest ball containing both support balls.
            return ca + ((radius - ra) / gap) * (cb - ca);
          },
          [](const ProductForm& f) -> Vector {
            return f.a.support_radius() <= f.b.support_radius() ? f.a.support_center()
                                                                : f.b.support_center();
          },
          [](const ScaledForm& f) -> Vector { return f.a.support_center(); },
          [this](const auto&) -> Vector { return Vector::Zero(dim()); },
      },
      node_->form);
}

bool Observable::evaluable_at(const Vector& x) const {
  return std::visit(
      overloaded{
          [&](const GridForm& f) { return f.grid.contains(x, box_slack(f.grid)); },
          [&](const PullbackForm& f) {
            try {
              return f.base.evaluable_at(
                  integrate_flow(f.field, f.signal, f.tau, f.t, x, f.step).final_state);
            } catch (const DivergenceError&) {
              return false;
            }
          },
          [&](const SumForm& f) { return f.a.evaluable_at(x) && f.b.evaluable_at(x); },
          [&](const ProductForm& f) { return f.a.evaluable_at(x) && f.b.evaluable_at(x); },
          [&](const ScaledForm& f) { return f.a.evaluable_at(x); },
          [&](const auto&) { return x.size() == dim(); },
      },
      node_->form);
}

const SpatialGrid* Observable::grid() const {
  const auto* f = std::get_if<GridForm>(&node_->form);
  return f ? &f->grid : nullptr;
}

const std::vector<Complex>* Observable::grid_values() const {
  const auto* f = std::get_if<GridForm>(&node_->form);
  return f ? &f->values : nullptr;
}

double sup_norm_diff(const std::vector<Complex>& a, const std::vector<Complex>& b) {
  if (a.size() != b.size()) throw InvalidArgument("value vectors differ in length");
  double out = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) out = std::max(out, std::abs(a[i] - b[i]));
  return out;
}

double sup_norm_diff(const Observable& a, const Observable& b, const SpatialGrid& grid) {
  return sup_norm_diff(a.values_on(grid), b.values_on(grid));
}

double sup_norm(const Observable& a, const SpatialGrid& grid) {
  double out = 0.0;
  for (const auto& v : a.values_on(grid)) out = std::max(out, std::abs(v));
  return out;
}

Observable compose_with_flow(const Observable& obs, const VectorField& field,
                             const ControlSignal& signal, double tau, double t,
                             const SpatialGrid& grid, double step) {
  const auto flowed = flow_on_grid(field, signal, tau, t, grid, step);
  std::vector<Complex> values(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!obs.evaluable_at(flowed[i]))
      throw WindowError("flowed grid node " + std::to_string(i) +
                            " left the evaluable region of the observable",
                        i);
    values[i] = obs.eval(flowed[i]);
  }
  return Observable::grid_sampled(grid, std::move(values));
}

void write_observable_csv(std::ostream& out, const SpatialGrid& grid, const Observable& obs) {
  std::vector<std::string> header;
  for (int k = 0; k < grid.dim(); ++k) header.push_back("node_" + std::to_string(k));
  header.push_back("re");
  header.push_back("im");
  write_csv_row(out, header);
  const auto values = obs.values_on(grid);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row(grid.nodes()[i].data(), grid.nodes()[i].data() + grid.dim());
    row.push_back(values[i].real());
    row.push_back(values[i].imag());
    write_csv_row(out, row);
  }
}

}  // namespace setkoop
