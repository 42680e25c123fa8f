#include "minorproc/secular.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace minorproc {

std::string to_string(ProcessKind kind) {
  switch (kind) {
    case ProcessKind::sine: return "sine";
    case ProcessKind::airy: return "airy";
    case ProcessKind::bessel: return "bessel";
  }
  return "unknown";
}

long PointConfiguration::index_of(long label) const {
  if (!has_label(label))
    throw std::out_of_range("point label " + std::to_string(label) + " outside window [" +
                            std::to_string(first_label) + ", " + std::to_string(last_label()) + "]");
  return label - first_label;
}

long PointConfiguration::half_width() const { return (size() - 1) / 2; }

void PointConfiguration::validate(bool require_symmetric) const {
  if (beta != 1 && beta != 2) throw std::invalid_argument("point configuration: beta must be 1 or 2");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (!std::isfinite(points[i])) throw std::invalid_argument("point configuration: non-finite point");
    if (i > 0 && !(points[i] > points[i - 1]))
      throw std::invalid_argument("point configuration: points must be strictly ascending");
  }
  if (!marks.empty()) {
    if (marks.size() != points.size()) throw std::invalid_argument("point configuration: marks and points differ in length");
    for (const cplx& g : marks)
      if (!std::isfinite(g.real()) || !std::isfinite(g.imag()))
        throw std::invalid_argument("point configuration: non-finite mark");
  }
  if (require_symmetric && kind == ProcessKind::sine && !points.empty() && first_label != -last_label())
    throw std::invalid_argument("point configuration: bulk window must be symmetric");
  if (kind == ProcessKind::bessel && !points.empty() && !(points.front() > 0.0))
    throw std::invalid_argument("point configuration: hard-edge points must be positive");
}

namespace {

void require_marked(const PointConfiguration& c, const char* who) {
  if (!c.marked()) throw std::invalid_argument(std::string(who) + ": configuration carries no marks");
}

std::vector<double> weights_of(const PointConfiguration& c) {
  require_marked(c, "secular solver");
  std::vector<double> w(c.points.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::norm(c.marks[i]);
  return w;
}

// Window density; the declared one if present, otherwise the empirical one.
double density_of(const PointConfiguration& c) {
  if (c.density > 0.0) return c.density;
  if (c.size() < 2) return 0.0;
  return (c.size() - 1) / (c.points.back() - c.points.front());
}

double pole_term(double w, double mu, double z) {
  const double d = mu - z;
  if (d == 0.0) throw std::domain_error("evaluation at a configuration point");
  return w / d;
}

}  // namespace

double stieltjes_S(const PointConfiguration& config, double z) { return stieltjes_S_with_tail(config, z).value; }

SumWithTail stieltjes_S_with_tail(const PointConfiguration& config, double z) {
  require_marked(config, "stieltjes_S");
  const long n = config.size();
  // outermost pairs first; the large near terms are added last
  double s = 0.0;
  long lo = 0, hi = n - 1;
  while (lo < hi) {
    s += pole_term(std::norm(config.marks[lo]), config.points[lo], z) +
         pole_term(std::norm(config.marks[hi]), config.points[hi], z);
    ++lo;
    --hi;
  }
  if (lo == hi) s += pole_term(std::norm(config.marks[lo]), config.points[lo], z);

  SumWithTail out;
  out.value = s;
  if (n >= 2) {
    // Remainder beyond the window: the fluctuation of sum (|g|^2 - 1)/(mu - z) over
    // points farther than L has variance about 4 rho / L (3 sd reported), plus the
    // deterministic asymmetry 2 rho |c - z| / L of an off-centre window.
    const double L = std::min(z - config.points.front(), config.points.back() - z);
    const double rho = density_of(config);
    const double c = 0.5 * (config.points.front() + config.points.back());
    out.tail_bound = L > 0.0 ? 6.0 * std::sqrt(rho / L) + 2.0 * rho * std::abs(c - z) / L
                             : std::numeric_limits<double>::infinity();
  } else {
    out.tail_bound = std::numeric_limits<double>::infinity();
  }
  return out;
}

long branch_margin(const PointConfiguration& config) {
  const long m = config.half_width();
  return (m + 3) / 4;
}

BulkSecular::BulkSecular(const PointConfiguration& config, double h)
    : config_(&config), h_(h), solver_(config.points, weights_of(config), -h, 0.0) {
  if (!std::isfinite(h)) throw std::invalid_argument("secular level h must be finite");
  solver_.rel_tol = 1e-14;
}

long BulkSecular::min_branch() const { return config_->first_label + branch_margin(*config_); }
long BulkSecular::max_branch() const { return config_->last_label() - 1 - branch_margin(*config_); }

BranchRoot BulkSecular::branch(long u) const {
  if (u < min_branch() || u > max_branch()) {
    // smallest symmetric half-width M with u at distance >= ceil(M/4) from either end
    const long need = std::max(std::abs(u), std::abs(u + 1));
    long m = need;
    while (m - need < (m + 3) / 4) ++m;
    throw WindowError("branch " + std::to_string(u) + " is too close to the window edge; half-width >= " +
                          std::to_string(m) + " required",
                      m);
  }
  BranchRoot r;
  r.u = u;
  r.root = solver_.interior_root(static_cast<int>(config_->index_of(u)));
  r.z = r.root.z;
  r.derivative = 1.0 / solver_.pole_derivative(r.root);
  return r;
}

double BulkSecular::difference(const BranchRoot& r, long v) const {
  return solver_.difference(r.root, static_cast<int>(config_->index_of(v)));
}

double BulkSecular::residual(const BranchRoot& r) const {
  const long n = config_->size();
  double s = 0.0;
  long lo = 0, hi = n - 1;
  auto term = [&](long i) { return std::norm(config_->marks[i]) / -solver_.difference(r.root, static_cast<int>(i)); };
  while (lo < hi) s += term(lo++) + term(hi--);
  if (lo == hi) s += term(lo);
  return s - h_;
}

BranchRoot inverse_branch_root(const PointConfiguration& config, double h, long u) {
  return BulkSecular(config, h).branch(u);
}

double inverse_branch(const PointConfiguration& config, double h, long u) {
  return inverse_branch_root(config, h, u).z;
}

double inverse_branch_derivative(const PointConfiguration& config, double h, long u) {
  return inverse_branch_root(config, h, u).derivative;
}

double hard_edge_D(const PointConfiguration& config, double chi, double z) {
  return hard_edge_D_with_tail(config, chi, z).value;
}

SumWithTail hard_edge_D_with_tail(const PointConfiguration& config, double chi, double z) {
  require_marked(config, "hard_edge_D");
  if (!(chi >= 0.0)) throw std::invalid_argument("hard_edge_D: chi must be nonnegative");
  if (z == 0.0) throw std::domain_error("hard_edge_D: evaluation at 0");
  const long n = config.size();
  double s = 0.0;
  for (long i = n - 1; i >= 0; --i) s += pole_term(std::norm(config.marks[i]), config.points[i], z);
  SumWithTail out;
  out.value = s - chi / z;
  // points grow like (pi j)^2 so the missing terms sum to about 1/(pi sqrt(xi_last))
  if (n > 0 && config.points.back() > z) {
    out.tail_bound = 2.0 / (std::numbers::pi * std::sqrt(config.points.back() - std::min(z, 0.0)));
  } else {
    out.tail_bound = std::numeric_limits<double>::infinity();
  }
  return out;
}

namespace {

detail::SecularSolver hard_edge_solver(const PointConfiguration& config, double chi) {
  require_marked(config, "hard-edge secular");
  if (!(chi > 0.0)) throw std::invalid_argument("hard-edge secular: chi must be positive");
  if (config.points.empty() || !(config.points.front() > 0.0))
    throw std::invalid_argument("hard-edge secular: points must be positive");
  std::vector<double> poles{0.0};
  std::vector<double> w{chi};
  poles.insert(poles.end(), config.points.begin(), config.points.end());
  const auto gw = weights_of(config);
  w.insert(w.end(), gw.begin(), gw.end());
  detail::SecularSolver s(std::move(poles), std::move(w), 0.0, 0.0);
  s.rel_tol = 1e-14;
  return s;
}

}  // namespace

HardEdgeSecular::HardEdgeSecular(const PointConfiguration& config, double chi)
    : config_(&config), solver_(hard_edge_solver(config, chi)) {}

BranchRoot HardEdgeSecular::root(long u) const {
  // root u lies in (xi_{u-1}, xi_u): solver interval u - first_label over poles {0, xi...}
  const long k = u - config_->first_label;
  if (k < 0 || k >= config_->size())
    throw std::out_of_range("hard-edge root " + std::to_string(u) + " outside window");
  BranchRoot r;
  r.u = u;
  r.root = solver_.interior_root(static_cast<int>(k));
  r.z = r.root.z;
  r.derivative = 1.0 / solver_.pole_derivative(r.root);
  return r;
}

double HardEdgeSecular::difference(const BranchRoot& r, long v) const {
  return solver_.difference(r.root, static_cast<int>(config_->index_of(v) + 1));
}

PointConfiguration psi_step(const PointConfiguration& config, const std::vector<cplx>& marks, double h, long margin) {
  PointConfiguration marked = config;
  marked.marks = marks;
  marked.validate(false);
  require_marked(marked, "psi_step");
  if (margin < 0) margin = branch_margin(marked);
  // local solver so that a caller-chosen margin is honoured
  detail::SecularSolver solver(marked.points, weights_of(marked), -h, 0.0);
  solver.rel_tol = 1e-14;
  PointConfiguration out;
  out.kind = config.kind;
  out.beta = config.beta;
  out.density = config.density;
  const long first = config.first_label + margin;
  const long last = config.last_label() - 1 - margin;
  if (last < first) throw WindowError("psi_step: window too small for the requested margin", 4 * (margin + 1));
  out.first_label = first;
  for (long u = first; u <= last; ++u) {
    const auto r = solver.interior_root(static_cast<int>(marked.index_of(u)));
    out.points.push_back(r.z);
  }
  return out;
}

BasisState BasisState::identity(const PointConfiguration& config) {
  BasisState b;
  b.first_label = config.first_label;
  b.column_first_label = config.first_label;
  b.coeffs = Matrix<cplx>::Identity(config.size(), config.size());
  b.leakage.assign(config.points.size(), 0.0);
  b.canonical = true;
  return b;
}

double BasisState::max_row_norm_error() const {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < coeffs.rows(); ++i) worst = std::max(worst, std::abs(coeffs.row(i).norm() - 1.0));
  return worst;
}

Matrix<cplx> phi_coefficients(const PointConfiguration& new_config, const PointConfiguration& old_config,
                              const std::vector<cplx>& marks, double min_gap) {
  if (marks.size() != old_config.points.size())
    throw std::invalid_argument("phi_step: marks must match the old configuration");
  const long rows = new_config.size();
  const long cols = old_config.size();
  Matrix<cplx> C(rows, cols);
  for (long i = 0; i < rows; ++i) {
    const double z = new_config.points[i];
    double norm2 = 0.0;
    for (long j = 0; j < cols; ++j) {
      const double d = z - old_config.points[j];
      if (std::abs(d) < min_gap)
        throw DegenerateGapError("phi_step: degenerate gap between new point " + std::to_string(i) +
                                 " and old point " + std::to_string(j));
      const cplx c = marks[j] / d;
      C(i, j) = c;
      norm2 += std::norm(c);
    }
    C.row(i) /= std::sqrt(norm2);
  }
  return C;
}

BasisState advance_basis(const BasisState& basis, const Matrix<cplx>& C, long new_first_label) {
  if (C.cols() != basis.coeffs.rows()) throw std::invalid_argument("advance_basis: coefficient columns must match basis rows");
  BasisState out;
  out.first_label = new_first_label;
  out.column_first_label = basis.column_first_label;
  if (basis.canonical) {
    out.coeffs = C;
  } else if (C.imag().isZero(0.0) && basis.coeffs.imag().isZero(0.0)) {
    // real marks: a real product is a quarter of the work
    const RealMatrix R = C.real() * basis.coeffs.real();
    out.coeffs = R.cast<cplx>();
  } else {
    out.coeffs = C * basis.coeffs;
  }
  out.leakage.resize(out.coeffs.rows());
  for (Eigen::Index i = 0; i < out.coeffs.rows(); ++i) {
    const double n2 = out.coeffs.row(i).squaredNorm();
    out.leakage[i] = 1.0 - n2;
    out.coeffs.row(i) /= std::sqrt(n2);
  }
  return out;
}

BasisState phi_step(const BasisState& basis, const PointConfiguration& new_config, const PointConfiguration& old_config,
                    const std::vector<cplx>& marks, double min_gap) {
  if (basis.rows() != old_config.size() || basis.first_label != old_config.first_label)
    throw std::invalid_argument("phi_step: basis rows must be labelled like the old configuration");
  return advance_basis(basis, phi_coefficients(new_config, old_config, marks, min_gap), new_config.first_label);
}

PointConfiguration t_step(const PointConfiguration& config, const std::vector<cplx>& marks, double chi, long keep) {
  PointConfiguration marked = config;
  marked.marks = marks;
  marked.validate();
  const HardEdgeSecular solver(marked, chi);
  const long n = config.size();
  if (keep <= 0 || keep > n) keep = n;
  PointConfiguration out;
  out.kind = config.kind;
  out.beta = config.beta;
  out.density = config.density;
  out.first_label = config.first_label;
  for (long k = 0; k < keep; ++k) out.points.push_back(solver.root(config.first_label + k).z);
  return out;
}

}  // namespace minorproc
