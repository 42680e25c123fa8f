#include "minorproc/laws.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace minorproc {

namespace {

constexpr double pi = std::numbers::pi;

void require_q(double q) {
  if (!(q > 0.0 && q <= 1.0)) throw std::invalid_argument("q must lie in (0,1]");
}

void require_mp_bulk(double E, double q) {
  require_q(q);
  const auto [lm, lp] = lambda_pm(q);
  if (!(E > lm && E < lp))
    throw std::invalid_argument("E must lie in the Marchenko-Pastur bulk (" + std::to_string(lm) + ", " +
                                std::to_string(lp) + ")");
}

}  // namespace

void SpectralConstants::validate_wigner_bulk() const {
  if (!(std::abs(E) < 2.0)) throw std::invalid_argument("E must lie in (-2,2)");
  if (beta != 1 && beta != 2) throw std::invalid_argument("beta must be 1 or 2");
}

void SpectralConstants::validate_wishart_bulk() const {
  require_mp_bulk(E, q);
  if (beta != 1 && beta != 2) throw std::invalid_argument("beta must be 1 or 2");
}

double rho_sc(double x) {
  if (!(std::abs(x) < 2.0)) return 0.0;
  return std::sqrt(4.0 - x * x) / (2.0 * pi);
}

std::pair<double, double> lambda_pm(double q) {
  require_q(q);
  const double r = std::sqrt(q);
  return {(1.0 - r) * (1.0 - r), (1.0 + r) * (1.0 + r)};
}

double rho_mp(double x, double q) {
  const auto [lm, lp] = lambda_pm(q);
  if (!(x > lm && x < lp) || !(x > 0.0)) return 0.0;
  return std::sqrt((lp - x) * (x - lm)) / (2.0 * pi * q * x);
}

double h_wigner(double E) {
  if (!(std::abs(E) < 2.0)) throw std::invalid_argument("E must lie in (-2,2)");
  return -E / (2.0 * std::sqrt(4.0 - E * E));
}

double h_wishart_bulk(double E, double q) {
  require_mp_bulk(E, q);
  const auto [lm, lp] = lambda_pm(q);
  return -q * (E + q - 1.0) / (2.0 * std::sqrt((lp - E) * (E - lm)));
}

double h_overlap_wishart(double E, double q) {
  require_mp_bulk(E, q);
  return -(E + q - 1.0) / (2.0 * E) / (2.0 * pi * rho_mp(E, q));
}

double wishart_bulk_rescale(double lambda, double E, double q, double T, double calibration) {
  require_mp_bulk(E, q);
  return calibration * 2.0 * pi * rho_mp(E, q) * (lambda - E * T);
}

Matrix<cplx> edge_overlap_law(const PointConfiguration& airy) { return edge_overlap_law(airy, airy.marks); }

Matrix<cplx> edge_overlap_law(const PointConfiguration& airy, const std::vector<cplx>& marks) {
  const long l = airy.size();
  if (static_cast<long>(marks.size()) != l) throw std::invalid_argument("edge_overlap_law: one mark per point required");
  Matrix<cplx> A = Matrix<cplx>::Zero(l, l);
  for (long i = 0; i < l; ++i) {
    for (long j = i + 1; j < l; ++j) {
      const double d = airy.points[j] - airy.points[i];
      if (d == 0.0) throw std::invalid_argument("edge_overlap_law: coincident points");
      A(i, j) = std::conj(marks[i]) * marks[j] / d;
      // conj(g_j) g_i / (alpha_i - alpha_j) is exactly -conj(A_ij)
      A(j, i) = -std::conj(A(i, j));
    }
  }
  return A;
}

double soft_edge_constant(double q, EdgeSide side) {
  require_q(q);
  const double r = std::sqrt(q);
  if (side == EdgeSide::right) return std::pow(1.0 + r, -1.0 / 3.0);
  if (!(q < 1.0)) throw std::invalid_argument("left soft edge requires q < 1 (q = 1 is a hard edge)");
  return std::pow(1.0 - r, -1.0 / 3.0);
}

Matrix<cplx> wishart_soft_edge_overlap_law(const PointConfiguration& airy, double q, EdgeSide side) {
  return soft_edge_constant(q, side) * edge_overlap_law(airy);
}

cplx OverlapRow::at(long v) const {
  const long k = v - first_label;
  if (k < 0 || k >= static_cast<long>(values.size())) throw std::out_of_range("overlap row: label outside window");
  return values[k];
}

double OverlapRow::squared_norm() const {
  double s = 0.0;
  for (const cplx& x : values) s += std::norm(x);
  return s;
}

OverlapRow bulk_overlap_row(const PointConfiguration& config, double h, long u) {
  const BulkSecular solver(config, h);
  const BranchRoot r = solver.branch(u);
  OverlapRow row;
  row.u = u;
  row.z = r.z;
  row.derivative = r.derivative;
  row.first_label = config.first_label;
  const double root_d = std::sqrt(r.derivative);
  row.values.resize(config.points.size());
  for (long v = config.first_label; v <= config.last_label(); ++v)
    row.values[v - config.first_label] = config.mark(v) * root_d / solver.difference(r, v);
  return row;
}

cplx bulk_overlap_law(const PointConfiguration& config, double h, long u, long v) {
  return bulk_overlap_row(config, h, u).at(v);
}

OverlapRow hard_edge_overlap_law(const PointConfiguration& bessel, double chi, long u) {
  const HardEdgeSecular solver(bessel, chi);
  const BranchRoot r = solver.root(u);
  OverlapRow row;
  row.u = u;
  row.z = r.z;
  row.derivative = r.derivative;
  row.first_label = bessel.first_label;
  const long n = bessel.size();
  row.values.resize(n);
  double norm2 = 0.0;
  for (long k = 0; k < n; ++k) {
    const long v = bessel.first_label + k;
    row.values[k] = bessel.marks[k] * std::sqrt(bessel.points[k]) / solver.difference(r, v);
    norm2 += std::norm(row.values[k]);
  }
  const double s = 1.0 / std::sqrt(norm2);
  for (auto& x : row.values) x *= s;
  return row;
}

GapLawConstants gap_law_constants(int beta) {
  if (beta != 1 && beta != 2) throw std::invalid_argument("beta must be 1 or 2");
  const double b = beta / 2.0;
  GapLawConstants c;
  c.C = std::pow(b, b) / std::tgamma(b);
  c.mean = 1.0;
  c.variance = 2.0 / beta;
  return c;
}

double gap_density(double x, int beta) {
  const GapLawConstants c = gap_law_constants(beta);
  if (!(x > 0.0)) return 0.0;
  return c.C * std::pow(x, beta / 2.0 - 1.0) * std::exp(-beta * x / 2.0);
}

double gap_cdf(double x, int beta) {
  (void)gap_law_constants(beta);
  if (!(x > 0.0)) return 0.0;
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(beta / 2.0, beta * x / 2.0);
}

double wishart_gap_scale(double q, EdgeSide side) {
  require_q(q);
  const double r = std::sqrt(q);
  if (side == EdgeSide::right) return r / (1.0 + r);
  if (!(q < 1.0)) throw std::invalid_argument("left edge gap scale requires q < 1");
  return -r / (1.0 - r);
}

namespace detail {

namespace {

double simpson_step(const std::function<double(double)>& f, double a, double b, double fa, double fm, double fb,
                    double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol) return left + right + delta / 15.0;
  return simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return simpson_step(f, a, b, fa, fm, fb, whole, tol, 60);
}

}  // namespace detail

double semicircle_cdf(double x) {
  if (x <= -2.0) return 0.0;
  if (x >= 2.0) return 1.0;
  // integrate from the nearer endpoint so the sqrt singularity sits at one end only
  if (x <= 0.0) return detail::adaptive_simpson(rho_sc, -2.0, x, 1e-13);
  return 1.0 - detail::adaptive_simpson(rho_sc, x, 2.0, 1e-13);
}

double semicircle_quantile(double y) {
  if (!(y > 0.0 && y < 1.0)) throw std::invalid_argument("quantile level must lie in (0,1)");
  double lo = -2.0, hi = 2.0;
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (semicircle_cdf(mid) < y) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

AuxiliaryValue auxiliary_regimes(AuxiliaryKind kind, const AuxiliaryInputs& in, double min_gap) {
  AuxiliaryValue out;
  switch (kind) {
    case AuxiliaryKind::edge_bulk: {
      const double edge = in.upper_edge ? 2.0 : -2.0;
      const double den = edge - semicircle_quantile(in.y);
      if (std::abs(den) < min_gap) throw std::domain_error("edge_bulk: quantile too close to the edge");
      out.value = std::conj(in.g_i) * in.g_j / den;
      out.scale_exponent = 1.0;
      out.scale = "N";
      break;
    }
    case AuxiliaryKind::bulk_off: {
      const double den = semicircle_quantile(in.y2) - semicircle_quantile(in.y1);
      if (std::abs(den) < min_gap) throw std::domain_error("bulk_off: quantiles must be separated");
      if (!(in.derivative > 0.0)) throw std::invalid_argument("bulk_off: derivative must be positive");
      out.value = in.g_j * std::sqrt(in.derivative) / den;
      out.scale_exponent = 1.0;
      out.scale = "N";
      break;
    }
    case AuxiliaryKind::new_direction: {
      const double den = semicircle_quantile(in.y);
      if (std::abs(den) < min_gap) throw std::domain_error("new_direction: quantile at the spectral centre");
      if (!(in.derivative > 0.0)) throw std::invalid_argument("new_direction: derivative must be positive");
      out.value = std::sqrt(in.derivative) / den;
      out.scale_exponent = 0.5;
      out.scale = "sqrt(N)";
      break;
    }
  }
  return out;
}

}  // namespace minorproc
