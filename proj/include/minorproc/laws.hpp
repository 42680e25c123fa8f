#pragma once

#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "minorproc/limits.hpp"
#include "minorproc/linalg.hpp"
#include "minorproc/secular.hpp"

namespace minorproc {

struct SpectralConstants {
  double E = 0.0;
  double q = 1.0;  // N / T
  int beta = 1;

  void validate_wigner_bulk() const;
  void validate_wishart_bulk() const;
};

// Densities: semicircle on [-2, 2]; Marchenko-Pastur for W/T with ratio q, on [lambda-, lambda+].
double rho_sc(double x);
double rho_mp(double x, double q);
std::pair<double, double> lambda_pm(double q);  // ((1 - sqrt q)^2, (1 + sqrt q)^2)

// Level parameters of the limiting secular equation S(z) = h.
double h_wigner(double E);
// Eigenvalue-chain level, coded from the MP edges.
double h_wishart_bulk(double E, double q);
// Overlap-law level -(E + q - 1)/(2E) / (2 pi rho_MP(E)), coded from the density.
double h_overlap_wishart(double E, double q);

// Bulk rescaling of W = X^T X eigenvalues about E T: calibration * 2 pi rho_MP(E) (lambda - E T).
// With calibration 1 the mean spacing is 2 pi / q.
double wishart_bulk_rescale(double lambda, double E, double q, double T, double calibration = 1.0);

// Wigner soft-edge overlap limit A_ij = conj(g_i) g_j / (alpha_j - alpha_i), zero diagonal.
Matrix<cplx> edge_overlap_law(const PointConfiguration& airy);
Matrix<cplx> edge_overlap_law(const PointConfiguration& airy, const std::vector<cplx>& marks);

double soft_edge_constant(double q, EdgeSide side);
Matrix<cplx> wishart_soft_edge_overlap_law(const PointConfiguration& airy, double q, EdgeSide side);

// Bulk law on branch u: g_v sqrt((S^{-1})'(h)_u) / (S^{-1}(h)_u - mu_v).
struct OverlapRow {
  long u = 0;
  double z = 0.0;
  double derivative = 0.0;
  long first_label = 0;  // label of values[0]
  std::vector<cplx> values;

  [[nodiscard]] cplx at(long v) const;
  [[nodiscard]] double squared_norm() const;
};

cplx bulk_overlap_law(const PointConfiguration& config, double h, long u, long v);
OverlapRow bulk_overlap_row(const PointConfiguration& config, double h, long u);

// Hard-edge law on root u in (xi_{u-1}, xi_u):
// g_v sqrt(xi_v) / (z - xi_v) [sum_j |g_j|^2 xi_j / (z - xi_j)^2]^{-1/2}.
OverlapRow hard_edge_overlap_law(const PointConfiguration& bessel, double chi, long u);

struct GapLawConstants {
  double C = 0.0;  // density C x^{beta/2 - 1} e^{-beta x / 2}
  double mean = 1.0;
  double variance = 0.0;
};
GapLawConstants gap_law_constants(int beta);
double gap_density(double x, int beta);
double gap_cdf(double x, int beta);
// Signed scale applied to the extreme-eigenvalue increment (right: sqrt q/(1+sqrt q), left: -sqrt q/(1-sqrt q)).
double wishart_gap_scale(double q, EdgeSide side);

// Semicircle quantile lambda(y): int_{-2}^{lambda} rho_sc = y (adaptive Simpson + bisection).
double semicircle_cdf(double x);
double semicircle_quantile(double y);

enum class AuxiliaryKind { edge_bulk, bulk_off, new_direction };

struct AuxiliaryInputs {
  cplx g_i = 1.0;
  cplx g_j = 1.0;
  double y = 0.5;          // edge_bulk, new_direction
  double y1 = 0.25;        // bulk_off
  double y2 = 0.75;        // bulk_off
  double derivative = 1.0;  // (S^{-1})'(h)_i for bulk_off, new_direction
  bool upper_edge = false;  // edge_bulk: use lambda = 2 instead of -2
};

struct AuxiliaryValue {
  cplx value;
  double scale_exponent = 1.0;  // the entry times N^{scale_exponent} has this limit
  std::string scale;            // "N" or "sqrt(N)"
};

AuxiliaryValue auxiliary_regimes(AuxiliaryKind kind, const AuxiliaryInputs& in, double min_gap = 1e-8);

namespace detail {
double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double tol);
}

}  // namespace minorproc
