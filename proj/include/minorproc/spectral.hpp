#pragma once

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "minorproc/ensembles.hpp"
#include "minorproc/linalg.hpp"

namespace minorproc {

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class S>
struct SpectralData {
  RealVector values;  // ascending
  Matrix<S> vectors;  // orthonormal columns aligned with values

  [[nodiscard]] Eigen::Index size() const { return values.size(); }
};

struct SpectralCheck {
  double orthogonality = 0.0;  // max |U^H U - I|
  double residual = 0.0;       // max |H U - U diag(values)|
  double scale = 0.0;          // max |H_ij|, at least 1
  bool ascending = true;
};

template <class S>
SpectralData<S> eig_dense(const Matrix<S>& H);

template <class S>
RealVector eigvals_dense(const Matrix<S>& H);

template <class S>
SpectralCheck check_spectral(const Matrix<S>& H, const SpectralData<S>& data);

// Symmetric tridiagonal eigenvalues (diag d, off-diagonal e), ascending.
RealVector tridiagonal_eigenvalues(const RealVector& d, const RealVector& e);
// Eigenvalues with 1-based indices il..iu.
RealVector tridiagonal_eigenvalues(const RealVector& d, const RealVector& e, int il, int iu);
// Number of eigenvalues strictly below x.
int sturm_count(const RealVector& d, const RealVector& e, double x);

enum class ArrowMode { wigner, wishart };

// Wigner: f(z) = corner - z - sum_j w_j / (poles_j - z).
// Wishart: F(z) = 1 + sum_j w_j / (poles_j - z) - gamma / z, the secular function of
// the bordered Gram matrix with border sqrt(poles_j * w_j) and corner sum(w) + gamma.
struct ArrowheadProblem {
  RealVector poles;
  RealVector weights;
  double corner = 0.0;
  std::optional<double> gamma;
  ArrowMode mode = ArrowMode::wigner;

  void validate() const;
};

double secular_f(const ArrowheadProblem& problem, double z);

// Eigen-decomposition of the arrowhead in the pole basis, for the real border
// sqrt(w) (Wigner) or sqrt(poles * w) (Wishart). Coordinate N is the new direction.
struct ArrowheadSolution {
  RealVector values;
  RealMatrix vectors;
  RealMatrix differences;  // values(i) - poles(j), from the root offsets where the solver has them
  int deflated = 0;
  int merged = 0;
};

struct DeflationPolicy {
  double weight_rel = 1e-24;
  double gap_rel = 1e-13;
};

ArrowheadSolution arrowhead_eigen(const ArrowheadProblem& problem, const DeflationPolicy& policy = {});

// Omega(i, j) = <u_i^{after}, iota(u_j^{before})> for j < N and the last
// coordinate of u_i^{after} for j = N.
template <class S>
struct OverlapMatrix {
  Matrix<S> entries;
  std::optional<int> anchor_u;
  std::optional<int> anchor_v;

  [[nodiscard]] Eigen::Index size() const { return entries.rows(); }
  [[nodiscard]] double orthogonality_error() const;
  [[nodiscard]] double max_row_norm_error() const;
};

// Phase each row so entry (i, i + shift) is real and nonnegative. When that
// entry is zero or out of range the first nonzero entry is used instead.
template <class S>
void normalize_row_phases(Matrix<S>& omega, int shift = 0);

template <class S>
OverlapMatrix<S> overlap_matrix(const SpectralData<S>& after, const SpectralData<S>& before);

struct GapTable {
  RealVector after;
  RealVector before;
  // Optional after(i) - before(j) carried at full relative precision; when empty the
  // gaps are formed by subtraction, which loses digits when after(i) hugs before(j).
  RealMatrix differences;

  [[nodiscard]] double operator()(Eigen::Index i, Eigen::Index j) const {
    return differences.size() ? differences(i, j) : after(i) - before(j);
  }
  // Cauchy interlacing after_i <= before_i <= after_{i+1}, tolerance relative to scale.
  [[nodiscard]] bool interlaces(double rel_tol = 1e-10) const;
  [[nodiscard]] int interlacing_violations(double rel_tol = 1e-10) const;
};

// Spectral data of W = X^H X from a thin SVD of X, plus the left singular vectors.
template <class S>
struct WishartSpectral {
  RealVector values;  // ascending eigenvalues of W
  Matrix<S> right;    // eigenvectors of W
  Matrix<S> left;     // T x N, left singular vectors, column j paired with values(j)
};

template <class S>
WishartSpectral<S> wishart_spectral(const Matrix<S>& X);

template <class S>
struct OneStep {
  RealVector before;
  RealVector after;
  Vector<S> coords;     // border coordinates in the old eigenbasis
  double gamma = 0.0;   // Wishart null-space mass
  OverlapMatrix<S> omega;
  ArrowheadSolution arrowhead;

  [[nodiscard]] GapTable gaps() const { return {after, before, arrowhead.differences}; }
};

template <class S>
OneStep<S> one_step_wigner(const SpectralData<S>& before, const MinorExtension<S>& ext,
                           const DeflationPolicy& policy = {});

template <class S>
OneStep<S> one_step_wishart(const WishartSpectral<S>& before, const Vector<S>& g,
                            const DeflationPolicy& policy = {});

struct ShiftIdentityReport {
  std::vector<double> residuals;
  std::vector<std::pair<int, int>> checked;
  std::vector<std::pair<int, int>> skipped;
  [[nodiscard]] double max_residual() const;
};

// lambda_i(H + D) - lambda_j(H) against (u'_i^H D u_j) / (u'_i^H u_j).
// Residuals are |LHS - RHS| / max(1, |LHS|).
template <class S>
ShiftIdentityReport shift_identity_check(const Matrix<S>& H, const Matrix<S>& D,
                                         const std::vector<std::pair<int, int>>& pairs,
                                         double min_denominator = 1e-12);

struct RatioTriple {
  int k;  // row, index into after
  int i;  // reference column
  int j;  // compared column
};

struct RatioReport {
  double ratio = 0.0;          // max relative residual of Omega_kj / Omega_ki
  double new_direction = 0.0;  // max relative residual of Omega_{k,N} / Omega_ki
  double diagonal = 0.0;       // max relative residual of |Omega_ii|^2
  int checked = 0;
  std::vector<RatioTriple> filtered;
  [[nodiscard]] double max() const { return std::max({ratio, new_direction, diagonal}); }
};

// For Wishart pass mode = wishart; coordinates are then the left-singular
// coordinates and the border carries an extra sqrt(lambda_j).
template <class S>
RatioReport ratio_identities_check(const Matrix<S>& omega, const GapTable& gaps, const Vector<S>& coords,
                                   const std::vector<RatioTriple>& triples, ArrowMode mode = ArrowMode::wigner,
                                   double min_coord = 1e-12);

}  // namespace minorproc
