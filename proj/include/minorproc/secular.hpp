#pragma once

#include <string>
#include <vector>

#include "minorproc/detail/secular_roots.hpp"
#include "minorproc/linalg.hpp"

namespace minorproc {

enum class ProcessKind { sine, airy, bessel };

std::string to_string(ProcessKind kind);

// Finite window of a limiting point process. Points carry integer labels
// first_label, first_label + 1, ...; bulk windows are labelled -M..M with
// label 0 the smallest nonnegative point, edge windows 1..M.
struct PointConfiguration {
  ProcessKind kind = ProcessKind::sine;
  int beta = 1;
  std::vector<double> points;
  std::vector<cplx> marks;  // empty for an unmarked configuration
  long first_label = 0;
  double density = 0.0;  // mean point density (1/(2 pi) for the rescaled bulk)

  [[nodiscard]] long size() const { return static_cast<long>(points.size()); }
  [[nodiscard]] long last_label() const { return first_label + size() - 1; }
  [[nodiscard]] bool has_label(long l) const { return l >= first_label && l <= last_label(); }
  [[nodiscard]] long index_of(long label) const;
  [[nodiscard]] double point(long label) const { return points[index_of(label)]; }
  [[nodiscard]] cplx mark(long label) const { return marks[index_of(label)]; }
  [[nodiscard]] double weight(long label) const { return std::norm(mark(label)); }
  [[nodiscard]] bool marked() const { return !marks.empty(); }
  // Half-width M of a bulk window (points -M..M).
  [[nodiscard]] long half_width() const;

  // require_symmetric=false admits intermediate bulk windows (e.g. psi_step output before re-centering)
  void validate(bool require_symmetric = true) const;
};

struct SumWithTail {
  double value = 0.0;
  double tail_bound = 0.0;  // heuristic bound on the truncated remainder
};

// S(z) = sum_j |g_j|^2 / (mu_j - z), summed in symmetric label pairs (j, -j).
double stieltjes_S(const PointConfiguration& config, double z);
SumWithTail stieltjes_S_with_tail(const PointConfiguration& config, double z);

// Branch u is the interval (mu_u, mu_{u+1}).
struct BranchRoot {
  long u = 0;
  double z = 0.0;
  double derivative = 0.0;  // (S^{-1})'(h)_u = 1 / sum_j |g_j|^2 / (mu_j - z)^2
  detail::SecularRoot root;
};

class WindowError : public std::runtime_error {
 public:
  WindowError(const std::string& what, long required_half_width)
      : std::runtime_error(what), required_(required_half_width) {}
  [[nodiscard]] long required_half_width() const { return required_; }

 private:
  long required_;
};

// Smallest admissible distance (in points) of a branch from the window boundary.
long branch_margin(const PointConfiguration& config);

BranchRoot inverse_branch_root(const PointConfiguration& config, double h, long u);
double inverse_branch(const PointConfiguration& config, double h, long u);
double inverse_branch_derivative(const PointConfiguration& config, double h, long u);

// Solver for S(z) = h on a marked bulk configuration, so that several
// branches reuse the same setup.
class BulkSecular {
 public:
  BulkSecular(const PointConfiguration& config, double h);
  [[nodiscard]] BranchRoot branch(long u) const;
  // z* - mu_v to full precision.
  [[nodiscard]] double difference(const BranchRoot& r, long v) const;
  // S(z*) - h evaluated through the offset form of the root.
  [[nodiscard]] double residual(const BranchRoot& r) const;
  [[nodiscard]] const PointConfiguration& config() const { return *config_; }
  [[nodiscard]] long min_branch() const;
  [[nodiscard]] long max_branch() const;

 private:
  const PointConfiguration* config_;
  double h_;
  detail::SecularSolver solver_;
};

// D(z) = sum_j |g_j|^2 / (xi_j - z) - chi / z on a Bessel configuration.
double hard_edge_D(const PointConfiguration& config, double chi, double z);
SumWithTail hard_edge_D_with_tail(const PointConfiguration& config, double chi, double z);

// Roots of D: root u (label 1..) lies in (xi_{u-1}, xi_u) with xi_0 = 0.
class HardEdgeSecular {
 public:
  HardEdgeSecular(const PointConfiguration& config, double chi);
  [[nodiscard]] BranchRoot root(long u) const;
  [[nodiscard]] double difference(const BranchRoot& r, long v) const;
  [[nodiscard]] const PointConfiguration& config() const { return *config_; }

 private:
  const PointConfiguration* config_;
  detail::SecularSolver solver_;
};

// Psi step: one new point per admissible branch; output labelled by branch.
// margin < 0 selects branch_margin(config).
PointConfiguration psi_step(const PointConfiguration& config, const std::vector<cplx>& marks, double h,
                            long margin = -1);

// Coefficients of the current basis vectors (rows) against the step-0 window basis (columns).
struct BasisState {
  long first_label = 0;       // label of row 0
  long column_first_label = 0;
  Matrix<cplx> coeffs;
  std::vector<double> leakage;  // 1 - squared row norm before renormalization
  bool canonical = false;       // coeffs is the identity (skips the product in phi_step)

  static BasisState identity(const PointConfiguration& config);
  [[nodiscard]] long rows() const { return static_cast<long>(coeffs.rows()); }
  [[nodiscard]] long last_label() const { return first_label + rows() - 1; }
  [[nodiscard]] double max_row_norm_error() const;
};

class DegenerateGapError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One-step coefficient matrix C_{i j} = upsilon_i g_j / (new_i - old_j),
// rows labelled by new_config, columns by old_config.
Matrix<cplx> phi_coefficients(const PointConfiguration& new_config, const PointConfiguration& old_config,
                              const std::vector<cplx>& marks, double min_gap = 1e-14);

// New basis rows C * (old rows), renormalized with the lost mass recorded as leakage.
BasisState advance_basis(const BasisState& basis, const Matrix<cplx>& C, long new_first_label);

// Phi step: rows of the new basis are C * (old rows); rows renormalized with leakage recorded.
BasisState phi_step(const BasisState& basis, const PointConfiguration& new_config,
                    const PointConfiguration& old_config, const std::vector<cplx>& marks, double min_gap = 1e-14);

// T step on a Bessel configuration: roots of D in (0, xi_1), (xi_1, xi_2), ...
// keep <= 0 keeps one root per interval in the window.
PointConfiguration t_step(const PointConfiguration& config, const std::vector<cplx>& marks, double chi,
                          long keep = 0);

}  // namespace minorproc
