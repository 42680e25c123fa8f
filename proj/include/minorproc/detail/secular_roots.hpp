#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace minorproc {

class BracketingError : public std::runtime_error {
 public:
  BracketingError(const std::string& what, double lo, double hi)
      : std::runtime_error(what + " on interval (" + std::to_string(lo) + ", " + std::to_string(hi) + ")"),
        lo_(lo), hi_(hi) {}
  [[nodiscard]] double lo() const { return lo_; }
  [[nodiscard]] double hi() const { return hi_; }

 private:
  double lo_, hi_;
};

namespace detail {

// Root z = poles[base] + tau, kept in offset form so that z - poles[j]
// is available to full relative precision near the base pole.
struct SecularRoot {
  int base = 0;
  double tau = 0.0;
  double z = 0.0;
};

// G(z) = a0 + a1 z + sum_j w_j / (d_j - z) with ascending poles d_j, positive
// weights and a1 >= 0. G is strictly increasing between consecutive poles.
class SecularSolver {
 public:
  SecularSolver(std::vector<double> poles, std::vector<double> weights, double a0, double a1);

  [[nodiscard]] int size() const { return static_cast<int>(d_.size()); }
  [[nodiscard]] const std::vector<double>& poles() const { return d_; }
  [[nodiscard]] const std::vector<double>& weights() const { return w_; }

  // Root in (d_k, d_{k+1}).
  [[nodiscard]] SecularRoot interior_root(int k) const;
  // Root in (d_last, +inf) or (-inf, d_0) when one exists.
  [[nodiscard]] std::optional<SecularRoot> right_root() const;
  [[nodiscard]] std::optional<SecularRoot> left_root() const;

  // z - d_j computed from the offset form.
  [[nodiscard]] double difference(const SecularRoot& r, int j) const {
    return (tau_base_diff(r.base, j)) + r.tau;
  }
  // sum_j w_j / (d_j - z)^2 at the root.
  [[nodiscard]] double pole_derivative(const SecularRoot& r) const;

  struct Eval {
    double value = 0.0;
    double left_deriv = 0.0;   // derivative contribution from poles with index <= split
    double right_deriv = 0.0;  // derivative contribution from poles with index > split
    double scale = 0.0;
  };
  [[nodiscard]] Eval eval_offset(int base, double tau, int split) const;

  int max_iterations = 200;
  double rel_tol = 1e-13;

 private:
  // d_base - d_j, computed as a single rounded subtraction.
  [[nodiscard]] double tau_base_diff(int base, int j) const { return d_[base] - d_[j]; }
  SecularRoot exterior_root(bool right) const;

  std::vector<double> d_;
  std::vector<double> w_;
  double a0_, a1_;
  double wsum_ = 0.0;
};

// Pairwise summation of a generated sequence of terms.
template <class F>
double pairwise_sum(int lo, int hi, const F& term) {
  const int n = hi - lo;
  if (n <= 0) return 0.0;
  if (n <= 8) {
    double s = 0.0;
    for (int i = lo; i < hi; ++i) s += term(i);
    return s;
  }
  const int mid = lo + n / 2;
  return pairwise_sum(lo, mid, term) + pairwise_sum(mid, hi, term);
}

}  // namespace detail
}  // namespace minorproc
