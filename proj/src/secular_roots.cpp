#include "minorproc/detail/secular_roots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace minorproc::detail {

namespace {

double ulp_of(double x) {
  const double ax = std::abs(x);
  return std::nextafter(ax, std::numeric_limits<double>::infinity()) - ax;
}

// Root of a*t^2 + b*t + c in the open interval (lo, hi), if any.
std::optional<double> quadratic_root_in(double a, double b, double c, double lo, double hi) {
  auto inside = [&](double t) { return std::isfinite(t) && t > lo && t < hi; };
  if (a == 0.0 || std::abs(a) * std::max(std::abs(lo), std::abs(hi)) < 1e-300) {
    if (b == 0.0) return std::nullopt;
    const double t = -c / b;
    return inside(t) ? std::optional<double>(t) : std::nullopt;
  }
  double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) disc = 0.0;
  const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
  const double t1 = q / a;
  const double t2 = q != 0.0 ? c / q : t1;
  if (inside(t2)) return t2;
  if (inside(t1)) return t1;
  return std::nullopt;
}

}  // namespace

SecularSolver::SecularSolver(std::vector<double> poles, std::vector<double> weights, double a0, double a1)
    : d_(std::move(poles)), w_(std::move(weights)), a0_(a0), a1_(a1) {
  if (d_.size() != w_.size()) throw std::invalid_argument("secular solver: poles and weights differ in length");
  if (a1_ < 0.0) throw std::invalid_argument("secular solver: linear coefficient must be nonnegative");
  for (std::size_t j = 0; j < d_.size(); ++j) {
    if (!(w_[j] > 0.0) || !std::isfinite(w_[j])) throw std::invalid_argument("secular solver: weights must be positive");
    if (j > 0 && !(d_[j] > d_[j - 1])) throw std::invalid_argument("secular solver: poles must be strictly ascending");
    wsum_ += w_[j];
  }
}

SecularSolver::Eval SecularSolver::eval_offset(int base, double tau, int split) const {
  Eval e;
  double pole_sum = 0.0;
  double abs_sum = 0.0;
  const int m = size();
  for (int j = 0; j < m; ++j) {
    const double diff = tau_base_diff(j, base) - tau;  // d_j - z
    const double term = w_[j] / diff;
    pole_sum += term;
    abs_sum += std::abs(term);
    const double dterm = term / diff;
    if (j <= split) {
      e.left_deriv += dterm;
    } else {
      e.right_deriv += dterm;
    }
  }
  const double z = d_[base] + tau;
  e.value = a0_ + a1_ * z + pole_sum;
  e.scale = std::abs(a0_) + std::abs(a1_ * z) + abs_sum;
  return e;
}

double SecularSolver::pole_derivative(const SecularRoot& r) const {
  return pairwise_sum(0, size(), [&](int j) {
    const double diff = difference(r, j);
    return w_[j] / (diff * diff);
  });
}

SecularRoot SecularSolver::interior_root(int k) const {
  const int m = size();
  if (k < 0 || k + 1 >= m) throw std::out_of_range("secular solver: interior interval index out of range");
  const double delta = d_[k + 1] - d_[k];
  const Eval mid = eval_offset(k, 0.5 * delta, k);
  int base;
  double lo, hi;
  if (mid.value >= 0.0) {
    base = k;
    lo = 0.0;
    hi = 0.5 * delta;
  } else {
    base = k + 1;
    lo = tau_base_diff(k, k + 1) * 0.5;  // -(delta / 2) relative to the right pole
    hi = 0.0;
  }
  const double pL = tau_base_diff(k, base);
  const double pR = tau_base_diff(k + 1, base);

  double y = base == k ? hi : lo;
  Eval e = mid;
  if (e.value == 0.0) return {base, y, d_[base] + y};
  if (std::abs(e.value) <= rel_tol * e.scale) return {base, y, d_[base] + y};

  double prev_width = hi - lo;
  int slow_steps = 0;
  for (int it = 0; it < max_iterations; ++it) {
    // two-pole rational model matching value and derivative at y
    const double gL = pL - y;
    const double gR = pR - y;
    const double r1 = e.left_deriv * gL * gL;
    const double r2 = (e.right_deriv + a1_) * gR * gR;
    const double s = e.value - r1 / gL - r2 / gR;
    const double a = s;
    const double b = -(s * (pL + pR) + r1 + r2);
    const double c = s * pL * pR + r1 * pR + r2 * pL;
    std::optional<double> next = quadratic_root_in(a, b, c, lo, hi);
    double t = next ? *next : 0.5 * (lo + hi);
    if (slow_steps >= 2) {
      t = 0.5 * (lo + hi);
      slow_steps = 0;
    }
    if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
    y = t;
    e = eval_offset(base, y, k);
    if (e.value == 0.0 || std::abs(e.value) <= rel_tol * e.scale) return {base, y, d_[base] + y};
    if (e.value < 0.0) {
      lo = y;
    } else {
      hi = y;
    }
    const double width = hi - lo;
    if (width <= 4.0 * ulp_of(std::max(std::abs(lo), std::abs(hi)))) {
      const double tm = 0.5 * (lo + hi);
      return {base, tm, d_[base] + tm};
    }
    slow_steps = width > 0.5 * prev_width ? slow_steps + 1 : 0;
    prev_width = width;
  }
  throw BracketingError("secular root did not converge", d_[k], d_[k + 1]);
}

std::optional<SecularRoot> SecularSolver::right_root() const {
  if (size() == 0) {
    if (a1_ > 0.0) return SecularRoot{0, 0.0, -a0_ / a1_};
    return std::nullopt;
  }
  if (!(a1_ > 0.0 || a0_ > 0.0)) return std::nullopt;
  return exterior_root(true);
}

std::optional<SecularRoot> SecularSolver::left_root() const {
  if (size() == 0) return std::nullopt;
  if (!(a1_ > 0.0 || a0_ < 0.0)) return std::nullopt;
  return exterior_root(false);
}

SecularRoot SecularSolver::exterior_root(bool right) const {
  const int m = size();
  const int base = right ? m - 1 : 0;
  const int split = right ? m - 1 : -1;  // every pole on the "left" list for derivative bookkeeping
  const double sgn = right ? 1.0 : -1.0;

  // grow the bracket geometrically until the sign changes
  double step = 1.0 + std::abs(a0_) + a1_ * std::abs(d_[base]) + wsum_;
  if (a1_ == 0.0 && std::abs(a0_) > 0.0) step = std::max(step, 2.0 * wsum_ / std::abs(a0_));
  Eval e = eval_offset(base, sgn * step, split);
  int grow = 0;
  while ((right ? e.value <= 0.0 : e.value >= 0.0)) {
    step *= 2.0;
    if (++grow > 2000 || !std::isfinite(step))
      throw BracketingError("exterior secular root not bracketed", right ? d_[base] : -INFINITY,
                            right ? INFINITY : d_[base]);
    e = eval_offset(base, sgn * step, split);
  }
  double lo = right ? 0.0 : -step;
  double hi = right ? step : 0.0;
  double y = sgn * step;
  if (e.value == 0.0 || std::abs(e.value) <= rel_tol * e.scale) return {base, y, d_[base] + y};

  double prev_width = hi - lo;
  int slow_steps = 0;
  for (int it = 0; it < max_iterations; ++it) {
    // model s + a1 t - r / t about the base pole
    const double deriv = e.left_deriv + e.right_deriv;
    const double r = deriv * y * y;
    const double s = e.value - a1_ * y + r / y;
    double t;
    if (a1_ == 0.0) {
      t = r / s;
    } else {
      const double D = std::sqrt(s * s + 4.0 * a1_ * r);
      if (right) {
        t = s > 0.0 ? 2.0 * r / (s + D) : (-s + D) / (2.0 * a1_);
      } else {
        t = s < 0.0 ? -2.0 * r / (D - s) : (-s - D) / (2.0 * a1_);
      }
    }
    if (slow_steps >= 2) {
      t = 0.5 * (lo + hi);
      slow_steps = 0;
    }
    if (!(t > lo && t < hi)) t = 0.5 * (lo + hi);
    y = t;
    e = eval_offset(base, y, split);
    if (e.value == 0.0 || std::abs(e.value) <= rel_tol * e.scale) return {base, y, d_[base] + y};
    if (e.value < 0.0) {
      lo = y;
    } else {
      hi = y;
    }
    const double width = hi - lo;
    if (width <= 4.0 * ulp_of(std::max(std::abs(lo), std::abs(hi)))) {
      const double tm = 0.5 * (lo + hi);
      return {base, tm, d_[base] + tm};
    }
    slow_steps = width > 0.5 * prev_width ? slow_steps + 1 : 0;
    prev_width = width;
  }
  throw BracketingError("exterior secular root did not converge", right ? d_[base] : -INFINITY,
                        right ? INFINITY : d_[base]);
}

}  // namespace minorproc::detail
