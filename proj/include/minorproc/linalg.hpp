#pragma once

#include <Eigen/Dense>
#include <complex>
#include <type_traits>

namespace minorproc {

using cplx = std::complex<double>;

template <class S>
using Matrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using Vector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

template <class S>
inline constexpr bool is_complex_v = !std::is_same_v<S, double>;

template <class S>
inline constexpr int beta_of_v = is_complex_v<S> ? 2 : 1;

inline double conj_of(double x) { return x; }
inline cplx conj_of(cplx x) { return std::conj(x); }
inline double abs2(double x) { return x * x; }
inline double abs2(cplx x) { return std::norm(x); }

// Unit-modulus factor p with p * x real and nonnegative (p = 1 when x == 0).
inline double unphase(double x) { return x < 0.0 ? -1.0 : 1.0; }
inline cplx unphase(cplx x) {
  const double a = std::abs(x);
  return a > 0.0 ? std::conj(x) / a : cplx(1.0, 0.0);
}

template <class S>
S scalar_from(cplx z) {
  if constexpr (is_complex_v<S>) {
    return z;
  } else {
    return z.real();
  }
}

}  // namespace minorproc
