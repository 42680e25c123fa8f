#include "minorproc/ensembles.hpp"

#include <cmath>
#include <stdexcept>

namespace minorproc {

EntryLaw parse_entry_law(const std::string& name) {
  if (name == "gaussian") return EntryLaw::gaussian;
  if (name == "rademacher") return EntryLaw::rademacher;
  if (name == "uniform") return EntryLaw::uniform;
  throw std::invalid_argument("unknown entry law '" + name + "' (expected gaussian, rademacher or uniform)");
}

std::string to_string(EntryLaw law) {
  switch (law) {
    case EntryLaw::gaussian: return "gaussian";
    case EntryLaw::rademacher: return "rademacher";
    case EntryLaw::uniform: return "uniform";
  }
  return "gaussian";
}

void EnsembleSpec::validate() const {
  if (beta != 1 && beta != 2) throw std::invalid_argument("beta must be 1 or 2");
  if (N < 0) throw std::invalid_argument("N must be nonnegative");
  if (wishart_T && *wishart_T < N) throw std::invalid_argument("wishart T must satisfy T >= N (q <= 1)");
  if (wishart_T && *wishart_T < 1) throw std::invalid_argument("wishart T must be positive");
}

double EnsembleSpec::q() const {
  if (!wishart_T) throw std::logic_error("q is defined only for Wishart specs");
  return static_cast<double>(N) / static_cast<double>(*wishart_T);
}

double draw_real_entry(EntryLaw law, RandomStream& rng) {
  switch (law) {
    case EntryLaw::gaussian: return rng.normal();
    case EntryLaw::rademacher: return (rng() >> 63) ? 1.0 : -1.0;
    case EntryLaw::uniform: return std::sqrt(3.0) * (2.0 * rng.uniform01() - 1.0);
  }
  return 0.0;
}

template <>
double draw_entry<double>(EntryLaw law, RandomStream& rng) {
  return draw_real_entry(law, rng);
}

template <>
cplx draw_entry<cplx>(EntryLaw law, RandomStream& rng) {
  const double s = std::sqrt(0.5);
  const double re = s * draw_real_entry(law, rng);
  const double im = s * draw_real_entry(law, rng);
  return {re, im};
}

namespace {

template <class S>
void check_beta(const EnsembleSpec& spec) {
  spec.validate();
  if (spec.beta != beta_of_v<S>) throw std::invalid_argument("scalar type does not match beta");
}

}  // namespace

template <class S>
Matrix<S> sample_wigner(const EnsembleSpec& spec, RandomStream& rng) {
  check_beta<S>(spec);
  if (spec.wishart_T) throw std::invalid_argument("sample_wigner requires a spec without wishart_T");
  const int n = spec.N;
  const double dscale = spec.goe_diagonal ? std::sqrt(2.0) : 1.0;
  Matrix<S> H(n, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < j; ++i) {
      const S x = draw_entry<S>(spec.entry_law, rng);
      H(i, j) = x;
      H(j, i) = conj_of(x);
    }
    H(j, j) = S(dscale * draw_real_entry(spec.entry_law, rng));
  }
  return H;
}

template <class S>
WishartSample<S> sample_wishart(const EnsembleSpec& spec, RandomStream& rng) {
  check_beta<S>(spec);
  if (!spec.wishart_T) throw std::invalid_argument("sample_wishart requires wishart_T");
  const int T = *spec.wishart_T;
  WishartSample<S> out;
  out.X.resize(T, spec.N);
  for (int j = 0; j < spec.N; ++j)
    for (int i = 0; i < T; ++i) out.X(i, j) = draw_entry<S>(spec.entry_law, rng);
  out.W = out.X.adjoint() * out.X;
  // exact Hermitian symmetry
  for (int j = 0; j < spec.N; ++j) {
    if constexpr (is_complex_v<S>) out.W(j, j) = S(out.W(j, j).real());
    for (int i = 0; i < j; ++i) out.W(j, i) = conj_of(out.W(i, j));
  }
  return out;
}

template <class S>
MinorExtension<S> sample_extension(const EnsembleSpec& spec, RandomStream& rng) {
  check_beta<S>(spec);
  const int len = spec.wishart_T ? *spec.wishart_T : spec.N;
  MinorExtension<S> ext;
  ext.g.resize(len);
  for (int i = 0; i < len; ++i) ext.g(i) = draw_entry<S>(spec.entry_law, rng);
  if (!spec.wishart_T) {
    const double dscale = spec.goe_diagonal ? std::sqrt(2.0) : 1.0;
    ext.corner = dscale * draw_real_entry(spec.entry_law, rng);
  }
  return ext;
}

template <class S>
Matrix<S> extend_wigner(const Matrix<S>& H, const MinorExtension<S>& ext) {
  const Eigen::Index n = H.rows();
  if (H.cols() != n) throw std::invalid_argument("extend_wigner: H must be square");
  if (ext.g.size() != n) throw std::invalid_argument("extend_wigner: border length must equal N");
  Matrix<S> out(n + 1, n + 1);
  out.topLeftCorner(n, n) = H;
  out.topRightCorner(n, 1) = ext.g;
  out.bottomLeftCorner(1, n) = ext.g.adjoint();
  out(n, n) = S(ext.corner);
  return out;
}

template <class S>
Matrix<S> extend_wishart(const Matrix<S>& X, const Vector<S>& g) {
  if (g.size() != X.rows()) throw std::invalid_argument("extend_wishart: column length must equal T");
  Matrix<S> out(X.rows(), X.cols() + 1);
  out.leftCols(X.cols()) = X;
  out.col(X.cols()) = g;
  return out;
}

template <class S>
Vector<S> eigen_coordinates(const Matrix<S>& basis, const Vector<S>& g, double tol) {
  if (basis.rows() != g.size()) throw std::invalid_argument("eigen_coordinates: dimension mismatch");
  const Matrix<S> gram = basis.adjoint() * basis;
  const double dev = (gram - Matrix<S>::Identity(basis.cols(), basis.cols())).cwiseAbs().maxCoeff();
  if (basis.cols() > 0 && dev > tol)
    throw std::invalid_argument("eigen_coordinates: basis is not orthonormal (deviation " + std::to_string(dev) + ")");
  return basis.adjoint() * g;
}

#define MINORPROC_INSTANTIATE(S)                                                           \
  template Matrix<S> sample_wigner<S>(const EnsembleSpec&, RandomStream&);                \
  template WishartSample<S> sample_wishart<S>(const EnsembleSpec&, RandomStream&);        \
  template MinorExtension<S> sample_extension<S>(const EnsembleSpec&, RandomStream&);     \
  template Matrix<S> extend_wigner<S>(const Matrix<S>&, const MinorExtension<S>&);        \
  template Matrix<S> extend_wishart<S>(const Matrix<S>&, const Vector<S>&);               \
  template Vector<S> eigen_coordinates<S>(const Matrix<S>&, const Vector<S>&, double);

MINORPROC_INSTANTIATE(double)
MINORPROC_INSTANTIATE(cplx)
#undef MINORPROC_INSTANTIATE

}  // namespace minorproc
