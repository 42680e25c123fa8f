#include "minorproc/spectral.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>
#include <sstream>

#include "minorproc/detail/secular_roots.hpp"

namespace minorproc {

namespace {

[[noreturn]] void throw_convergence(const char* routine, int info, double frob, double maxabs, Eigen::Index n) {
  std::ostringstream os;
  os << routine << " failed to converge (info=" << info << ", n=" << n << ", ||H||_F=" << frob
     << ", max|H_ij|=" << maxabs << ")";
  throw ConvergenceError(os.str());
}

}  // namespace

template <class S>
SpectralData<S> eig_dense(const Matrix<S>& H) {
  const Eigen::Index n = H.rows();
  if (H.cols() != n) throw std::invalid_argument("eig_dense: matrix must be square");
  SpectralData<S> out;
  if (n == 0) {
    out.values.resize(0);
    out.vectors.resize(0, 0);
    return out;
  }
  Eigen::SelfAdjointEigenSolver<Matrix<S>> es(H, Eigen::ComputeEigenvectors);
  if (es.info() != Eigen::Success) throw_convergence("symmetric eigensolver", static_cast<int>(es.info()), H.norm(), H.cwiseAbs().maxCoeff(), n);
  out.values = es.eigenvalues();
  out.vectors = es.eigenvectors();
  return out;
}

template <class S>
RealVector eigvals_dense(const Matrix<S>& H) {
  const Eigen::Index n = H.rows();
  if (H.cols() != n) throw std::invalid_argument("eigvals_dense: matrix must be square");
  if (n == 0) return RealVector(0);
  Eigen::SelfAdjointEigenSolver<Matrix<S>> es(H, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw_convergence("symmetric eigensolver", static_cast<int>(es.info()), H.norm(), H.cwiseAbs().maxCoeff(), n);
  return es.eigenvalues();
}

template <class S>
SpectralCheck check_spectral(const Matrix<S>& H, const SpectralData<S>& data) {
  SpectralCheck c;
  const Eigen::Index n = data.size();
  if (n == 0) return c;
  c.scale = std::max(1.0, H.cwiseAbs().maxCoeff());
  c.orthogonality = (data.vectors.adjoint() * data.vectors - Matrix<S>::Identity(n, n)).cwiseAbs().maxCoeff();
  const Matrix<S> lam = data.values.template cast<S>().asDiagonal();
  c.residual = (H * data.vectors - data.vectors * lam).cwiseAbs().maxCoeff();
  for (Eigen::Index i = 1; i < n; ++i)
    if (data.values(i) < data.values(i - 1)) c.ascending = false;
  return c;
}

namespace {

// LDL^T pivot signs of T - x from the squared off-diagonal.
int sturm_count_squared(const RealVector& d, const RealVector& e2, double x) {
  const Eigen::Index n = d.size();
  const double tiny = std::numeric_limits<double>::min() * 1e10;
  double q = d(0) - x;
  if (q == 0.0) q = -tiny;
  int count = q < 0.0 ? 1 : 0;
  for (Eigen::Index i = 1; i < n; ++i) {
    q = (d(i) - x) - e2(i - 1) / q;
    if (q == 0.0) q = -tiny;
    count += q < 0.0 ? 1 : 0;
  }
  return count;
}

constexpr int kBatch = 12;

void sturm_counts_batch(const RealVector& d, const RealVector& e2, const std::array<double, kBatch>& x,
                        std::array<int, kBatch>& count) {
  const Eigen::Index n = d.size();
  const double tiny = std::numeric_limits<double>::min() * 1e10;
  std::array<double, kBatch> q;
  std::array<int, kBatch> c{};
  for (int f = 0; f < kBatch; ++f) {
    q[f] = d(0) - x[f];
    q[f] = q[f] == 0.0 ? -tiny : q[f];
    c[f] = q[f] < 0.0 ? 1 : 0;
  }
  for (Eigen::Index i = 1; i < n; ++i) {
    const double di = d(i), ei = e2(i - 1);
    for (int f = 0; f < kBatch; ++f) {
      double t = (di - x[f]) - ei / q[f];
      t = t == 0.0 ? -tiny : t;
      q[f] = t;
      c[f] += t < 0.0 ? 1 : 0;
    }
  }
  count = c;
}

}  // namespace

RealVector tridiagonal_eigenvalues(const RealVector& d, const RealVector& e) {
  const Eigen::Index n = d.size();
  if (n > 0 && e.size() < n - 1) throw std::invalid_argument("tridiagonal: off-diagonal too short");
  if (n == 0) return RealVector(0);
  if (n == 1) return d;
  Eigen::SelfAdjointEigenSolver<RealMatrix> es;
  es.computeFromTridiagonal(d, e.head(n - 1), Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) throw_convergence("tridiagonal QR", static_cast<int>(es.info()), d.norm() + e.norm(), d.cwiseAbs().maxCoeff(), n);
  return es.eigenvalues();
}

RealVector tridiagonal_eigenvalues(const RealVector& d, const RealVector& e, int il, int iu) {
  const Eigen::Index n = d.size();
  if (il < 1 || iu > n || il > iu) throw std::invalid_argument("tridiagonal: index range out of bounds");
  if (e.size() < n - 1) throw std::invalid_argument("tridiagonal: off-diagonal too short");
  // Gershgorin bounds, then bisection on Sturm counts
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double r = (i > 0 ? std::abs(e(i - 1)) : 0.0) + (i + 1 < n ? std::abs(e(i)) : 0.0);
    lo = std::min(lo, d(i) - r);
    hi = std::max(hi, d(i) + r);
  }
  const double span = std::max(std::abs(lo), std::abs(hi));
  const double pad = 2.0 * std::numeric_limits<double>::epsilon() * span + std::numeric_limits<double>::min();
  lo -= pad;
  hi += pad;
  const RealVector e2 = e.head(std::max<Eigen::Index>(n - 1, 0)).cwiseAbs2();
  const int m = iu - il + 1;
  // Brackets for every wanted index; each pass bisects up to kBatch unconverged
  // brackets at once so that the independent LDL^T recurrences overlap.
  std::vector<double> lower(m, lo), upper(m, hi);
  std::vector<char> done(m, 0);
  auto converged = [](double a, double b) {
    const double mid = 0.5 * (a + b);
    return mid == a || mid == b ||
           b - a <= 2.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
  };
  std::array<double, kBatch> shifts{};
  std::array<int, kBatch> counts{};
  std::array<int, kBatch> which{};
  for (int pass = 0; pass < 400; ++pass) {
    int filled = 0;
    for (int k = 0; k < m && filled < kBatch; ++k) {
      if (done[k]) continue;
      if (converged(lower[k], upper[k])) {
        done[k] = 1;
        continue;
      }
      which[filled] = k;
      shifts[filled] = 0.5 * (lower[k] + upper[k]);
      ++filled;
    }
    if (filled == 0) break;
    for (int f = filled; f < kBatch; ++f) shifts[f] = shifts[0];
    sturm_counts_batch(d, e2, shifts, counts);
    for (int f = 0; f < filled; ++f) {
      const double x = shifts[f];
      const int c = counts[f];
      // a count at x tightens every bracket, not only the one it was chosen for
      for (int j = 0; j < m; ++j) {
        if (c >= il + j) {
          upper[j] = std::min(upper[j], x);
        } else {
          lower[j] = std::max(lower[j], x);
        }
      }
    }
  }
  RealVector w(m);
  for (int k = 0; k < m; ++k) w(k) = 0.5 * (lower[k] + upper[k]);
  return w;
}

int sturm_count(const RealVector& d, const RealVector& e, double x) {
  return sturm_count_squared(d, e.head(std::max<Eigen::Index>(d.size() - 1, 0)).cwiseAbs2(), x);
}

void ArrowheadProblem::validate() const {
  if (poles.size() != weights.size()) throw std::invalid_argument("arrowhead: poles and weights differ in length");
  for (Eigen::Index j = 0; j < poles.size(); ++j) {
    if (!std::isfinite(poles(j)) || !std::isfinite(weights(j))) throw std::invalid_argument("arrowhead: non-finite input");
    if (weights(j) < 0.0) throw std::invalid_argument("arrowhead: weights must be nonnegative");
    if (j > 0 && poles(j) < poles(j - 1)) throw std::invalid_argument("arrowhead: poles must be ascending");
  }
  if (mode == ArrowMode::wishart) {
    if (!gamma) throw std::invalid_argument("arrowhead: wishart mode requires gamma");
    if (*gamma < 0.0) throw std::invalid_argument("arrowhead: gamma must be nonnegative");
    if (poles.size() > 0 && !(poles(0) > 0.0)) throw std::invalid_argument("arrowhead: wishart poles must be positive");
  }
}

double secular_f(const ArrowheadProblem& problem, double z) {
  problem.validate();
  const int n = static_cast<int>(problem.poles.size());
  for (int j = 0; j < n; ++j)
    if (problem.poles(j) == z) throw std::domain_error("secular function evaluated at a pole");
  const double s = detail::pairwise_sum(0, n, [&](int j) { return problem.weights(j) / (problem.poles(j) - z); });
  if (problem.mode == ArrowMode::wigner) return problem.corner - z - s;
  if (z == 0.0) throw std::domain_error("wishart secular function evaluated at z = 0");
  return 1.0 + s - *problem.gamma / z;
}

ArrowheadSolution arrowhead_eigen(const ArrowheadProblem& problem, const DeflationPolicy& policy) {
  problem.validate();
  const bool wishart = problem.mode == ArrowMode::wishart;
  const int n = static_cast<int>(problem.poles.size());
  const RealVector& d = problem.poles;
  const double gamma = wishart ? *problem.gamma : 0.0;

  std::vector<double> b(n);
  double total = gamma;
  for (int j = 0; j < n; ++j) {
    b[j] = std::sqrt(problem.weights(j) * (wishart ? d(j) : 1.0));
    total += problem.weights(j);
  }
  std::vector<char> active(n, 1);
  int deflated = 0;
  for (int j = 0; j < n; ++j) {
    if (!(problem.weights(j) > policy.weight_rel * total)) {
      active[j] = 0;
      b[j] = 0.0;
      ++deflated;
    }
  }

  // merge nearly coincident poles with a rotation that zeroes one border entry
  struct Rotation {
    int p, q;
    double cs, sn;
  };
  std::vector<Rotation> rotations;
  double pole_scale = 0.0;
  if (n > 0) pole_scale = std::max(d(n - 1) - d(0), std::max(std::abs(d(0)), std::abs(d(n - 1))));
  const double gap_tol = policy.gap_rel * pole_scale;
  int last = -1;
  for (int j = 0; j < n; ++j) {
    if (!active[j]) continue;
    if (last >= 0 && d(j) - d(last) <= gap_tol) {
      const double r = std::hypot(b[last], b[j]);
      rotations.push_back({last, j, b[last] / r, b[j] / r});
      b[j] = r;
      b[last] = 0.0;
      active[last] = 0;
    }
    last = j;
  }

  std::vector<int> act;
  std::vector<double> apoles, aweights;
  for (int j = 0; j < n; ++j) {
    if (!active[j]) continue;
    act.push_back(j);
    apoles.push_back(d(j));
    aweights.push_back(wishart ? b[j] * b[j] / d(j) : b[j] * b[j]);
  }
  const int m = static_cast<int>(act.size());

  // eigenpairs with their differences z - d_j; the solver supplies those in offset form
  struct Pair {
    double first;
    RealVector second;
    RealVector diff;
  };
  std::vector<Pair> pairs;
  pairs.reserve(n + 1);
  auto direct_differences = [&](double z) {
    RealVector r(n);
    for (int j = 0; j < n; ++j) r(j) = z - d(j);
    return r;
  };
  for (int j = 0; j < n; ++j) {
    if (active[j]) continue;
    RealVector v = RealVector::Zero(n + 1);
    v(j) = 1.0;
    RealVector r = direct_differences(d(j));
    r(j) = 0.0;
    pairs.push_back({d(j), std::move(v), std::move(r)});
  }

  // assemble x_j = b_j t / (z - d_j), x_N = t
  auto push_root = [&](double z, const auto& diff_of) {
    RealVector v = RealVector::Zero(n + 1);
    RealVector r = direct_differences(z);
    double ss = 1.0;
    for (int a = 0; a < m; ++a) {
      r(act[a]) = diff_of(a);
      const double x = b[act[a]] / r(act[a]);
      v(act[a]) = x;
      ss += x * x;
    }
    const double t = 1.0 / std::sqrt(ss);
    for (int a = 0; a < m; ++a) v(act[a]) *= t;
    v(n) = t;
    pairs.push_back({z, std::move(v), std::move(r)});
  };

  if (!wishart) {
    if (m == 0) {
      push_root(problem.corner, [](int) { return 1.0; });
    } else {
      detail::SecularSolver solver(apoles, aweights, -problem.corner, 1.0);
      std::vector<detail::SecularRoot> roots;
      roots.push_back(*solver.left_root());
      for (int k = 0; k + 1 < m; ++k) roots.push_back(solver.interior_root(k));
      roots.push_back(*solver.right_root());
      for (const auto& r : roots) push_root(r.z, [&](int a) { return solver.difference(r, a); });
    }
  } else {
    const bool gamma_active = gamma > policy.weight_rel * total;
    if (!gamma_active) {
      // z = 0 is an exact eigenvalue of the rank-deficient Gram matrix
      push_root(0.0, [&](int a) { return -apoles[a]; });
      if (m > 0) {
        detail::SecularSolver solver(apoles, aweights, 1.0, 0.0);
        for (int k = 0; k + 1 < m; ++k) {
          const auto r = solver.interior_root(k);
          push_root(r.z, [&](int a) { return solver.difference(r, a); });
        }
        const auto r = *solver.right_root();
        push_root(r.z, [&](int a) { return solver.difference(r, a); });
      }
    } else {
      std::vector<double> p2{0.0}, w2{gamma};
      p2.insert(p2.end(), apoles.begin(), apoles.end());
      w2.insert(w2.end(), aweights.begin(), aweights.end());
      detail::SecularSolver solver(p2, w2, 1.0, 0.0);
      for (int k = 0; k < m; ++k) {
        const auto r = solver.interior_root(k);
        push_root(r.z, [&](int a) { return solver.difference(r, a + 1); });
      }
      const auto r = *solver.right_root();
      push_root(r.z, [&](int a) { return solver.difference(r, a + 1); });
    }
  }

  // undo the merge rotations, newest first
  for (auto it = rotations.rbegin(); it != rotations.rend(); ++it) {
    for (auto& pr : pairs) {
      RealVector& v = pr.second;
      const double yp = v(it->p);
      const double yq = v(it->q);
      v(it->p) = -it->sn * yp + it->cs * yq;
      v(it->q) = it->cs * yp + it->sn * yq;
    }
  }

  std::stable_sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) { return x.first < y.first; });
  ArrowheadSolution sol;
  sol.values.resize(n + 1);
  sol.vectors.resize(n + 1, n + 1);
  sol.differences.resize(n + 1, n);
  for (int i = 0; i <= n; ++i) {
    sol.values(i) = pairs[i].first;
    sol.vectors.col(i) = pairs[i].second;
    sol.differences.row(i) = pairs[i].diff.transpose();
  }
  sol.deflated = deflated;
  sol.merged = static_cast<int>(rotations.size());
  return sol;
}

template <class S>
double OverlapMatrix<S>::orthogonality_error() const {
  const Eigen::Index n = entries.rows();
  if (n == 0) return 0.0;
  const double a = (entries * entries.adjoint() - Matrix<S>::Identity(n, n)).cwiseAbs().maxCoeff();
  const double b = (entries.adjoint() * entries - Matrix<S>::Identity(n, n)).cwiseAbs().maxCoeff();
  return std::max(a, b);
}

template <class S>
double OverlapMatrix<S>::max_row_norm_error() const {
  double err = 0.0;
  for (Eigen::Index i = 0; i < entries.rows(); ++i) err = std::max(err, std::abs(entries.row(i).norm() - 1.0));
  return err;
}

template <class S>
void normalize_row_phases(Matrix<S>& omega, int shift) {
  const Eigen::Index rows = omega.rows();
  const Eigen::Index cols = omega.cols();
  for (Eigen::Index i = 0; i < rows; ++i) {
    Eigen::Index c = i + shift;
    if (c < 0 || c >= cols || abs2(omega(i, c)) == 0.0) {
      c = -1;
      for (Eigen::Index j = 0; j < cols; ++j) {
        if (abs2(omega(i, j)) != 0.0) {
          c = j;
          break;
        }
      }
      if (c < 0) continue;
    }
    const S p = unphase(omega(i, c));
    omega.row(i) *= p;
    omega(i, c) = S(std::abs(omega(i, c)));
  }
}

template <class S>
OverlapMatrix<S> overlap_matrix(const SpectralData<S>& after, const SpectralData<S>& before) {
  const Eigen::Index n = before.size();
  if (after.size() != n + 1 || after.vectors.rows() != n + 1 || before.vectors.rows() != n)
    throw std::invalid_argument("overlap_matrix: after must have dimension N+1 for a before of dimension N");
  Matrix<S> basis = Matrix<S>::Zero(n + 1, n + 1);
  basis.topLeftCorner(n, n) = before.vectors;
  basis(n, n) = S(1.0);
  OverlapMatrix<S> out;
  out.entries = (basis.adjoint() * after.vectors).transpose();
  normalize_row_phases(out.entries, 0);
  return out;
}

bool GapTable::interlaces(double rel_tol) const { return interlacing_violations(rel_tol) == 0; }

int GapTable::interlacing_violations(double rel_tol) const {
  const Eigen::Index n = before.size();
  if (after.size() != n + 1) throw std::invalid_argument("GapTable: after must have one more value than before");
  double scale = 1.0;
  if (n > 0) scale = std::max({1.0, before.cwiseAbs().maxCoeff(), after.cwiseAbs().maxCoeff()});
  const double tol = rel_tol * scale;
  int bad = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (after(i) > before(i) + tol) ++bad;
    if (before(i) > after(i + 1) + tol) ++bad;
  }
  return bad;
}

template <class S>
WishartSpectral<S> wishart_spectral(const Matrix<S>& X) {
  const Eigen::Index T = X.rows(), n = X.cols();
  if (T < n) throw std::invalid_argument("wishart_spectral: requires T >= N");
  WishartSpectral<S> out;
  out.values.resize(n);
  out.right.resize(n, n);
  out.left.resize(T, n);
  if (n == 0) return out;
  Eigen::BDCSVD<Matrix<S>> svd(X, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success) throw_convergence("divide-and-conquer SVD", static_cast<int>(svd.info()), X.norm(), X.cwiseAbs().maxCoeff(), n);
  const RealVector& s = svd.singularValues();
  for (Eigen::Index j = 0; j < n; ++j) {
    const Eigen::Index k = n - 1 - j;
    out.values(j) = s(k) * s(k);
    out.right.col(j) = svd.matrixV().col(k);
    out.left.col(j) = svd.matrixU().col(k);
  }
  return out;
}

namespace {

template <class S>
OneStep<S> assemble_one_step(RealVector before, Vector<S> coords, ArrowheadProblem problem, double gamma,
                             const DeflationPolicy& policy) {
  OneStep<S> out;
  out.arrowhead = arrowhead_eigen(problem, policy);
  const Eigen::Index n = before.size();
  out.before = std::move(before);
  out.after = out.arrowhead.values;
  out.gamma = gamma;
  Vector<S> phase(n);
  for (Eigen::Index j = 0; j < n; ++j) phase(j) = conj_of(unphase(coords(j)));
  Matrix<S> omega(n + 1, n + 1);
  for (Eigen::Index i = 0; i <= n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) omega(i, j) = phase(j) * out.arrowhead.vectors(j, i);
    omega(i, n) = S(out.arrowhead.vectors(n, i));
  }
  normalize_row_phases(omega, 0);
  out.omega.entries = std::move(omega);
  out.coords = std::move(coords);
  return out;
}

}  // namespace

template <class S>
OneStep<S> one_step_wigner(const SpectralData<S>& before, const MinorExtension<S>& ext,
                           const DeflationPolicy& policy) {
  const Eigen::Index n = before.size();
  if (ext.g.size() != n) throw std::invalid_argument("one_step_wigner: border length must equal N");
  Vector<S> coords = before.vectors.adjoint() * ext.g;
  ArrowheadProblem problem;
  problem.poles = before.values;
  problem.weights.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) problem.weights(j) = abs2(coords(j));
  problem.corner = ext.corner;
  problem.mode = ArrowMode::wigner;
  return assemble_one_step<S>(before.values, std::move(coords), std::move(problem), 0.0, policy);
}

template <class S>
OneStep<S> one_step_wishart(const WishartSpectral<S>& before, const Vector<S>& g, const DeflationPolicy& policy) {
  const Eigen::Index n = before.values.size();
  const Eigen::Index T = before.left.rows();
  if (g.size() != T) throw std::invalid_argument("one_step_wishart: column length must equal T");
  Vector<S> coords = before.left.adjoint() * g;
  double gamma = 0.0;
  if (T > n) gamma = (g - before.left * coords).squaredNorm();
  ArrowheadProblem problem;
  problem.poles = before.values;
  problem.weights.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) problem.weights(j) = abs2(coords(j));
  problem.gamma = gamma;
  problem.mode = ArrowMode::wishart;
  return assemble_one_step<S>(before.values, std::move(coords), std::move(problem), gamma, policy);
}

double ShiftIdentityReport::max_residual() const {
  double m = 0.0;
  for (double r : residuals) m = std::max(m, r);
  return m;
}

template <class S>
ShiftIdentityReport shift_identity_check(const Matrix<S>& H, const Matrix<S>& D,
                                         const std::vector<std::pair<int, int>>& pairs, double min_denominator) {
  if (H.rows() != D.rows() || H.cols() != D.cols()) throw std::invalid_argument("shift_identity_check: shape mismatch");
  const auto base = eig_dense<S>(H);
  const Matrix<S> HD = H + D;
  const auto pert = eig_dense<S>(HD);
  ShiftIdentityReport rep;
  const Eigen::Index n = H.rows();
  for (const auto& [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= n || j >= n) throw std::out_of_range("shift_identity_check: pair index out of range");
    const S den = pert.vectors.col(i).dot(base.vectors.col(j));
    if (!(std::abs(den) > min_denominator)) {
      rep.skipped.emplace_back(i, j);
      continue;
    }
    const S num = pert.vectors.col(i).dot(D * base.vectors.col(j));
    const double lhs = pert.values(i) - base.values(j);
    const S rhs = num / den;
    rep.residuals.push_back(std::abs(S(lhs) - rhs) / std::max(1.0, std::abs(lhs)));
    rep.checked.emplace_back(i, j);
  }
  return rep;
}

template <class S>
RatioReport ratio_identities_check(const Matrix<S>& omega, const GapTable& gaps, const Vector<S>& coords,
                                   const std::vector<RatioTriple>& triples, ArrowMode mode, double min_coord) {
  const Eigen::Index n = gaps.before.size();
  if (omega.rows() != n + 1 || omega.cols() != n + 1 || coords.size() != n)
    throw std::invalid_argument("ratio_identities_check: dimension mismatch");
  Vector<S> b(n);
  for (Eigen::Index j = 0; j < n; ++j)
    b(j) = mode == ArrowMode::wishart ? coords(j) * std::sqrt(gaps.before(j)) : coords(j);
  auto rel = [](S lhs, S rhs) {
    const double den = std::abs(rhs);
    return den > 0.0 ? std::abs(lhs - rhs) / den : std::abs(lhs - rhs);
  };
  RatioReport rep;
  std::vector<char> diag_done(n + 1, 0);
  for (const auto& t : triples) {
    if (t.k < 0 || t.k > n || t.i < 0 || t.i >= n || t.j < 0 || t.j >= n ||
        !(std::abs(b(t.i)) > min_coord) || abs2(omega(t.k, t.i)) == 0.0) {
      rep.filtered.push_back(t);
      continue;
    }
    const double dki = gaps(t.k, t.i);
    const double dkj = gaps(t.k, t.j);
    const S lhs = omega(t.k, t.j) / omega(t.k, t.i);
    const S rhs = (dki / dkj) * (b(t.j) / b(t.i));
    rep.ratio = std::max(rep.ratio, rel(lhs, rhs));
    const S lhs_new = omega(t.k, n) / omega(t.k, t.i);
    const S rhs_new = dki / b(t.i);
    rep.new_direction = std::max(rep.new_direction, rel(lhs_new, rhs_new));
    ++rep.checked;
    if (t.k < n && !diag_done[t.k] && std::abs(b(t.k)) > min_coord) {
      diag_done[t.k] = 1;
      const Eigen::Index i = t.k;
      double sum = 1.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        const double dij = gaps(i, j);
        sum += abs2(b(j)) / (dij * dij);
      }
      const double dii = gaps(i, i);
      const double predicted = 1.0 / ((dii * dii / abs2(b(i))) * sum);
      const double observed = abs2(omega(i, i));
      rep.diagonal = std::max(rep.diagonal, std::abs(observed - predicted) / predicted);
    }
  }
  return rep;
}

#define MINORPROC_INSTANTIATE(S)                                                                         \
  template SpectralData<S> eig_dense<S>(const Matrix<S>&);                                              \
  template RealVector eigvals_dense<S>(const Matrix<S>&);                                               \
  template WishartSpectral<S> wishart_spectral<S>(const Matrix<S>&);                                    \
  template SpectralCheck check_spectral<S>(const Matrix<S>&, const SpectralData<S>&);                  \
  template struct OverlapMatrix<S>;                                                                     \
  template void normalize_row_phases<S>(Matrix<S>&, int);                                               \
  template OverlapMatrix<S> overlap_matrix<S>(const SpectralData<S>&, const SpectralData<S>&);          \
  template OneStep<S> one_step_wigner<S>(const SpectralData<S>&, const MinorExtension<S>&,              \
                                         const DeflationPolicy&);                                       \
  template OneStep<S> one_step_wishart<S>(const WishartSpectral<S>&, const Vector<S>&,                  \
                                          const DeflationPolicy&);                                      \
  template ShiftIdentityReport shift_identity_check<S>(const Matrix<S>&, const Matrix<S>&,              \
                                                       const std::vector<std::pair<int, int>>&, double); \
  template RatioReport ratio_identities_check<S>(const Matrix<S>&, const GapTable&, const Vector<S>&,   \
                                                 const std::vector<RatioTriple>&, ArrowMode, double);

MINORPROC_INSTANTIATE(double)
MINORPROC_INSTANTIATE(cplx)
#undef MINORPROC_INSTANTIATE

}  // namespace minorproc
