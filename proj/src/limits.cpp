#include "minorproc/limits.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "minorproc/ensembles.hpp"
#include "minorproc/spectral.hpp"

namespace minorproc {

std::string to_string(ApproximantModel m) { return m == ApproximantModel::dense ? "dense" : "tridiagonal"; }
std::string to_string(EdgeSide s) { return s == EdgeSide::left ? "left" : "right"; }

EdgeSide parse_edge_side(const std::string& s) {
  if (s == "left") return EdgeSide::left;
  if (s == "right") return EdgeSide::right;
  throw std::invalid_argument("edge side must be 'left' or 'right', got '" + s + "'");
}

void ProcessSpec::validate() const {
  if (beta != 1 && beta != 2) throw std::invalid_argument("process spec: beta must be 1 or 2");
  if (window < 1) throw std::invalid_argument("process spec: window must be positive");
  if (n_approx < 1) throw std::invalid_argument("process spec: approximant size must be positive");
  if (kind == ProcessKind::bessel && alpha < 0) throw std::invalid_argument("process spec: alpha must be >= 0");
  if (kind == ProcessKind::sine && !(std::abs(energy) < 2.0))
    throw std::invalid_argument("process spec: E must lie in (-2,2)");
  if (kind != ProcessKind::sine && window > n_approx)
    throw std::invalid_argument("process spec: window of " + std::to_string(window) + " points exceeds approximant size " +
                                std::to_string(n_approx));
}

ProcessSpec default_process_spec(ProcessKind kind) {
  ProcessSpec s;
  s.kind = kind;
  switch (kind) {
    case ProcessKind::sine:
      s.window = 128;
      s.n_approx = 2000;
      break;
    case ProcessKind::airy:
      s.window = 12;
      s.n_approx = 1000;
      break;
    case ProcessKind::bessel:
      s.window = 80;
      s.n_approx = 1000;
      break;
  }
  return s;
}

namespace {

// Hermite beta-ensemble in tridiagonal form: diag N(0, 2/beta), off-diagonal chi_{beta(n-i)}/sqrt(beta).
void hermite_tridiagonal(int beta, int n, RandomStream& rng, RealVector& d, RealVector& e) {
  d.resize(n);
  e.resize(std::max(n - 1, 0));
  const double sd = std::sqrt(2.0 / beta);
  const double isb = 1.0 / std::sqrt(static_cast<double>(beta));
  for (int i = 0; i < n; ++i) d(i) = rng.normal(sd);
  for (int i = 0; i + 1 < n; ++i) e(i) = rng.chi(static_cast<double>(beta) * (n - 1 - i)) * isb;
}

// Laguerre beta-ensemble B B^T for upper bidiagonal B with diag chi_{beta(T-i)}, super chi_{beta(n-1-i)}.
void laguerre_tridiagonal(int beta, int n, int T, RandomStream& rng, RealVector& d, RealVector& e) {
  RealVector b(n), c(std::max(n - 1, 0));
  const double isb = 1.0 / std::sqrt(static_cast<double>(beta));
  for (int i = 0; i < n; ++i) b(i) = rng.chi(static_cast<double>(beta) * (T - i)) * isb;
  for (int i = 0; i + 1 < n; ++i) c(i) = rng.chi(static_cast<double>(beta) * (n - 1 - i)) * isb;
  d.resize(n);
  e.resize(std::max(n - 1, 0));
  for (int i = 0; i < n; ++i) d(i) = b(i) * b(i) + (i + 1 < n ? c(i) * c(i) : 0.0);
  for (int i = 0; i + 1 < n; ++i) e(i) = c(i) * b(i + 1);
}

EnsembleSpec wigner_spec(int beta, int n) {
  EnsembleSpec s;
  s.beta = beta;
  s.N = n;
  s.goe_diagonal = beta == 1;  // diagonal variance 2/beta, matching the tridiagonal model
  return s;
}

}  // namespace

RealVector gaussian_ensemble_eigenvalues(int beta, int n, ApproximantModel model, RandomStream& rng) {
  if (model == ApproximantModel::dense) {
    if (beta == 1) return eigvals_dense<double>(sample_wigner<double>(wigner_spec(1, n), rng));
    return eigvals_dense<cplx>(sample_wigner<cplx>(wigner_spec(2, n), rng));
  }
  RealVector d, e;
  hermite_tridiagonal(beta, n, rng, d, e);
  return tridiagonal_eigenvalues(d, e);
}

std::vector<cplx> draw_marks(int beta, long n, RandomStream& rng) {
  std::vector<cplx> g(n);
  for (auto& x : g) x = beta == 2 ? rng.complex_normal() : cplx(rng.normal(), 0.0);
  return g;
}

PointConfiguration sample_sine(const ProcessSpec& spec, RandomStream& rng) {
  if (spec.kind != ProcessKind::sine) throw std::invalid_argument("sample_sine: spec kind must be sine");
  spec.validate();
  RandomStream prng = rng.split(tag(StreamTag::points));
  RandomStream mrng = rng.split(tag(StreamTag::marks));
  const int n = spec.n_approx;
  const RealVector ev = gaussian_ensemble_eigenvalues(spec.beta, n, spec.model, prng);
  const double E = spec.energy;
  const double rootn = std::sqrt(static_cast<double>(n));
  long anchor = 0;
  if (spec.anchor == SineAnchor::energy) {
    anchor = std::lower_bound(ev.data(), ev.data() + n, E * rootn) - ev.data();
  } else {
    const double F = 0.5 + (E * std::sqrt(4.0 - E * E) / 4.0 + std::asin(E / 2.0)) / std::numbers::pi;
    anchor = std::min<long>(n - 1, static_cast<long>(std::floor(n * F)));
  }
  const double origin = spec.anchor == SineAnchor::energy ? E * rootn : ev(anchor);
  const long M = spec.window;
  if (anchor - M < 0 || anchor + M >= n)
    throw std::invalid_argument("sample_sine: window of half-width " + std::to_string(M) +
                                " exceeds the available bulk points around the anchor");
  PointConfiguration c;
  c.kind = ProcessKind::sine;
  c.beta = spec.beta;
  c.first_label = -M;
  c.density = 1.0 / (2.0 * std::numbers::pi);
  const double scale = std::sqrt(4.0 - E * E) * rootn;
  c.points.reserve(2 * M + 1);
  for (long j = -M; j <= M; ++j) c.points.push_back(scale * (ev(anchor + j) - origin));
  c.marks = draw_marks(spec.beta, 2 * M + 1, mrng);
  return c;
}

PointConfiguration sample_airy(const ProcessSpec& spec, RandomStream& rng) {
  if (spec.kind != ProcessKind::airy) throw std::invalid_argument("sample_airy: spec kind must be airy");
  spec.validate();
  RandomStream prng = rng.split(tag(StreamTag::points));
  RandomStream mrng = rng.split(tag(StreamTag::marks));
  const int n = spec.n_approx;
  const int l = spec.window;
  RealVector vals;  // the l extreme eigenvalues, ascending
  if (spec.model == ApproximantModel::dense) {
    const RealVector ev = gaussian_ensemble_eigenvalues(spec.beta, n, spec.model, prng);
    vals = spec.side == EdgeSide::left ? RealVector(ev.head(l)) : RealVector(ev.tail(l));
  } else {
    RealVector d, e;
    hermite_tridiagonal(spec.beta, n, prng, d, e);
    vals = spec.side == EdgeSide::left ? tridiagonal_eigenvalues(d, e, 1, l) : tridiagonal_eigenvalues(d, e, n - l + 1, n);
  }
  const double rootn = std::sqrt(static_cast<double>(n));
  const double s = std::pow(static_cast<double>(n), 1.0 / 6.0);
  PointConfiguration c;
  c.kind = ProcessKind::airy;
  c.beta = spec.beta;
  c.first_label = 1;
  c.points.resize(l);
  for (int i = 0; i < l; ++i) {
    // right edge mirrored so that alpha_1 is always the most extreme point
    c.points[i] = spec.side == EdgeSide::left ? s * (vals(i) + 2.0 * rootn) : s * (2.0 * rootn - vals(l - 1 - i));
  }
  c.marks = draw_marks(spec.beta, l, mrng);
  return c;
}

PointConfiguration sample_bessel(const ProcessSpec& spec, RandomStream& rng) {
  if (spec.kind != ProcessKind::bessel) throw std::invalid_argument("sample_bessel: spec kind must be bessel");
  spec.validate();
  RandomStream prng = rng.split(tag(StreamTag::points));
  RandomStream mrng = rng.split(tag(StreamTag::marks));
  const int n = spec.n_approx;
  const int T = n + spec.alpha;
  const int M = spec.window;
  RealVector vals;
  if (spec.model == ApproximantModel::dense) {
    EnsembleSpec es;
    es.beta = spec.beta;
    es.N = n;
    es.wishart_T = T;
    RealVector ev;
    if (spec.beta == 1) {
      ev = wishart_spectral<double>(sample_wishart<double>(es, prng).X).values;
    } else {
      ev = wishart_spectral<cplx>(sample_wishart<cplx>(es, prng).X).values;
    }
    vals = ev.head(M);
  } else {
    RealVector d, e;
    laguerre_tridiagonal(spec.beta, n, T, prng, d, e);
    vals = tridiagonal_eigenvalues(d, e, 1, M);
  }
  PointConfiguration c;
  c.kind = ProcessKind::bessel;
  c.beta = spec.beta;
  c.first_label = 1;
  c.points.resize(M);
  for (int i = 0; i < M; ++i) c.points[i] = 4.0 * n * vals(i);
  if (!(c.points.front() > 0.0)) throw ConvergenceError("sample_bessel: nonpositive hard-edge point");
  c.marks = draw_marks(spec.beta, M, mrng);
  return c;
}

PointConfiguration sample_process(const ProcessSpec& spec, RandomStream& rng) {
  switch (spec.kind) {
    case ProcessKind::sine: return sample_sine(spec, rng);
    case ProcessKind::airy: return sample_airy(spec, rng);
    case ProcessKind::bessel: return sample_bessel(spec, rng);
  }
  throw std::invalid_argument("unknown process kind");
}

}  // namespace minorproc
