#include "minorproc/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "minorproc/beadchain.hpp"
#include "minorproc/laws.hpp"
#include "minorproc/spectral.hpp"

namespace minorproc {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

struct KindName {
  ExperimentKind kind;
  const char* name;
};

constexpr KindName kind_names[] = {
    {ExperimentKind::wigner_bulk_mean_profile, "wigner_bulk_mean_profile"},
    {ExperimentKind::wigner_bulk_hist, "wigner_bulk_hist"},
    {ExperimentKind::wigner_edge, "wigner_edge"},
    {ExperimentKind::wishart_soft_edge, "wishart_soft_edge"},
    {ExperimentKind::wishart_hard_edge, "wishart_hard_edge"},
    {ExperimentKind::wishart_bulk, "wishart_bulk"},
    {ExperimentKind::gap_law_wigner, "gap_law_wigner"},
    {ExperimentKind::gap_law_wishart, "gap_law_wishart"},
    {ExperimentKind::band_decay, "band_decay"},
    {ExperimentKind::beadchain_kstep, "beadchain_kstep"},
};

bool is_bulk(ExperimentKind k) {
  return k == ExperimentKind::wigner_bulk_hist || k == ExperimentKind::wigner_bulk_mean_profile ||
         k == ExperimentKind::wishart_bulk || k == ExperimentKind::band_decay || k == ExperimentKind::beadchain_kstep;
}

bool is_gap(ExperimentKind k) { return k == ExperimentKind::gap_law_wigner || k == ExperimentKind::gap_law_wishart; }

void fail(const std::string& field, const std::string& msg) { throw std::invalid_argument(field + ": " + msg); }

// Per-replica output: one value per recorded entry, plus an optional scalar.
struct ReplicaValues {
  std::vector<double> values;
  double extra = nan_v;
  bool failed = false;
};

template <class F>
ReplicaValues guarded(std::size_t width, F&& f) {
  try {
    return f();
  } catch (const ConvergenceError&) {
  } catch (const WindowError&) {
  } catch (const DegenerateGapError&) {
  } catch (const std::domain_error&) {
  } catch (const std::out_of_range&) {
  }
  ReplicaValues r;
  r.values.assign(width, nan_v);
  r.failed = true;
  return r;
}

EnsembleSpec ensemble_of(const ExperimentConfig& c, int n) {
  EnsembleSpec s;
  s.beta = c.beta;
  s.N = n;
  s.entry_law = c.entry_law;
  if (c.is_wishart()) s.wishart_T = c.sample_count();
  return s;
}

// One-step overlap data for the empirical side: Omega rows are after indices (N+1),
// columns are before indices (N) followed by the new direction.
template <class S>
struct EmpiricalStep {
  RealVector before;
  RealVector after;
  Matrix<S> omega;
};

template <class S>
EmpiricalStep<S> empirical_step(const ExperimentConfig& c, const RandomStream& rng) {
  const EnsembleSpec spec = ensemble_of(c, c.N);
  RandomStream mrng = rng.split(tag(StreamTag::matrix));
  RandomStream brng = rng.split(tag(StreamTag::border));
  if (c.is_wishart()) {
    const auto sample = sample_wishart<S>(spec, mrng);
    const Vector<S> g = sample_extension<S>(spec, brng).g;
    const auto before = wishart_spectral<S>(sample.X);
    auto step = one_step_wishart<S>(before, g);
    return {std::move(step.before), std::move(step.after), std::move(step.omega.entries)};
  }
  const Matrix<S> H = sample_wigner<S>(spec, mrng);
  const auto ext = sample_extension<S>(spec, brng);
  const auto before = eig_dense<S>(H);
  auto step = one_step_wigner<S>(before, ext);
  return {std::move(step.before), std::move(step.after), std::move(step.omega.entries)};
}

double bulk_threshold(const ExperimentConfig& c) {
  return c.is_wishart() ? *c.E * c.sample_count() : *c.E * std::sqrt(static_cast<double>(c.N));
}

double bulk_level(const ExperimentConfig& c) {
  if (!c.is_wishart()) return h_wigner(*c.E);
  const double q = c.resolved_q();
  return c.verbatim_wishart_level ? h_overlap_wishart(*c.E, q) : h_overlap_wishart(*c.E, q) / q;
}

// |Omega(a, j)|, or NaN when column j does not exist in this replica (an offset that
// runs past the spectrum end); NaN marks the replica incomplete, not failed.
template <class S>
double abs_entry(const Matrix<S>& omega, long a, long j, long n) {
  if (j < 0 || j >= n) return std::numeric_limits<double>::quiet_NaN();
  return std::abs(omega(a, j));
}

template <class S>
ReplicaValues empirical_bulk(const ExperimentConfig& c, const RandomStream& rng) {
  const auto st = empirical_step<S>(c, rng);
  ReplicaValues out;
  const double thr = bulk_threshold(c);
  if (!c.reference_index && !(st.before.size() > 0 && st.before(st.before.size() - 1) >= thr)) {
    // no eigenvalue reaches the threshold: the anchored row does not exist
    out.values.assign(c.offsets.size(), std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  const long iN = st.before(st.before.size() - 1) >= thr ? anchor_index(st.before, thr) : c.N;
  const long a = c.reference_index ? *c.reference_index - 1 : iN + 1;
  for (long k : c.offsets) out.values.push_back(abs_entry(st.omega, a, a - 1 + k, c.N));
  if (c.is_wishart() && iN + 1 < c.N) {
    const double q = c.resolved_q(), T = c.sample_count();
    out.extra = wishart_bulk_rescale(st.before(iN + 1), *c.E, q, T) - wishart_bulk_rescale(st.before(iN), *c.E, q, T);
  }
  return out;
}

// Edge label i maps to after index N+2-i and before index N+1-i (right edge, 1-based)
// or to i and i (left edge).
template <class S>
ReplicaValues empirical_edge(const ExperimentConfig& c, const RandomStream& rng) {
  const auto st = empirical_step<S>(c, rng);
  const long N = c.N;
  const bool right = c.side == EdgeSide::right;
  auto after_of = [&](int i) { return right ? N + 1 - i : static_cast<long>(i - 1); };
  auto before_of = [&](int j) { return right ? N - j : static_cast<long>(j - 1); };
  const double scale = std::cbrt(static_cast<double>(N));
  ReplicaValues out;
  for (auto [i, j] : c.pairs) {
    const long a = after_of(i);
    const S phase = unphase(st.omega(a, before_of(i)));
    out.values.push_back(scale * std::real(phase * st.omega(a, before_of(j))));
  }
  return out;
}

template <class S>
ReplicaValues empirical_hard_edge(const ExperimentConfig& c, const RandomStream& rng) {
  const auto st = empirical_step<S>(c, rng);
  const long a = *c.reference_index - 1;
  ReplicaValues out;
  for (long k : c.offsets) out.values.push_back(abs_entry(st.omega, a, a - 1 + k, c.N));
  return out;
}

template <class S>
ReplicaValues empirical_chain(const ExperimentConfig& c, const RandomStream& rng) {
  const EnsembleSpec big = ensemble_of(c, c.N + c.steps);
  RandomStream mrng = rng.split(tag(StreamTag::matrix));
  const Matrix<S> H = sample_wigner<S>(big, mrng);
  const auto after = eig_dense<S>(H);
  const auto before = eig_dense<S>(Matrix<S>(H.topLeftCorner(c.N, c.N)));
  const double thr = bulk_threshold(c);
  ReplicaValues out;
  if (!(before.values(c.N - 1) >= thr && after.values(after.size() - 1) >= thr)) {
    // no eigenvalue reaches the threshold: the anchored row does not exist
    out.values.assign(c.offsets.size(), std::numeric_limits<double>::quiet_NaN());
    return out;
  }
  const long iN = anchor_index(before.values, thr);
  const long aK = anchor_index(after.values, thr);
  for (long k : c.offsets) {
    const long j = iN + k;
    out.values.push_back(j < 0 || j >= c.N ? std::numeric_limits<double>::quiet_NaN()
                                           : std::abs(after.vectors.col(aK).head(c.N).dot(before.vectors.col(j))));
  }
  return out;
}

template <class S>
ReplicaValues empirical_gap(const ExperimentConfig& c, const RandomStream& rng) {
  const EnsembleSpec spec = ensemble_of(c, c.N);
  RandomStream mrng = rng.split(tag(StreamTag::matrix));
  RandomStream brng = rng.split(tag(StreamTag::border));
  RealVector lo, hi;
  double scale = 0.0;
  if (c.is_wishart()) {
    const auto sample = sample_wishart<S>(spec, mrng);
    const Vector<S> g = sample_extension<S>(spec, brng).g;
    const Matrix<S> Xp = extend_wishart(sample.X, g);
    lo = eigvals_dense<S>(sample.W);
    hi = eigvals_dense<S>(Matrix<S>(Xp.adjoint() * Xp));
    scale = wishart_gap_scale(c.resolved_q(), c.side);
  } else {
    const Matrix<S> H = sample_wigner<S>(spec, mrng);
    const auto ext = sample_extension<S>(spec, brng);
    lo = eigvals_dense<S>(H);
    hi = eigvals_dense<S>(extend_wigner(H, ext));
    scale = std::sqrt(static_cast<double>(c.N));
  }
  ReplicaValues out;
  const long N = c.N;
  if (c.side == EdgeSide::right) {
    out.values.push_back(scale * (hi(N) - lo(N - 1)));
  } else if (c.is_wishart()) {
    out.values.push_back(scale * (hi(0) - lo(0)));
  } else {
    out.values.push_back(scale * (lo(0) - hi(0)));
  }
  return out;
}

// Fraction 1 - sum_{j<N, |i-j|<k} |Omega_ij|^2 averaged over the central half of the rows.
template <class S>
ReplicaValues empirical_band(const ExperimentConfig& c, const RandomStream& rng) {
  const auto st = empirical_step<S>(c, rng);
  const long N = c.N;
  const long r0 = N / 4, r1 = 3 * N / 4;
  ReplicaValues out;
  for (long k : c.offsets) {
    double acc = 0.0;
    for (long i = r0; i <= r1; ++i) {
      double inside = 0.0;
      for (long j = std::max(0L, i - k + 1); j <= std::min(N - 1, i + k - 1); ++j) inside += abs2(st.omega(i, j));
      acc += 1.0 - inside;
    }
    out.values.push_back(acc / static_cast<double>(r1 - r0 + 1));
  }
  return out;
}

ReplicaValues theoretical_bulk(const ExperimentConfig& c, const RandomStream& rng) {
  RandomStream prng = rng.split(tag(StreamTag::points));
  const PointConfiguration mu = sample_sine(c.process_spec(), prng);
  // the typical branch (mu_0, mu_1); u = -1 would be the size-biased interval covering the origin
  const OverlapRow row = bulk_overlap_row(mu, bulk_level(c), 0);
  ReplicaValues out;
  for (long k : c.offsets) out.values.push_back(std::abs(row.at(k)));
  return out;
}

ReplicaValues theoretical_edge(const ExperimentConfig& c, const RandomStream& rng) {
  RandomStream prng = rng.split(tag(StreamTag::points));
  const PointConfiguration airy = sample_airy(c.process_spec(), prng);
  const double cq = c.is_wishart() ? soft_edge_constant(c.resolved_q(), c.side) : 1.0;
  const Matrix<cplx> A = edge_overlap_law(airy);
  ReplicaValues out;
  for (auto [i, j] : c.pairs) out.values.push_back(cq * A(i - 1, j - 1).real());
  return out;
}

ReplicaValues theoretical_hard_edge(const ExperimentConfig& c, const RandomStream& rng) {
  RandomStream prng = rng.split(tag(StreamTag::points));
  RandomStream crng = rng.split(tag(StreamTag::chi));
  const PointConfiguration xi = sample_bessel(c.process_spec(), prng);
  const double chi = crng.chi_squared(c.alpha);
  const long u = *c.reference_index;
  const OverlapRow row = hard_edge_overlap_law(xi, chi, u);
  ReplicaValues out;
  for (long k : c.offsets) out.values.push_back(std::abs(row.at(u - 1 + k)));
  return out;
}

ReplicaValues theoretical_chain(const ExperimentConfig& c, const RandomStream& rng) {
  RandomStream prng = rng.split(tag(StreamTag::points));
  RandomStream crng = rng.split(tag(StreamTag::chain));
  const PointConfiguration mu = sample_sine(c.process_spec(), prng);
  ChainOptions opts;
  long radius = 0;
  for (long k : c.offsets) radius = std::max(radius, std::abs(k));
  opts.radius = static_cast<int>(radius);
  const auto traj = run_bulk_chain(mu, bulk_level(c), c.steps, crng, opts);
  const Matrix<cplx>& P = traj.back().product;
  ReplicaValues out;
  for (long k : c.offsets) out.values.push_back(std::abs(P(radius, radius + k)));
  return out;
}

template <class S>
ReplicaValues empirical_dispatch(const ExperimentConfig& c, const RandomStream& rng) {
  switch (c.kind) {
    case ExperimentKind::wigner_bulk_mean_profile:
    case ExperimentKind::wigner_bulk_hist:
    case ExperimentKind::wishart_bulk:
      return empirical_bulk<S>(c, rng);
    case ExperimentKind::wigner_edge:
    case ExperimentKind::wishart_soft_edge:
      return empirical_edge<S>(c, rng);
    case ExperimentKind::wishart_hard_edge:
      return empirical_hard_edge<S>(c, rng);
    case ExperimentKind::gap_law_wigner:
    case ExperimentKind::gap_law_wishart:
      return empirical_gap<S>(c, rng);
    case ExperimentKind::band_decay:
      return empirical_band<S>(c, rng);
    case ExperimentKind::beadchain_kstep:
      return empirical_chain<S>(c, rng);
  }
  throw std::logic_error("unknown experiment kind");
}

ReplicaValues theoretical_dispatch(const ExperimentConfig& c, const RandomStream& rng) {
  switch (c.kind) {
    case ExperimentKind::wigner_bulk_mean_profile:
    case ExperimentKind::wigner_bulk_hist:
    case ExperimentKind::wishart_bulk:
      return theoretical_bulk(c, rng);
    case ExperimentKind::wigner_edge:
    case ExperimentKind::wishart_soft_edge:
      return theoretical_edge(c, rng);
    case ExperimentKind::wishart_hard_edge:
      return theoretical_hard_edge(c, rng);
    case ExperimentKind::beadchain_kstep:
      return theoretical_chain(c, rng);
    default:
      return {};
  }
}

bool has_sampled_theory(ExperimentKind k) { return !is_gap(k) && k != ExperimentKind::band_decay; }

std::size_t entry_count(const ExperimentConfig& c) { return c.uses_pairs() ? c.pairs.size() : is_gap(c.kind) ? 1 : c.offsets.size(); }

struct Collected {
  std::vector<std::vector<double>> empirical;  // [entry][replica], NaN on failure
  std::vector<std::vector<double>> theoretical;
  std::vector<double> extra;
  long incomplete_replicas = 0;  // an entry lies outside the spectrum; excluded, not failed
  long empirical_failures = 0;
  long theoretical_failures = 0;
  long failed_replicas = 0;
};

Collected collect(const ExperimentConfig& c, const RunOptions& options) {
  const std::size_t width = entry_count(c);
  const long R = c.replicas;
  const bool theory = has_sampled_theory(c.kind);
  std::vector<ReplicaValues> emp(R), theo(theory ? R : 0);
  const RandomStream root(c.seed);
  parallel_for(
      R, resolve_workers(options.workers),
      [&](long r) {
        const RandomStream er = root.split({tag(StreamTag::empirical), static_cast<std::uint64_t>(r)});
        emp[r] = guarded(width, [&] {
          return c.beta == 1 ? empirical_dispatch<double>(c, er) : empirical_dispatch<cplx>(c, er);
        });
        if (theory) {
          const RandomStream tr = root.split({tag(StreamTag::theoretical), static_cast<std::uint64_t>(r)});
          theo[r] = guarded(width, [&] { return theoretical_dispatch(c, tr); });
        }
      },
      options.progress);

  Collected out;
  out.empirical.assign(width, {});
  out.theoretical.assign(width, {});
  for (long r = 0; r < R; ++r) {
    const bool ef = emp[r].failed, tf = theory && theo[r].failed;
    out.empirical_failures += ef;
    out.theoretical_failures += tf;
    out.failed_replicas += (ef || tf);
    // every entry of a replica must exist so that all entries share one replica set
    const bool incomplete =
        !ef && std::any_of(emp[r].values.begin(), emp[r].values.end(), [](double v) { return std::isnan(v); });
    out.incomplete_replicas += incomplete;
    if (!ef && !incomplete) {
      for (std::size_t e = 0; e < width; ++e) out.empirical[e].push_back(emp[r].values[e]);
      if (!std::isnan(emp[r].extra)) out.extra.push_back(emp[r].extra);
    }
    if (theory && !tf)
      for (std::size_t e = 0; e < width; ++e) out.theoretical[e].push_back(theo[r].values[e]);
  }
  return out;
}

std::string entry_label(const ExperimentConfig& c, std::size_t e) {
  if (c.uses_pairs()) return std::to_string(c.pairs[e].first) + ":" + std::to_string(c.pairs[e].second);
  if (is_gap(c.kind)) return "gap";
  return std::to_string(c.offsets[e]);
}

ExperimentResult start_result(const ExperimentConfig& config) {
  ExperimentResult res;
  res.config = config;
  res.config.fill_defaults();
  res.config.validate();
  res.replicas = res.config.replicas;
  return res;
}

void finish_failures(ExperimentResult& res, const Collected& col) {
  res.empirical_failures = col.empirical_failures;
  res.theoretical_failures = col.theoretical_failures;
  res.failed_replicas = col.failed_replicas;
  res.incomplete_replicas = col.incomplete_replicas;
}

double quantile_sorted(const std::vector<double>& s, double p) {
  const double pos = p * static_cast<double>(s.size() - 1);
  const auto i = static_cast<std::size_t>(std::floor(pos));
  if (i + 1 >= s.size()) return s.back();
  const double f = pos - static_cast<double>(i);
  return s[i] + f * (s[i + 1] - s[i]);
}

double elapsed_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& kn : kind_names)
    if (kn.kind == kind) return kn.name;
  throw std::invalid_argument("unknown experiment kind");
}

ExperimentKind parse_experiment_kind(const std::string& name) {
  std::string s = name;
  std::replace(s.begin(), s.end(), '-', '_');
  for (const auto& kn : kind_names)
    if (s == kn.name) return kn.kind;
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

const std::vector<ExperimentKind>& all_experiment_kinds() {
  static const std::vector<ExperimentKind> kinds = [] {
    std::vector<ExperimentKind> v;
    for (const auto& kn : kind_names) v.push_back(kn.kind);
    return v;
  }();
  return kinds;
}

bool ExperimentConfig::is_wishart() const {
  return kind == ExperimentKind::wishart_soft_edge || kind == ExperimentKind::wishart_hard_edge ||
         kind == ExperimentKind::wishart_bulk || kind == ExperimentKind::gap_law_wishart;
}

bool ExperimentConfig::uses_pairs() const {
  return kind == ExperimentKind::wigner_edge || kind == ExperimentKind::wishart_soft_edge;
}

int ExperimentConfig::sample_count() const {
  if (T) return *T;
  if (kind == ExperimentKind::wishart_hard_edge) return N + alpha;
  if (q && *q > 0.0) return static_cast<int>(std::lround(N / *q));
  fail("T", "Wishart experiments need q or T");
  return 0;
}

double ExperimentConfig::resolved_q() const {
  return static_cast<double>(N) / static_cast<double>(sample_count());
}

ProcessSpec ExperimentConfig::process_spec() const {
  ProcessKind pk = ProcessKind::sine;
  if (uses_pairs()) pk = ProcessKind::airy;
  if (kind == ExperimentKind::wishart_hard_edge) pk = ProcessKind::bessel;
  ProcessSpec p = default_process_spec(pk);
  p.beta = beta;
  p.alpha = pk == ProcessKind::bessel ? alpha : 0;
  p.side = side;
  p.energy = 0.0;  // the level h carries the energy dependence
  // a fixed after index sees a typical gap; the energy anchor would size-bias it
  if (pk == ProcessKind::sine && reference_index) p.anchor = SineAnchor::index;
  if (window) p.window = *window;
  if (n_approx) p.n_approx = *n_approx;
  return p;
}

void ExperimentConfig::fill_defaults() {
  if (uses_pairs()) {
    if (pairs.empty()) pairs = {{1, 2}, {2, 3}};
  } else if (offsets.empty()) {
    switch (kind) {
      case ExperimentKind::wigner_bulk_mean_profile:
        for (long k = -8; k <= 8; ++k) offsets.push_back(k);
        break;
      case ExperimentKind::beadchain_kstep:
        offsets = {-1, 0, 1};
        break;
      case ExperimentKind::band_decay:
        for (long k = 4; k <= N / 4; ++k) offsets.push_back(k);
        break;
      case ExperimentKind::gap_law_wigner:
      case ExperimentKind::gap_law_wishart:
        break;
      default:
        offsets = {-1, 0, 1, 2};
    }
  }
  if (kind == ExperimentKind::wishart_hard_edge && !reference_index) reference_index = 3;
  if (is_wishart() && !T && (q || kind == ExperimentKind::wishart_hard_edge)) T = sample_count();
}

void ExperimentConfig::validate() const {
  if (replicas < 1) fail("replicas", "must be >= 1");
  if (beta != 1 && beta != 2) fail("beta", "must be 1 or 2");
  if (N < 2) fail("N", "must be >= 2");
  if (max_bins < 1) fail("max_bins", "must be >= 1");
  if (steps < 1) fail("steps", "must be >= 1");
  if (is_bulk(kind) && !is_wishart()) {
    if (!E) fail("E", "required for bulk experiments");
    if (!(std::abs(*E) < 2.0)) throw std::invalid_argument("E must lie in (-2,2)");
  }
  if (is_wishart()) {
    if (!T && !q && kind != ExperimentKind::wishart_hard_edge) fail("q", "Wishart experiments need q or T");
    const int t = sample_count();
    if (t < N) fail("T", "must be >= N");
    if (q && T && std::abs(static_cast<double>(N) / *T - *q) > 0.5 / *T) fail("q", "inconsistent with N / T");
    if (kind == ExperimentKind::wishart_hard_edge) {
      if (alpha < 1) fail("alpha", "must be >= 1");
      if (t != N + alpha) fail("T", "hard edge needs T = N + alpha");
      if (beta != 1) fail("beta", "hard-edge experiments support beta = 1 only");
    }
    if (kind == ExperimentKind::wishart_bulk) {
      if (!E) fail("E", "required for bulk experiments");
      SpectralConstants sc{*E, resolved_q(), beta};
      sc.validate_wishart_bulk();
    }
    if ((kind == ExperimentKind::wishart_soft_edge || kind == ExperimentKind::gap_law_wishart) &&
        side == EdgeSide::left && !(N < t))
      fail("side", "left soft edge requires q < 1");
  }
  const ProcessSpec ps = process_spec();
  if (has_sampled_theory(kind)) ps.validate();
  if (uses_pairs()) {
    if (pairs.empty()) fail("pairs", "at least one pair required");
    for (auto [i, j] : pairs) {
      if (i < 1 || j < 1 || i > ps.window || j > ps.window || i > N || j > N)
        fail("pairs", "edge labels must lie in 1..min(window, N)");
      if (i == j) fail("pairs", "diagonal entries are not recorded");
    }
    return;
  }
  if (is_gap(kind)) return;
  if (offsets.empty()) fail("offsets", "at least one offset required");
  for (long k : offsets) {
    switch (kind) {
      case ExperimentKind::band_decay:
        if (k < 1 || k > N) fail("offsets", "band widths must lie in 1..N");
        break;
      case ExperimentKind::wishart_hard_edge: {
        const long v = *reference_index - 1 + k;
        if (v < 1 || v > std::min<long>(ps.window, N)) fail("offsets", "label a-1+k must lie in 1..min(window, N)");
        break;
      }
      case ExperimentKind::beadchain_kstep:
        if (std::abs(k) > ps.window / 8) fail("offsets", "|k| must not exceed window/8");
        break;
      default:
        if (std::abs(k) >= ps.window || std::abs(k) >= N / 2) fail("offsets", "|k| must be below the window and N/2");
    }
  }
  if (reference_index && (*reference_index < 1 || *reference_index > N + 1))
    fail("reference_index", "must lie in 1..N+1");
}

double ExperimentResult::failure_rate() const {
  return replicas > 0 ? static_cast<double>(failed_replicas) / static_cast<double>(replicas) : 0.0;
}

bool ExperimentResult::within_failure_budget() const { return failed_replicas * 1000 <= replicas; }

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("MINORPROC_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
    throw std::invalid_argument("MINORPROC_WORKERS must be a positive integer");
  }
  return 1;
}

void parallel_for(long count, int workers, const std::function<void(long)>& body,
                  const std::function<void(long, long)>& progress) {
  workers = std::max(1, static_cast<int>(std::min<long>(workers, std::max(1L, count))));
  std::atomic<long> next{0}, done{0};
  std::exception_ptr error;
  std::mutex mu;
  const long report_every = std::max(1L, count / 100);
  auto worker = [&] {
    for (;;) {
      const long r = next.fetch_add(1);
      if (r >= count) return;
      try {
        body(r);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
        next = count;
        return;
      }
      const long d = done.fetch_add(1) + 1;
      if (progress && (d % report_every == 0 || d == count)) {
        std::lock_guard<std::mutex> lock(mu);
        progress(d, count);
      }
    }
  };
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

long anchor_index(const RealVector& eigenvalues, double threshold) {
  const double* b = eigenvalues.data();
  const double* e = b + eigenvalues.size();
  const double* it = std::lower_bound(b, e, threshold);
  if (it == e) throw std::domain_error("anchor_index: threshold above the largest eigenvalue");
  return static_cast<long>(it - b);
}

double ks_statistic(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("ks_statistic: samples must be nonempty");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double d = 0.0;
  while (i < a.size() && j < b.size()) {
    const double x = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == x) ++i;
    while (j < b.size() && b[j] == x) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

double ks_statistic(std::vector<double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw std::invalid_argument("ks_statistic: samples must be nonempty");
  std::sort(a.begin(), a.end());
  const double n = static_cast<double>(a.size());
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double f = cdf(a[i]);
    d = std::max({d, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return d;
}

std::vector<double> shared_bin_edges(const std::vector<double>& a, const std::vector<double>& b, int max_bins) {
  std::vector<double> pooled;
  pooled.reserve(a.size() + b.size());
  pooled.insert(pooled.end(), a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  if (pooled.empty()) return {};
  std::sort(pooled.begin(), pooled.end());
  double lo = quantile_sorted(pooled, 0.005), hi = quantile_sorted(pooled, 0.995);
  if (!(hi > lo)) {
    lo = pooled.front() - 0.5;
    hi = pooled.back() + 0.5;
  }
  const double iqr = quantile_sorted(pooled, 0.75) - quantile_sorted(pooled, 0.25);
  const double n = static_cast<double>(pooled.size());
  long bins = 1;
  if (iqr > 0.0) {
    const double width = 2.0 * iqr / std::cbrt(n);
    bins = static_cast<long>(std::ceil((hi - lo) / width));
  } else {
    bins = static_cast<long>(std::ceil(std::sqrt(n)));
  }
  bins = std::clamp<long>(bins, 1, max_bins);
  std::vector<double> edges(bins + 1);
  for (long i = 0; i <= bins; ++i) edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins);
  edges.back() = hi;
  return edges;
}

std::size_t fill_density(const std::vector<double>& samples, const std::vector<double>& edges, std::vector<double>& density) {
  const std::size_t bins = edges.size() < 2 ? 0 : edges.size() - 1;
  density.assign(bins, 0.0);
  if (bins == 0) return samples.size();
  std::vector<std::size_t> counts(bins, 0);
  std::size_t inside = 0;
  for (double x : samples) {
    if (!(x >= edges.front() && x <= edges.back())) continue;
    auto it = std::upper_bound(edges.begin(), edges.end(), x);
    std::size_t b = static_cast<std::size_t>(it - edges.begin());
    b = b == 0 ? 0 : std::min(b - 1, bins - 1);
    ++counts[b];
    ++inside;
  }
  if (inside == 0) return samples.size();
  for (std::size_t b = 0; b < bins; ++b)
    density[b] = static_cast<double>(counts[b]) / (static_cast<double>(inside) * (edges[b + 1] - edges[b]));
  return samples.size() - inside;
}

Moments moments(const std::vector<double>& x) {
  Moments m;
  m.count = x.size();
  if (x.empty()) return m;
  // Neumaier-compensated sums, accumulated in replica order
  double s = 0.0, cs = 0.0;
  for (double v : x) {
    const double t = s + v;
    cs += std::abs(s) >= std::abs(v) ? (s - t) + v : (v - t) + s;
    s = t;
  }
  m.mean = (s + cs) / static_cast<double>(x.size());
  if (x.size() > 1) {
    double ss = 0.0, css = 0.0;
    for (double v : x) {
      const double d = (v - m.mean) * (v - m.mean);
      const double t = ss + d;
      css += ss >= d ? (ss - t) + d : (d - t) + ss;
      ss = t;
    }
    m.variance = (ss + css) / static_cast<double>(x.size() - 1);
  }
  return m;
}

PowerFit fit_power_law(const std::vector<double>& k, const std::vector<double>& y) {
  if (k.size() != y.size()) throw std::invalid_argument("fit_power_law: size mismatch");
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < k.size(); ++i) {
    if (!(k[i] > 0.0 && y[i] > 0.0)) continue;
    const double lx = std::log(k[i]), ly = std::log(y[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) throw std::invalid_argument("fit_power_law: need two positive points");
  const double dn = static_cast<double>(n);
  const double den = dn * sxx - sx * sx;
  if (den == 0.0) throw std::invalid_argument("fit_power_law: degenerate abscissae");
  PowerFit f;
  f.slope = (dn * sxy - sx * sy) / den;
  f.constant = std::exp((sy - f.slope * sx) / dn);
  return f;
}

ExperimentResult gap_experiment(const ExperimentConfig& config, const RunOptions& options) {
  if (!is_gap(config.kind)) throw std::invalid_argument("gap_experiment: needs a gap_law kind");
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult res = start_result(config);
  const ExperimentConfig& c = res.config;
  const Collected col = collect(c, options);
  finish_failures(res, col);
  const int beta = c.beta;
  const auto cdf = [beta](double x) { return gap_cdf(x, beta); };
  const GapLawConstants law = gap_law_constants(beta);

  OffsetResult e;
  e.label = "gap";
  const std::vector<double>& x = col.empirical[0];
  e.empirical = moments(x);
  e.theoretical.count = 0;
  e.theoretical.mean = law.mean;
  e.theoretical.variance = law.variance;
  if (!x.empty()) {
    e.ks = ks_statistic(x, cdf);
    Histogram& h = e.histogram;
    h.edges = shared_bin_edges(x, {}, c.max_bins);
    e.clipped_empirical = fill_density(x, h.edges, h.empirical);
    // exact bin masses of the Gamma law, renormalized to the clipped range
    const double mass = cdf(h.edges.back()) - cdf(h.edges.front());
    h.theoretical.resize(h.bins());
    for (std::size_t b = 0; b < h.bins(); ++b)
      h.theoretical[b] = (cdf(h.edges[b + 1]) - cdf(h.edges[b])) / (mass * (h.edges[b + 1] - h.edges[b]));
    e.top_bin_mass = h.empirical.empty() ? 0.0 : h.empirical.back() * (h.edges.back() - h.edges[h.bins() - 1]);
  } else {
    e.ks = 1.0;
  }
  res.entries.push_back(std::move(e));
  res.runtime_seconds = elapsed_since(t0);
  return res;
}

ExperimentResult band_decay_experiment(const ExperimentConfig& config, const RunOptions& options) {
  if (config.kind != ExperimentKind::band_decay) throw std::invalid_argument("band_decay_experiment: needs band_decay");
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult res = start_result(config);
  const ExperimentConfig& c = res.config;
  const Collected col = collect(c, options);
  finish_failures(res, col);

  std::vector<double> ks, tails;
  for (std::size_t e = 0; e < c.offsets.size(); ++e) {
    ks.push_back(static_cast<double>(c.offsets[e]));
    tails.push_back(moments(col.empirical[e]).mean);
  }
  std::vector<double> fk, ft;
  for (std::size_t e = 0; e < ks.size(); ++e) {
    if (ks[e] >= 4.0 && ks[e] <= c.N / 4.0) {
      fk.push_back(ks[e]);
      ft.push_back(tails[e]);
    }
  }
  // no fit on grids with fewer than two widths in [4, N/4]
  PowerFit fit{nan_v, nan_v};
  if (fk.size() >= 2) {
    fit = fit_power_law(fk, ft);
    res.summary["slope"] = fit.slope;
    res.summary["constant"] = fit.constant;
  }
  for (std::size_t e = 0; e < c.offsets.size(); ++e) {
    OffsetResult o;
    o.label = entry_label(c, e);
    o.offset = c.offsets[e];
    o.empirical = moments(col.empirical[e]);
    o.theoretical.mean = fit.constant * std::pow(ks[e], fit.slope);
    o.ks = nan_v;
    // a single degenerate bin at k holding the mean tail mass and the fitted power law
    o.histogram.edges = {ks[e], ks[e]};
    o.histogram.empirical = {o.empirical.mean};
    o.histogram.theoretical = {o.theoretical.mean};
    res.entries.push_back(std::move(o));
  }
  res.runtime_seconds = elapsed_since(t0);
  return res;
}

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options) {
  if (is_gap(config.kind)) return gap_experiment(config, options);
  if (config.kind == ExperimentKind::band_decay) return band_decay_experiment(config, options);
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult res = start_result(config);
  const ExperimentConfig& c = res.config;
  const Collected col = collect(c, options);
  finish_failures(res, col);

  const std::size_t width = entry_count(c);
  for (std::size_t e = 0; e < width; ++e) {
    OffsetResult o;
    o.label = entry_label(c, e);
    o.offset = c.uses_pairs() ? static_cast<long>(e) : c.offsets[e];
    const auto& a = col.empirical[e];
    const auto& b = col.theoretical[e];
    o.empirical = moments(a);
    o.theoretical = moments(b);
    o.ks = (a.empty() || b.empty()) ? 1.0 : ks_statistic(a, b);
    Histogram& h = o.histogram;
    h.edges = shared_bin_edges(a, b, c.max_bins);
    o.clipped_empirical = fill_density(a, h.edges, h.empirical);
    o.clipped_theoretical = fill_density(b, h.edges, h.theoretical);
    if (h.bins() > 0) o.top_bin_mass = h.empirical.back() * (h.edges.back() - h.edges[h.bins() - 1]);
    res.entries.push_back(std::move(o));
  }
  if (c.kind == ExperimentKind::wishart_bulk && !col.extra.empty()) {
    res.summary["mean_rescaled_spacing"] = moments(col.extra).mean;
    res.summary["expected_rescaled_spacing"] = 2.0 * std::acos(-1.0) / c.resolved_q();
  }
  res.runtime_seconds = elapsed_since(t0);
  return res;
}

}  // namespace minorproc
