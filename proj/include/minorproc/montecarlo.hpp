#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "minorproc/ensembles.hpp"
#include "minorproc/limits.hpp"

namespace minorproc {

enum class ExperimentKind {
  wigner_bulk_mean_profile,
  wigner_bulk_hist,
  wigner_edge,
  wishart_soft_edge,
  wishart_hard_edge,
  wishart_bulk,
  gap_law_wigner,
  gap_law_wishart,
  band_decay,
  beadchain_kstep,
};

std::string to_string(ExperimentKind kind);
// Accepts both underscores and dashes ("wigner-bulk-hist").
ExperimentKind parse_experiment_kind(const std::string& name);
const std::vector<ExperimentKind>& all_experiment_kinds();

// Offsets index the overlap entries an experiment records:
//   bulk kinds:   k in Omega_{a, a-1+k}, a the after index (reference_index, default i_N + 1)
//   hard edge:    k in Omega_{a, a-1+k}, a = reference_index (default 3)
//   beadchain:    k in Omega^{(K)}_{anchor_K, i_N + k}
//   band_decay:   the k grid of the tail-mass fit (default 4..N/4)
// Edge kinds use `pairs` (edge labels, 1 = most extreme) instead of offsets.
struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::wigner_bulk_hist;
  int beta = 1;
  EntryLaw entry_law = EntryLaw::gaussian;
  int N = 100;
  std::optional<int> T;         // Wishart sample count; default round(N / q) or N + alpha
  std::optional<double> E;      // bulk kinds (semicircle units for Wigner, MP units for Wishart)
  std::optional<double> q;      // Wishart kinds
  int alpha = 1;                // hard edge: T - N
  EdgeSide side = EdgeSide::right;
  std::vector<long> offsets;
  std::vector<std::pair<int, int>> pairs;
  std::optional<int> reference_index;  // 1-based after index
  int steps = 1;                       // beadchain_kstep: K
  long replicas = 1000;
  std::uint64_t seed = 0;
  int max_bins = 400;
  std::optional<int> window;    // limit-process window (module default per process)
  std::optional<int> n_approx;  // limit-process approximant size
  // wishart_bulk: use the overlap level exactly as stated, -(E+q-1)/(2E) / (2 pi rho_MP(E)).
  // That level belongs to points of mean spacing 2 pi / q; the default divides it by q
  // so it matches the unit-density sine window of the theoretical side.
  bool verbatim_wishart_level = false;

  // Fills kind-specific defaults (offsets, pairs, T, reference index).
  void fill_defaults();
  // Throws std::invalid_argument naming the offending field.
  void validate() const;

  [[nodiscard]] int sample_count() const;  // resolved T for Wishart kinds
  [[nodiscard]] double resolved_q() const;
  [[nodiscard]] ProcessSpec process_spec() const;  // limit process of the theoretical side
  [[nodiscard]] bool is_wishart() const;
  [[nodiscard]] bool uses_pairs() const;
};

struct Histogram {
  std::vector<double> edges;  // bins [edges[b], edges[b+1]), last bin closed
  std::vector<double> empirical;
  std::vector<double> theoretical;
  [[nodiscard]] std::size_t bins() const { return edges.empty() ? 0 : edges.size() - 1; }
};

struct Moments {
  std::size_t count = 0;
  double mean = 0.0;
  double variance = 0.0;  // unbiased
};

struct OffsetResult {
  std::string label;  // "k" for offsets, "i:j" for pairs
  long offset = 0;
  Histogram histogram;
  double ks = 0.0;
  Moments empirical;
  Moments theoretical;
  double top_bin_mass = 0.0;       // empirical mass in the last bin
  std::size_t clipped_empirical = 0;
  std::size_t clipped_theoretical = 0;
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<OffsetResult> entries;
  // Scalar summaries: fit slope/constant (band_decay), mean rescaled spacing (wishart_bulk), ...
  std::map<std::string, double> summary;
  long replicas = 0;
  long empirical_failures = 0;
  long theoretical_failures = 0;
  long failed_replicas = 0;  // replicas where either side failed
  // replicas where a requested entry lies outside the spectrum (i_N + k > N near an edge,
  // or no eigenvalue above the threshold); excluded from every entry, not failures
  long incomplete_replicas = 0;
  double runtime_seconds = 0.0;  // not part of the deterministic output

  [[nodiscard]] double failure_rate() const;
  [[nodiscard]] bool within_failure_budget() const;  // failure rate <= 0.1%
};

struct RunOptions {
  int workers = 0;  // 0: MINORPROC_WORKERS, else 1
  std::function<void(long done, long total)> progress;
};

// Worker count from the option, then the MINORPROC_WORKERS environment variable.
int resolve_workers(int requested);

// Calls body(r) for r in [0, count) on `workers` threads. Callers store results by r,
// so output never depends on scheduling.
void parallel_for(long count, int workers, const std::function<void(long)>& body,
                  const std::function<void(long, long)>& progress = {});

ExperimentResult run_experiment(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentResult gap_experiment(const ExperimentConfig& config, const RunOptions& options = {});
ExperimentResult band_decay_experiment(const ExperimentConfig& config, const RunOptions& options = {});

// Smallest index with eigenvalues[index] >= threshold (ascending input).
long anchor_index(const RealVector& eigenvalues, double threshold);

// sup |F_a - F_b| over the two empirical CDFs, exact.
double ks_statistic(std::vector<double> a, std::vector<double> b);
double ks_statistic(std::vector<double> a, const std::function<double(double)>& cdf);

// Freedman-Diaconis binning of the pooled samples over their [0.5%, 99.5%] quantile range.
std::vector<double> shared_bin_edges(const std::vector<double>& a, const std::vector<double>& b, int max_bins);
// Unit-area density of the samples falling inside the edges; returns the number clipped.
std::size_t fill_density(const std::vector<double>& samples, const std::vector<double>& edges, std::vector<double>& density);

Moments moments(const std::vector<double>& x);

// Least-squares fit log y = log C + slope * log k.
struct PowerFit {
  double slope = 0.0;
  double constant = 0.0;
};
PowerFit fit_power_law(const std::vector<double>& k, const std::vector<double>& y);

}  // namespace minorproc
