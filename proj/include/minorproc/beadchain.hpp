#pragma once

#include <vector>

#include "minorproc/limits.hpp"
#include "minorproc/random_stream.hpp"
#include "minorproc/secular.hpp"

namespace minorproc {

// Rows and columns of `product` and `one_step` run over offsets -radius..radius about
// the step anchors (bulk) or over labels 1..radius (hard edge).
struct ChainState {
  int step = 0;
  PointConfiguration config;  // points at this step, relabelled about the anchor
  BasisState basis;           // rows: this step's labels, columns: step-0 labels
  long shift = 0;             // anchor shift applied when relabelling (branch label of the new anchor)
  long cumulative_shift = 0;  // total label shift from step 0
  Matrix<cplx> product;       // K-step overlap product restricted to central offsets
  Matrix<cplx> one_step;      // this step's single-step overlap matrix, central block
  std::vector<cplx> marks;    // marks G^{(s)} used to leave this state (filled for s < K)
};

struct ChainOptions {
  int radius = 8;
  bool track_basis = true;
};

// Branch of S(z) = h whose root is the new smallest nonnegative point.
long anchor_branch(const PointConfiguration& config, double h);

// Relabel a configuration labelled by branch about its smallest nonnegative point and
// trim to the largest symmetric window; returns the anchor's old label.
long recenter_bulk(PointConfiguration& config);

std::vector<ChainState> run_bulk_chain(const PointConfiguration& initial, double h, int K, RandomStream& rng,
                                       const ChainOptions& options = {});

struct HardEdgeChainSpec {
  int alpha = 2;
  int K = 1;
  ProcessSpec process = default_process_spec(ProcessKind::bessel);
  double keep_fraction = 0.75;  // roots kept per step (the top of a truncated window is unreliable)
};

// Hard-edge one-step coefficients g_v sqrt(xi_v) / (z_u - xi_v), rows normalized.
Matrix<cplx> hard_edge_coefficients(const PointConfiguration& new_config, const PointConfiguration& old_config,
                                    const std::vector<cplx>& marks, double min_gap = 1e-14);

std::vector<ChainState> run_hard_edge_chain(const HardEdgeChainSpec& spec, RandomStream& rng,
                                            const ChainOptions& options = {});

}  // namespace minorproc
