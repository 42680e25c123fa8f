#include "minorproc/beadchain.hpp"

#include <cmath>
#include <stdexcept>

namespace minorproc {

namespace {

// Block of M over row labels [r0, r1] and column labels [c0, c1]; entries outside M are zero.
Matrix<cplx> label_block(const Matrix<cplx>& M, long row_first, long col_first, long r0, long r1, long c0, long c1) {
  Matrix<cplx> B = Matrix<cplx>::Zero(r1 - r0 + 1, c1 - c0 + 1);
  for (long a = r0; a <= r1; ++a) {
    const long i = a - row_first;
    if (i < 0 || i >= M.rows()) continue;
    for (long b = c0; b <= c1; ++b) {
      const long j = b - col_first;
      if (j >= 0 && j < M.cols()) B(a - r0, b - c0) = M(i, j);
    }
  }
  return B;
}

std::vector<cplx> step_marks(const PointConfiguration& config, int s, int beta, const RandomStream& rng) {
  if (s == 0 && config.marked()) return config.marks;
  RandomStream sub = rng.split({tag(StreamTag::chain), static_cast<std::uint64_t>(s), tag(StreamTag::marks)});
  return draw_marks(beta, config.size(), sub);
}

}  // namespace

long anchor_branch(const PointConfiguration& config, double h) {
  const BulkSecular solver(config, h);
  return solver.branch(-1).z >= 0.0 ? -1 : 0;
}

long recenter_bulk(PointConfiguration& config) {
  long idx = -1;
  for (long i = 0; i < config.size(); ++i) {
    if (config.points[i] >= 0.0) {
      idx = i;
      break;
    }
  }
  if (idx < 0) throw WindowError("recenter: no nonnegative point in the window", 4 * config.size());
  const long anchor = config.first_label + idx;
  const long m = std::min(idx, config.size() - 1 - idx);
  config.points.assign(config.points.begin() + (idx - m), config.points.begin() + (idx + m + 1));
  if (config.marked()) config.marks.assign(config.marks.begin() + (idx - m), config.marks.begin() + (idx + m + 1));
  config.first_label = -m;
  return anchor;
}

std::vector<ChainState> run_bulk_chain(const PointConfiguration& initial, double h, int K, RandomStream& rng,
                                       const ChainOptions& options) {
  if (K < 1) throw std::invalid_argument("run_bulk_chain: K must be >= 1");
  if (initial.kind != ProcessKind::sine) throw std::invalid_argument("run_bulk_chain: initial configuration must be a bulk window");
  initial.validate();
  const long r = options.radius;
  std::vector<ChainState> traj;
  traj.reserve(K + 1);
  ChainState st;
  st.config = initial;
  if (options.track_basis) {
    st.basis = BasisState::identity(initial);
    st.product = label_block(st.basis.coeffs, st.basis.first_label, st.basis.column_first_label, -r, r, -r, r);
  }
  traj.push_back(st);

  for (int s = 0; s < K; ++s) {
    ChainState& cur = traj.back();
    cur.marks = step_marks(cur.config, s, cur.config.beta, rng);
    PointConfiguration next = psi_step(cur.config, cur.marks, h);
    const long shift = recenter_bulk(next);
    next.marks.clear();
    const Matrix<cplx> C = phi_coefficients(next, cur.config, cur.marks);

    ChainState nx;
    nx.step = s + 1;
    nx.shift = shift;
    nx.cumulative_shift = cur.cumulative_shift + shift;
    nx.one_step = label_block(C, next.first_label, cur.config.first_label, -r, r, -r, r);
    if (options.track_basis) {
      nx.basis = advance_basis(cur.basis, C, next.first_label);
      nx.product = label_block(nx.basis.coeffs, nx.basis.first_label, nx.basis.column_first_label, -r, r, -r, r);
    }
    nx.config = std::move(next);
    traj.push_back(std::move(nx));
  }
  return traj;
}

Matrix<cplx> hard_edge_coefficients(const PointConfiguration& new_config, const PointConfiguration& old_config,
                                    const std::vector<cplx>& marks, double min_gap) {
  if (marks.size() != old_config.points.size())
    throw std::invalid_argument("hard_edge_coefficients: marks must match the old configuration");
  const long rows = new_config.size(), cols = old_config.size();
  Matrix<cplx> C(rows, cols);
  for (long i = 0; i < rows; ++i) {
    const double z = new_config.points[i];
    double norm2 = 0.0;
    for (long j = 0; j < cols; ++j) {
      const double xi = old_config.points[j];
      const double d = z - xi;
      if (std::abs(d) < min_gap) throw DegenerateGapError("hard-edge step: degenerate gap");
      C(i, j) = marks[j] * std::sqrt(xi) / d;
      norm2 += std::norm(C(i, j));
    }
    C.row(i) /= std::sqrt(norm2);
  }
  return C;
}

std::vector<ChainState> run_hard_edge_chain(const HardEdgeChainSpec& spec, RandomStream& rng,
                                            const ChainOptions& options) {
  if (spec.K < 1) throw std::invalid_argument("run_hard_edge_chain: K must be >= 1");
  if (!(spec.alpha > spec.K)) throw std::invalid_argument("run_hard_edge_chain: requires alpha > K");
  if (!(spec.keep_fraction > 0.0 && spec.keep_fraction <= 1.0))
    throw std::invalid_argument("run_hard_edge_chain: keep fraction must lie in (0,1]");
  ProcessSpec ps = spec.process;
  ps.kind = ProcessKind::bessel;
  ps.alpha = spec.alpha;
  RandomStream init = rng.split(tag(StreamTag::points));
  const long r = options.radius;

  std::vector<ChainState> traj;
  traj.reserve(spec.K + 1);
  ChainState st;
  st.config = sample_bessel(ps, init);
  if (options.track_basis) {
    st.basis = BasisState::identity(st.config);
    st.product = label_block(st.basis.coeffs, 1, 1, 1, r, 1, r);
  }
  traj.push_back(st);

  for (int s = 0; s < spec.K; ++s) {
    ChainState& cur = traj.back();
    cur.marks = step_marks(cur.config, s, cur.config.beta, rng);
    RandomStream cr = rng.split({tag(StreamTag::chain), static_cast<std::uint64_t>(s), tag(StreamTag::chi)});
    const double chi = cr.chi_squared(spec.alpha - s);
    const long keep = std::max<long>(1, static_cast<long>(std::floor(spec.keep_fraction * cur.config.size())));
    PointConfiguration next = t_step(cur.config, cur.marks, chi, keep);
    next.marks.clear();
    const Matrix<cplx> C = hard_edge_coefficients(next, cur.config, cur.marks);
    ChainState nx;
    nx.step = s + 1;
    nx.one_step = label_block(C, 1, 1, 1, r, 1, r);
    if (options.track_basis) {
      nx.basis = advance_basis(cur.basis, C, 1);
      nx.product = label_block(nx.basis.coeffs, 1, 1, 1, r, 1, r);
    }
    nx.config = std::move(next);
    traj.push_back(std::move(nx));
  }
  return traj;
}

}  // namespace minorproc
