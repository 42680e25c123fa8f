#include "doctest.h"
#include "helpers.hpp"
#include "minorproc/beadchain.hpp"
#include "minorproc/laws.hpp"

using namespace minorproc;

namespace {

ProcessSpec small_sine() {
  ProcessSpec spec = default_process_spec(ProcessKind::sine);
  spec.n_approx = 500;
  spec.window = 64;
  return spec;
}

PointConfiguration sine_window(std::uint64_t seed, const ProcessSpec& spec = small_sine()) {
  RandomStream rng(seed);
  return sample_sine(spec, rng);
}

}  // namespace

TEST_CASE("recentering picks the smallest nonnegative point") {
  PointConfiguration c;
  c.kind = ProcessKind::sine;
  c.points = {-5, -3, -1, 0.5, 2, 4, 6, 8};
  c.first_label = 10;
  const long a = recenter_bulk(c);
  CHECK(a == 13);
  CHECK(c.first_label == -3);
  CHECK(c.size() == 7);
  CHECK(c.point(0) == 0.5);
  CHECK(c.point(-3) == -5);
}

TEST_CASE("one chain step is a single psi/phi step") {
  const PointConfiguration init = sine_window(1);
  RandomStream rng(2);
  const double h = -0.1;
  const auto traj = run_bulk_chain(init, h, 1, rng);
  REQUIRE(traj.size() == 2);
  PointConfiguration next = psi_step(init, init.marks, h);
  const long shift = recenter_bulk(next);
  CHECK(traj[1].shift == shift);
  CHECK(traj[1].config.points == next.points);
  const Matrix<cplx> C = phi_coefficients(next, init, init.marks);
  CHECK(traj[1].one_step(8, 8) == C(next.index_of(0), init.index_of(0)));
  CHECK(std::abs(traj[1].product(8, 9) - C(next.index_of(0), init.index_of(1))) < 1e-15);
  CHECK(traj[1].basis.max_row_norm_error() < 1e-10);

  // the chain's one-step row equals the bulk law on the anchor branch
  const long u = anchor_branch(init, h);
  CHECK(u == shift);
  const OverlapRow row = bulk_overlap_row(init, h, u);
  for (long v = -8; v <= 8; ++v) CHECK(std::abs(traj[1].one_step(8, v + 8) - row.at(v)) < 1e-10);
}

TEST_CASE("chain interlacing, unit rows and contraction of the product") {
  double mean_norm[4] = {0, 0, 0, 0};
  const int runs = 100;
  for (int s = 0; s < runs; ++s) {
    const PointConfiguration init = sine_window(100 + s);
    RandomStream rng(1000 + s);
    const auto traj = run_bulk_chain(init, 0.0, 3, rng);
    for (int k = 1; k <= 3; ++k) {
      const auto& prev = traj[k - 1].config;
      const auto& cur = traj[k].config;
      // new label a sits in the old interval (a + shift, a + shift + 1)
      for (long a = cur.first_label; a <= cur.last_label(); ++a) {
        const long u = a + traj[k].shift;
        REQUIRE(cur.point(a) > prev.point(u));
        REQUIRE(cur.point(a) < prev.point(u + 1));
      }
      REQUIRE(traj[k].basis.max_row_norm_error() < 1e-10);
      for (Eigen::Index i = 0; i < traj[k].product.rows(); ++i) REQUIRE(traj[k].product.row(i).squaredNorm() <= 1.0 + 1e-12);
      mean_norm[k] += traj[k].product.row(8).squaredNorm() / runs;
    }
  }
  CHECK(mean_norm[2] < mean_norm[1]);
  CHECK(mean_norm[3] < mean_norm[2]);
}

TEST_CASE("two-step overlaps differ from one-step overlaps") {
  std::vector<double> one, two;
  for (int s = 0; s < 1000; ++s) {
    const PointConfiguration init = sine_window(3000 + s);
    RandomStream rng(4000 + s);
    const auto traj = run_bulk_chain(init, 0.0, 2, rng);
    one.push_back(std::abs(traj[1].product(8, 8)));
    two.push_back(std::abs(traj[2].product(8, 8)));
  }
  CHECK(testutil::ks_two_sample(one, two) > 0.05);
}

TEST_CASE("spacings are stationary along the chain") {
  std::vector<double> s1, s5;
  ChainOptions opts;
  opts.track_basis = false;
  // each step trims a quarter of the half-width, so start wider than the other tests
  ProcessSpec spec = small_sine();
  spec.window = 100;
  for (int s = 0; s < 1000; ++s) {
    const PointConfiguration init = sine_window(6000 + s, spec);
    RandomStream rng(7000 + s);
    const auto traj = run_bulk_chain(init, -0.2, 5, rng, opts);
    s1.push_back(traj[1].config.point(1) - traj[1].config.point(0));
    s5.push_back(traj[5].config.point(1) - traj[5].config.point(0));
  }
  CHECK(testutil::ks_two_sample(s1, s5) <= 0.05);
}

TEST_CASE("one-step chain marginals follow the bulk law") {
  // chain and law driven by independent streams
  std::vector<double> chain[3], law[3];
  const double h = h_wigner(0.3);
  const long offs[3] = {0, 1, -1};
  for (int s = 0; s < 2000; ++s) {
    RandomStream rng(9000 + s);
    const auto traj = run_bulk_chain(sine_window(20000 + s), h, 1, rng);
    const PointConfiguration other = sine_window(50000 + s);
    const OverlapRow row = bulk_overlap_row(other, h, anchor_branch(other, h));
    for (int k = 0; k < 3; ++k) {
      chain[k].push_back(traj[1].one_step(8, 8 + offs[k]).real());
      law[k].push_back(row.at(offs[k]).real());
    }
  }
  for (int k = 0; k < 3; ++k) CHECK(testutil::ks_two_sample(chain[k], law[k]) <= 0.05);
}

TEST_CASE("hard-edge chain") {
  HardEdgeChainSpec spec;
  spec.alpha = 1;
  spec.K = 1;
  RandomStream rng(1);
  CHECK_THROWS_AS(run_hard_edge_chain(spec, rng), std::invalid_argument);
  spec.alpha = 2;
  CHECK(run_hard_edge_chain(spec, rng).size() == 2);

  spec.alpha = 4;
  spec.K = 3;
  spec.process.n_approx = 300;
  spec.process.window = 40;
  std::vector<double> smallest[4];
  for (int s = 0; s < 1000; ++s) {
    RandomStream r(100 + s);
    const auto traj = run_hard_edge_chain(spec, r);
    for (int k = 0; k <= 3; ++k) smallest[k].push_back(traj[k].config.points[0]);
    for (int k = 1; k <= 3; ++k) {
      const auto& prev = traj[k - 1].config.points;
      const auto& cur = traj[k].config.points;
      REQUIRE(cur[0] > 0.0);
      REQUIRE(cur[0] < prev[0]);
      for (std::size_t i = 1; i < cur.size(); ++i) {
        REQUIRE(cur[i] > prev[i - 1]);
        REQUIRE(cur[i] < prev[i]);
      }
      REQUIRE(traj[k].basis.max_row_norm_error() < 1e-10);
    }
  }
  for (auto& v : smallest) std::sort(v.begin(), v.end());
  for (int k = 1; k <= 3; ++k)
    for (int d = 1; d < 10; ++d) CHECK(smallest[k][d * 100] < smallest[k - 1][d * 100]);
}

TEST_CASE("chains are deterministic") {
  const PointConfiguration init = sine_window(5);
  RandomStream a(6), b(6);
  const auto t1 = run_bulk_chain(init, 0.1, 3, a);
  const auto t2 = run_bulk_chain(init, 0.1, 3, b);
  for (int k = 0; k <= 3; ++k) {
    CHECK(t1[k].config.points == t2[k].config.points);
    CHECK((t1[k].product.array() == t2[k].product.array()).all());
  }
}
