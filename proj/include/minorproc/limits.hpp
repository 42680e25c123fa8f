#pragma once

#include <string>

#include "minorproc/random_stream.hpp"
#include "minorproc/secular.hpp"

namespace minorproc {

enum class ApproximantModel { tridiagonal, dense };
enum class EdgeSide { left, right };
// Sine windows: label 0 is the first point at or above the energy (energy), or the point
// with the fixed index floor(n F_sc(E)) shifted to 0 (index). The second sees a typical
// neighbourhood, the first a size-biased gap (mu_{-1}, mu_0).
enum class SineAnchor { energy, index };

std::string to_string(ApproximantModel m);
std::string to_string(EdgeSide s);
EdgeSide parse_edge_side(const std::string& s);

struct ProcessSpec {
  ProcessKind kind = ProcessKind::sine;
  int beta = 1;
  int alpha = 0;        // bessel only
  int window = 128;     // M: half-width for sine, point count for airy/bessel
  int n_approx = 2000;  // size of the approximating beta-ensemble
  double energy = 0.0;  // sine: anchor energy in semicircle units
  EdgeSide side = EdgeSide::left;  // airy
  SineAnchor anchor = SineAnchor::energy;
  ApproximantModel model = ApproximantModel::tridiagonal;

  void validate() const;
};

// Defaults per kind: sine M=128 n=2000; airy M=12 n=1000; bessel M=80 n=1000.
ProcessSpec default_process_spec(ProcessKind kind);

// Eigenvalues of the size-n Gaussian beta-ensemble (semicircle radius 2 sqrt n), ascending.
RealVector gaussian_ensemble_eigenvalues(int beta, int n, ApproximantModel model, RandomStream& rng);

std::vector<cplx> draw_marks(int beta, long n, RandomStream& rng);

PointConfiguration sample_sine(const ProcessSpec& spec, RandomStream& rng);
PointConfiguration sample_airy(const ProcessSpec& spec, RandomStream& rng);
PointConfiguration sample_bessel(const ProcessSpec& spec, RandomStream& rng);
PointConfiguration sample_process(const ProcessSpec& spec, RandomStream& rng);

}  // namespace minorproc
