#pragma once

#include <optional>
#include <string>

#include "minorproc/linalg.hpp"
#include "minorproc/random_stream.hpp"

namespace minorproc {

enum class EntryLaw { gaussian, rademacher, uniform };

EntryLaw parse_entry_law(const std::string& name);
std::string to_string(EntryLaw law);

struct EnsembleSpec {
  int beta = 1;
  int N = 1;
  std::optional<int> wishart_T;
  EntryLaw entry_law = EntryLaw::gaussian;
  // Diagonal entries with variance 2 instead of 1 (conventional GOE/GUE scaling).
  bool goe_diagonal = false;

  void validate() const;
  [[nodiscard]] bool is_wishart() const { return wishart_T.has_value(); }
  [[nodiscard]] double q() const;
};

// Unit-variance draw from the entry law. Complex draws have independent real
// and imaginary parts of variance 1/2 each.
template <class S>
S draw_entry(EntryLaw law, RandomStream& rng);

// Real unit-variance draw, used for diagonal entries.
double draw_real_entry(EntryLaw law, RandomStream& rng);

template <class S>
Matrix<S> sample_wigner(const EnsembleSpec& spec, RandomStream& rng);

template <class S>
struct WishartSample {
  Matrix<S> X;  // T x N data matrix
  Matrix<S> W;  // X^H X
};

template <class S>
WishartSample<S> sample_wishart(const EnsembleSpec& spec, RandomStream& rng);

template <class S>
struct MinorExtension {
  Vector<S> g;
  double corner = 0.0;  // unused for Wishart
};

// Border of length N (Wigner) or T (Wishart) plus the Wigner corner entry,
// which reuses the entry law (variance 1, or 2 with goe_diagonal).
template <class S>
MinorExtension<S> sample_extension(const EnsembleSpec& spec, RandomStream& rng);

template <class S>
Matrix<S> extend_wigner(const Matrix<S>& H, const MinorExtension<S>& ext);

template <class S>
Matrix<S> extend_wishart(const Matrix<S>& X, const Vector<S>& g);

// (<v_i, g>)_i for the columns v_i of basis.
template <class S>
Vector<S> eigen_coordinates(const Matrix<S>& basis, const Vector<S>& g, double tol = 1e-10);

}  // namespace minorproc
