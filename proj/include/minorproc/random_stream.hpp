#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <random>

namespace minorproc {

// Counter-based splittable stream. The output word for draw n is a SplitMix64
// finalizer applied to (key + n * golden), so a stream is fully determined by
// its key and any sub-stream is derived by hashing a label into the key.
// Satisfies UniformRandomBitGenerator, so std distributions sit on top.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed);

  [[nodiscard]] RandomStream split(std::uint64_t label) const;
  [[nodiscard]] RandomStream split(std::initializer_list<std::uint64_t> path) const;

  result_type operator()();
  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  [[nodiscard]] std::uint64_t key() const { return key_; }
  [[nodiscard]] std::uint64_t position() const { return counter_; }

  double uniform01();
  double normal(double stddev = 1.0);
  // Complex Gaussian with independent real/imaginary parts of variance 1/2 each.
  std::complex<double> complex_normal();
  double chi_squared(double dof);
  double chi(double dof);

 private:
  struct FromKey {};
  RandomStream(std::uint64_t key, FromKey) : key_(key) {}

  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

std::uint64_t mix64(std::uint64_t x);

// Stable labels for sub-streams.
enum class StreamTag : std::uint64_t {
  empirical = 0x45,
  theoretical = 0x54,
  matrix = 0x4d,
  border = 0x42,
  points = 0x50,
  marks = 0x47,
  chi = 0x43,
  chain = 0x4b,
};

inline std::uint64_t tag(StreamTag t) { return static_cast<std::uint64_t>(t); }

}  // namespace minorproc
