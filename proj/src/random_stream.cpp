#include "minorproc/random_stream.hpp"

#include <cmath>

namespace minorproc {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
constexpr std::uint64_t kSplitSalt = 0xD1B54A32D192ED03ULL;
}  // namespace

std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xBF58476D1CE4E5B9ULL;
  x ^= x >> 27;
  x *= 0x94D049BB133111EBULL;
  x ^= x >> 31;
  return x;
}

RandomStream::RandomStream(std::uint64_t seed) : key_(mix64(seed + kGolden)) {}

RandomStream RandomStream::split(std::uint64_t label) const {
  const std::uint64_t child = mix64(key_ ^ mix64(label * kGolden + kSplitSalt));
  return RandomStream(mix64(child + kSplitSalt), FromKey{});
}

RandomStream RandomStream::split(std::initializer_list<std::uint64_t> path) const {
  RandomStream s = *this;
  for (std::uint64_t label : path) s = s.split(label);
  return s;
}

RandomStream::result_type RandomStream::operator()() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RandomStream::uniform01() {
  // 53 random bits -> [0, 1)
  return static_cast<double>((*this)() >> 11) * 0x1.0p-53;
}

double RandomStream::normal(double stddev) { return stddev * normal_(*this); }

std::complex<double> RandomStream::complex_normal() {
  const double s = std::sqrt(0.5);
  const double re = normal(s);
  const double im = normal(s);
  return {re, im};
}

double RandomStream::chi_squared(double dof) {
  if (dof <= 0.0) return 0.0;
  std::gamma_distribution<double> gamma(0.5 * dof, 2.0);
  return gamma(*this);
}

double RandomStream::chi(double dof) { return std::sqrt(chi_squared(dof)); }

}  // namespace minorproc
