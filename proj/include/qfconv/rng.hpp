#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace qfconv {

/// Philox4x32-10 block function (Salmon et al., SC'11).
using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

PhiloxCounter philox4x32_10(PhiloxCounter counter, PhiloxKey key) noexcept;

/// Counter-based engine over one substream. A substream is identified by
/// (seed, stream, index); two engines with the same triple produce the same
/// sequence regardless of what other substreams were used before.
///
/// Satisfies UniformRandomBitGenerator, so std distributions can draw from it.
class SubstreamEngine {
 public:
  using result_type = std::uint32_t;

  SubstreamEngine(std::uint64_t seed, std::uint32_t stream, std::uint64_t index) noexcept;

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept;

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept;

 private:
  PhiloxKey key_;
  PhiloxCounter counter_;
  PhiloxCounter block_{};
  unsigned used_ = 4;
};

/// Poisson variate by sequential inversion; exact for the small means used
/// here and identical on every standard library.
std::uint64_t sample_poisson(SubstreamEngine& engine, double mean);

/// Standard normal variate (Box-Muller, no caching between calls).
double sample_normal(SubstreamEngine& engine);

/// Child seed for the `index`-th independent run of a family `tag`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint32_t tag, std::uint64_t index) noexcept;

}  // namespace qfconv
