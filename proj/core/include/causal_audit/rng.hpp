#pragma once

#include <cstdint>

namespace causal_audit {

// Counter-based generator: every (seed, stream) pair names an independent
// SplitMix64 sequence, so row i of a sample or replicate b of a bootstrap can
// be generated in any order with identical results.
class StreamRng {
 public:
  using result_type = std::uint64_t;

  StreamRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()();
  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  // Standard normal via Box-Muller; both variates are used.
  double normal();
  // Uniform integer on [0, bound).
  std::uint64_t below(std::uint64_t bound);

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t mix64(std::uint64_t x);

}  // namespace causal_audit
