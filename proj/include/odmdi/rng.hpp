#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace odmdi {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// The 64-bit key is the session seed; the 128-bit counter is
// (stream, block). Each round of a simulation gets its own stream, so the
// draws of round r never depend on how many rounds were simulated before it
// or on which worker ran it.
class CounterRng {
 public:
  using result_type = std::uint32_t;

  CounterRng(std::uint64_t seed, std::uint64_t stream);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  std::uint64_t next_u64();

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  bool bernoulli(double p) { return uniform() < p; }

  // Raw block function, exposed for known-answer tests.
  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> counter, std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int used_ = 4;
};

}  // namespace odmdi
