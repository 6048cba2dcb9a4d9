#pragma once

// Counter-based random numbers. Every stream is addressed by
// (master seed, domain, stream id) and every value inside a stream by its
// draw index, so a shot's randomness never depends on which thread ran it
// or on how many shots were simulated before it.

#include <array>
#include <cstdint>

namespace ersim {

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

/// Independent uses of the master seed; each gets its own key.
enum class RngDomain : std::uint32_t {
  Shot = 1,
  Diffusion = 2,
  Test = 0xffff,
};

/// Sequential view over one counter-based substream.
///
/// Draw index i of stream s maps to Philox block (s, i / 2); each block yields
/// two 64-bit words. Copying a CounterRng forks it at the current position.
class CounterRng {
 public:
  CounterRng(std::uint64_t master_seed, RngDomain domain, std::uint64_t stream_id);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform();
  /// Uniform on (0, 1); safe for log().
  double uniform_open();
  double exponential(double rate);
  double standard_normal();
  /// Poisson deviate by sequential inversion; large means are split into chunks.
  std::uint64_t poisson(double mean);
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t draw_index() const { return draw_index_; }

 private:
  Philox4x32::Key key_;
  std::uint64_t stream_id_;
  std::uint64_t draw_index_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  std::uint64_t buffered_block_ = ~std::uint64_t{0};
};

/// SplitMix64 finalizer; used to derive keys and digests.
std::uint64_t mix64(std::uint64_t x);

}  // namespace ersim
