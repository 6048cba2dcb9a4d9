#include "ersim/random.hpp"

#include <cmath>

#include "ersim/error.hpp"

namespace ersim {

namespace {

constexpr std::uint32_t kMulA = 0xD2511F53;
constexpr std::uint32_t kMulB = 0xCD9E8D57;
constexpr std::uint32_t kWeylA = 0x9E3779B9;
constexpr std::uint32_t kWeylB = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

constexpr double kTwoPow53Inv = 1.0 / 9007199254740992.0;

// Above this a single inversion loop loses accuracy to exp(-mean) underflow.
constexpr double kPoissonChunk = 30.0;

std::uint64_t poisson_inversion(CounterRng& rng, double mean) {
  const double u = rng.uniform();
  double p = std::exp(-mean);
  double cdf = p;
  std::uint64_t k = 0;
  while (u >= cdf) {
    ++k;
    p *= mean / static_cast<double>(k);
    const double next = cdf + p;
    if (next == cdf) break;  // tail exhausted in double precision
    cdf = next;
  }
  return k;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMulA, ctr[0], lo0, hi0);
    mulhilo(kMulB, ctr[2], lo1, hi1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
    key[0] += kWeylA;
    key[1] += kWeylB;
  }
  return ctr;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t master_seed, RngDomain domain, std::uint64_t stream_id)
    : stream_id_(stream_id) {
  const std::uint64_t k = mix64(master_seed ^ mix64(static_cast<std::uint64_t>(domain)));
  key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
}

std::uint64_t CounterRng::next_u64() {
  const std::uint64_t block = draw_index_ >> 1;
  if (block != buffered_block_) {
    const Philox4x32::Counter ctr = {
        static_cast<std::uint32_t>(stream_id_), static_cast<std::uint32_t>(stream_id_ >> 32),
        static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
    const auto out = Philox4x32::generate(ctr, key_);
    buffer_[0] = (static_cast<std::uint64_t>(out[1]) << 32) | out[0];
    buffer_[1] = (static_cast<std::uint64_t>(out[3]) << 32) | out[2];
    buffered_block_ = block;
  }
  return buffer_[draw_index_++ & 1];
}

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * kTwoPow53Inv; }

double CounterRng::uniform_open() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * kTwoPow53Inv;
}

double CounterRng::exponential(double rate) {
  if (!(rate > 0.0)) throw InvalidParameter("exponential rate must be > 0");
  return -std::log(uniform_open()) / rate;
}

double CounterRng::standard_normal() {
  // Box-Muller, one value per call so draw counts stay position-independent.
  const double r = std::sqrt(-2.0 * std::log(uniform_open()));
  return r * std::cos(2.0 * 3.14159265358979323846 * uniform());
}

std::uint64_t CounterRng::poisson(double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) throw InvalidParameter("poisson mean must be >= 0");
  if (mean == 0.0) return 0;
  std::uint64_t total = 0;
  while (mean > kPoissonChunk) {
    total += poisson_inversion(*this, kPoissonChunk);
    mean -= kPoissonChunk;
  }
  return total + poisson_inversion(*this, mean);
}

}  // namespace ersim
