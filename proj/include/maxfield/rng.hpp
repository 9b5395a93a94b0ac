#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace maxfield {

/// Philox4x32-10 counter-based generator: a pure function of
/// (counter, key) with no hidden state.
struct Philox4x32 {
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Counter generate(Counter counter, Key key);
};

/// One reproducible stream of random draws, identified by (seed, stream_id).
///
/// The seed is the Philox key; the stream id occupies the upper half of the
/// 128-bit counter and the block index the lower half. Two streams with
/// different ids never share a counter value, so one stream per Monte Carlo
/// replicate gives results independent of how replicates are scheduled.
/// A stream is a plain value: copy it to fork, never share it across threads.
class RngStream {
 public:
  using result_type = std::uint32_t;

  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u32(); }

  std::uint32_t next_u32();
  std::uint64_t next_u64();

  /// Uniform on the open interval (0, 1), 53-bit resolution.
  double uniform();
  /// Standard normal (Marsaglia polar method).
  double normal();
  /// Unit-rate exponential.
  double exponential();
  /// Uniform integer in [0, n); n > 0.
  std::uint64_t uniform_int(std::uint64_t n);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }
  std::uint64_t blocks_used() const { return block_; }

 private:
  void refill();

  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::uint64_t block_ = 0;
  Philox4x32::Counter buffer_{};
  unsigned next_ = 4;
  double spare_normal_ = 0.0;
  bool has_spare_ = false;
};

inline RngStream spawn_stream(std::uint64_t seed, std::uint64_t stream_id) {
  return RngStream(seed, stream_id);
}

/// SplitMix64 finalizer; used to derive child seeds from a parent seed and a tag.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t tag);

}  // namespace maxfield
