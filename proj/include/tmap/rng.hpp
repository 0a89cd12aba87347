#pragma once

#include <cstdint>
#include <limits>
#include <random>

namespace tmap {

/// xoshiro256++ generator. Cheap to seed, which matters because every
/// particle, step and purpose gets its own stream.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed = 0x9E3779B97F4A7C15ULL);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();

  /// Uniform draw on the open interval (0, 1).
  double uniform_open();

  double normal();

 private:
  std::uint64_t s_[4];
};

/// Purpose tags that key independent random streams. Changing the values
/// changes every experiment's draws, so they are fixed.
enum class StreamTag : std::uint64_t {
  initial_truth = 1,
  initial_ensemble = 2,
  truth_process_noise = 3,
  truth_observation = 4,
  ensemble_process_noise = 5,
  analysis = 6,
  resampling = 7,
  reference_samples = 8,
  test = 99,
};

/// Stream keyed by (experiment seed, step index, purpose, sub-index).
Xoshiro256 make_stream(std::uint64_t seed, std::uint64_t step, StreamTag tag,
                       std::uint64_t sub = 0);

}  // namespace tmap
