#include "tmap/rng.hpp"

#include <cmath>

namespace tmap {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = a ^ (b + 0x632BE59BD9B4E019ULL + (a << 6) + (a >> 2));
  return splitmix64(s);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

}  // namespace

Xoshiro256::Xoshiro256(std::uint64_t seed) {
  std::uint64_t state = seed;
  for (auto& word : s_) word = splitmix64(state);
}

Xoshiro256::result_type Xoshiro256::operator()() {
  const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = rotl(s_[3], 45);
  return result;
}

double Xoshiro256::uniform_open() {
  // 53 random mantissa bits, shifted off zero by half an ulp.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Xoshiro256::normal() {
  // Box-Muller without caching, so a stream's state depends only on the
  // number of draws taken from it.
  const double u1 = uniform_open();
  const double u2 = uniform_open();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

Xoshiro256 make_stream(std::uint64_t seed, std::uint64_t step, StreamTag tag, std::uint64_t sub) {
  std::uint64_t h = mix(seed, static_cast<std::uint64_t>(tag));
  h = mix(h, step);
  h = mix(h, sub);
  return Xoshiro256(h);
}

}  // namespace tmap
