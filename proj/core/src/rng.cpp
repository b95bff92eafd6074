#include "adt/rng.hpp"

namespace adt {
namespace {

// splitmix64 finaliser; decorrelates seed/stream pairs before seeding the engine.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream_id) {
  const std::uint64_t state = mix(mix(seed) + 0x9e3779b97f4a7c15ULL * (stream_id + 1));
  return std::mt19937_64(state);
}

std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream) {
  return make_rng(seed, static_cast<std::uint64_t>(stream));
}

}  // namespace adt
