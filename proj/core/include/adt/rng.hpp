#pragma once

#include <cstdint>
#include <random>

namespace adt {

// Logical random streams hanging off one experiment seed. Keeping the streams
// separate means e.g. parameter initialisation draws the same values whether
// or not a warm-up phase consumed randomness earlier in the process.
enum class RngStream : std::uint64_t {
  kParamInit = 1,
  kTrainLoop = 2,
  kLossProbe = 3,
  kSplit = 4,
  kSynthesis = 5,
  kInject = 6,
  kReveal = 7,
  kEval = 8,
};

/// Derives an independent, reproducible engine for (seed, stream).
std::mt19937_64 make_rng(std::uint64_t seed, RngStream stream);

/// Same, with a free-form stream id (used when a stream is indexed, e.g. per seed).
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream_id);

}  // namespace adt
