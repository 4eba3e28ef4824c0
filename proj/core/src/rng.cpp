#include "mfldp/rng.hpp"

#include <cmath>

namespace mfldp {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

Stream::Stream(std::uint64_t seed, std::uint64_t stream_id)
    : key_(mix(mix(seed + kGolden) ^ mix(stream_id * kGolden + 0x632BE59BD9B4E019ULL))), id_(stream_id) {}

Stream::result_type Stream::operator()() {
  ++counter_;
  return mix(key_ ^ mix(counter_ * kGolden));
}

double Stream::uniform() {
  // 53 random bits mapped to the midpoints of a 2^-53 grid, never 0 or 1.
  return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
}

double Stream::exponential(double rate) { return -std::log(uniform()) / rate; }

}  // namespace mfldp
