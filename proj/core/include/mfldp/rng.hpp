#pragma once

#include <cstdint>
#include <limits>

namespace mfldp {

inline constexpr std::uint64_t kDefaultSeed = 42;

// Counter-based random stream keyed by (seed, stream id). Output i is a pure
// function of the key and i, so replicates can be generated in any order.
class Stream {
 public:
  using result_type = std::uint64_t;

  Stream(std::uint64_t seed, std::uint64_t stream_id);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()();
  // Uniform on the open interval (0, 1).
  double uniform();
  double exponential(double rate);
  std::uint64_t counter() const { return counter_; }
  std::uint64_t id() const { return id_; }

 private:
  std::uint64_t key_;
  std::uint64_t id_;
  std::uint64_t counter_ = 0;
};

}  // namespace mfldp
