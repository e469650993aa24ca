#pragma once

#include <cstdint>
#include <limits>

namespace semiswitch {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Counter-based stream: the n-th output is a hash of (key, n) in the SplitMix64 style.
class ReplicaStream {
 public:
  using result_type = std::uint64_t;

  explicit ReplicaStream(std::uint64_t key = 0) : key_(mix64(key)) {}
  static ReplicaStream derive(std::uint64_t master_seed, std::uint64_t replica) {
    ReplicaStream s;
    s.key_ = mix64(mix64(master_seed ^ 0x6a09e667f3bcc909ULL) + 0x9e3779b97f4a7c15ULL * (replica + 1));
    return s;
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform on (0, 1].
  double uniform_open_closed() { return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53; }
  // Uniform on [0, 1).
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace semiswitch
