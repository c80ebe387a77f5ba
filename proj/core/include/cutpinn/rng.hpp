#pragma once

#include <cstdint>
#include <string_view>

namespace cutpinn {

// xoshiro256++ with splitmix64 seeding. Streams are derived from a
// 64-bit seed plus a purpose tag, so independent consumers (interior
// sampling, boundary sampling, init, evaluation) never share a stream.
// Output is platform-independent, unlike the std:: distributions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) { seed_state(seed); }
  Rng(std::uint64_t seed, std::string_view tag) { seed_state(seed ^ hash_tag(tag)); }
  Rng(std::uint64_t seed, std::string_view tag, std::uint64_t index) {
    seed_state(seed ^ hash_tag(tag) ^ (0x9e3779b97f4a7c15ULL * (index + 1)));
  }

  std::uint64_t next() {
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

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // uniform in [a, b)
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  static std::uint64_t hash_tag(std::string_view tag) {
    // FNV-1a
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (char c : tag) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ULL;
    }
    return h;
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  void seed_state(std::uint64_t seed) {
    // splitmix64 expansion
    std::uint64_t z = seed;
    for (auto& s : s_) {
      z += 0x9e3779b97f4a7c15ULL;
      std::uint64_t w = z;
      w = (w ^ (w >> 30)) * 0xbf58476d1ce4e5b9ULL;
      w = (w ^ (w >> 27)) * 0x94d049bb133111ebULL;
      s = w ^ (w >> 31);
    }
  }
  std::uint64_t s_[4];
};

}  // namespace cutpinn
