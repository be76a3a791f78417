#pragma once

#include <cmath>
#include <complex>
#include <cstdint>

namespace actdet {

// splitmix64; used for key derivation and generator seeding.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Independent randomness lanes hanging off one master seed. Components can be
// regenerated in isolation (same pilots, fresh noise, ...) by re-deriving the
// matching stream.
enum class StreamKind : std::uint64_t {
  Pilots = 1,
  Activity = 2,
  Channel = 3,
  Noise = 4,
  Shuffle = 5,
};

inline std::uint64_t derive_stream_key(std::uint64_t master, StreamKind kind,
                                       std::uint64_t index = 0) {
  std::uint64_t s = master;
  std::uint64_t k = splitmix64_next(s);
  s ^= (static_cast<std::uint64_t>(kind) + 0x9E3779B9ull) * 0xD1B54A32D192ED03ull;
  k ^= splitmix64_next(s);
  s ^= (index + 1) * 0x8CB92BA72F3D8DD7ull;
  k ^= splitmix64_next(s);
  return k;
}

// xoshiro256** with hand-rolled uniform/Gaussian transforms so sequences are
// identical across standard libraries and platforms.
class RngStream {
 public:
  explicit RngStream(std::uint64_t key) {
    std::uint64_t s = key;
    for (auto& w : state_) w = splitmix64_next(s);
  }

  static RngStream derive(std::uint64_t master, StreamKind kind,
                          std::uint64_t index = 0) {
    return RngStream(derive_stream_key(master, kind, index));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n); Lemire multiply-with-rejection.
  std::uint64_t below(std::uint64_t n) {
    auto m = static_cast<unsigned __int128>(next_u64()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      const std::uint64_t t = (0 - n) % n;
      while (lo < t) {
        m = static_cast<unsigned __int128>(next_u64()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Standard normal via Box-Muller; second draw of each pair is cached.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform01();
    while (u1 <= 0.0) u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  // Circularly symmetric complex normal with unit variance: E|z|^2 = 1.
  std::complex<double> cnormal() {
    const double re = normal();
    const double im = normal();
    return {re * M_SQRT1_2, im * M_SQRT1_2};
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4];
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace actdet
