#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace etgl {

// Seeded random source. Every draw is derived from the raw 64-bit output of
// mt19937_64, so sequences are identical across standard library vendors.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  // Independent named sub-stream of a run seed ("env", "nets", "replay", ...).
  static Rng stream(std::uint64_t seed, std::string_view name);

  std::uint64_t next() { return engine_(); }
  double uniform();  // [0, 1)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n);  // uniform in [0, n), n > 0
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace etgl
