#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "twist/core/types.hpp"

namespace twist {

// Deterministic random stream. The engine is std::mt19937_64; the
// derived distributions are implemented here so that the full stream state
// is the engine state (no cached normal deviates) and is portable across
// standard library implementations.
class Rng {
 public:
  Rng() : Rng(0) {}
  explicit Rng(std::uint64_t seed);

  // Independent stream `stream` of seed `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64() { return engine_(); }
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }
  bool bernoulli(double p) { return uniform() < p; }
  Vector3d unit_vector();

  std::string save() const;
  void load(const std::string& text);

  friend bool operator==(const Rng& a, const Rng& b) { return a.engine_ == b.engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace twist
