#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace sumkit {

// Seeded generator whose derived draws do not depend on the standard
// library's distribution implementations, so streams match across toolchains.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  double uniform();                      // [0, 1)
  double uniform(double lo, double hi);  // [lo, hi)
  double normal();                       // standard normal, Box-Muller
  std::size_t below(std::size_t n);      // uniform integer in [0, n)

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = below(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  void fill_uniform(std::span<float> out, double lo, double hi);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent stream seed from a base seed and a stream tag.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace sumkit
