#ifndef TREELSTM_RNG_H_
#define TREELSTM_RNG_H_

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace treelstm {

// SplitMix64 (Steele, Lea & Flood 2014). State is a single 64-bit counter
// advanced by 0x9E3779B97F4A7C15 and mixed with the fixed finalizer
//   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//   z =  z ^ (z >> 31)
// Only integer arithmetic is involved, so streams are identical on every
// platform. Doubles use the top 53 bits: (next() >> 11) * 2^-53.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();
  // Uniform on [0, 1).
  double uniform01();
  // Uniform on [lo, hi].
  double uniform(double lo, double hi);
  // Uniform integer on [0, n), rejection-sampled (no modulo bias).
  std::size_t uniform_index(std::size_t n);
  bool bernoulli(double p) { return uniform01() < p; }

  // Fisher-Yates, from the back.
  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = uniform_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace treelstm

#endif  // TREELSTM_RNG_H_
