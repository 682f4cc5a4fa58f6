#ifndef CAPDETAIL_RANDOM_H_
#define CAPDETAIL_RANDOM_H_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace capdetail {

// Seeded generator whose draws are identical on every platform.
// std::mt19937_64's output sequence is fixed by the standard; the library
// distributions are not, so bounded draws and shuffles are done here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t Next() { return engine_(); }

  // Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t UniformBelow(std::uint64_t bound);

  // Uniform real in [0, 1) with 53 random bits.
  double UniformUnit();

  template <typename T>
  void Shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(UniformBelow(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Stable per-item seed: mixes a run seed with an item key (e.g. record id)
// so items get independent streams regardless of processing order.
std::uint64_t DeriveSeed(std::uint64_t seed, std::string_view key);

}  // namespace capdetail

#endif  // CAPDETAIL_RANDOM_H_
