#pragma once

#include <cstdint>

#include "spikeopt/common.hpp"

namespace spikeopt {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Maps 64 random bits onto [0, 1) with 53 bits of resolution.
constexpr double to_unit(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Counter-based random source. A draw is a pure function of
/// (seed, stream, a, b), so the value seen by neuron i at tick t does not
/// depend on how many other draws happened before it. This is what keeps
/// noise reproducible when neurons are appended to a network.
class CounterRng {
 public:
  CounterRng() = default;
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0) noexcept
      : seed_(seed), stream_(stream), key_(splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL))) {}

  [[nodiscard]] std::uint64_t bits(std::uint64_t a, std::uint64_t b) const noexcept {
    std::uint64_t h = splitmix64(key_ + a * 0xD1342543DE82EF95ULL);
    return splitmix64(h ^ (b * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL));
  }
  [[nodiscard]] double uniform(std::uint64_t a, std::uint64_t b) const noexcept {
    return to_unit(bits(a, b));
  }
  [[nodiscard]] CounterRng substream(std::uint64_t id) const noexcept {
    return CounterRng(splitmix64(seed_ ^ 0xA0761D6478BD642FULL) ^ stream_, id);
  }

  [[nodiscard]] std::uint64_t seed() const noexcept { return seed_; }
  [[nodiscard]] std::uint64_t stream() const noexcept { return stream_; }

 private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_ = 0;
  std::uint64_t key_ = splitmix64(0x632BE59BD9B4E019ULL);
};

/// Sequential generator layered on CounterRng; used for initialization and
/// any draw that has no natural (tick, index) coordinate.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) noexcept : source_(seed, stream) {}
  explicit Rng(const CounterRng& source) noexcept : source_(source) {}

  std::uint64_t next() noexcept { return source_.bits(counter_++, 0x5EED); }
  double uniform() noexcept { return to_unit(next()); }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n) by rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw InvalidArgument("Rng::below: empty range");
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x;
    do {
      x = next();
    } while (x >= limit);
    return x % n;
  }
  // Inclusive range.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw InvalidArgument("Rng::uniform_int: hi < lo");
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }
  bool bernoulli(double p) noexcept { return uniform() < p; }

 private:
  CounterRng source_;
  std::uint64_t counter_ = 0;
};

}  // namespace spikeopt
