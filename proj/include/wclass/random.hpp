#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace wclass {

// Per-trial random source. Streams are derived from (seed, index) so batch
// results do not depend on how trials are scheduled across workers.
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed);

    static RandomStream derive(std::uint64_t seed, std::uint64_t index);

    double uniform();
    // Failures before the first success of a Bernoulli(p) sequence.
    std::uint64_t geometric_failures(double p);
    std::uint64_t binomial(std::uint64_t n, double p);
    // Index drawn with probability proportional to weights[i].
    std::size_t choose(std::span<const double> weights);

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace wclass
