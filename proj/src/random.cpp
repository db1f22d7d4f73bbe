#include "wclass/random.hpp"

#include <cmath>
#include <limits>
#include <numeric>

#include "wclass/errors.hpp"

namespace wclass {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

RandomStream::RandomStream(std::uint64_t seed) : engine_(splitmix64(seed)) {}

RandomStream RandomStream::derive(std::uint64_t seed, std::uint64_t index) {
    return RandomStream(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ull));
}

double RandomStream::uniform() {
    // 53 random mantissa bits in [0, 1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::geometric_failures(double p) {
    if (!(p > 0.0) || p > 1.0) throw DomainError("geometric parameter must lie in (0, 1]");
    if (p == 1.0) return 0;
    // Inversion: floor(log(U) / log(1-p)) with U in (0, 1].
    const double u = 1.0 - uniform();
    const double k = std::floor(std::log(u) / std::log1p(-p));
    if (k >= 1.8e19) return std::numeric_limits<std::uint64_t>::max();
    return static_cast<std::uint64_t>(k);
}

std::uint64_t RandomStream::binomial(std::uint64_t n, double p) {
    if (n == 0 || p <= 0.0) return 0;
    if (p >= 1.0) return n;
    if (n <= 64) {
        std::uint64_t k = 0;
        for (std::uint64_t i = 0; i < n; ++i) k += uniform() < p ? 1 : 0;
        return k;
    }
    std::binomial_distribution<std::uint64_t> dist(n, p);
    return dist(engine_);
}

std::size_t RandomStream::choose(std::span<const double> weights) {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (!(total > 0.0)) throw DomainError("choose needs a positive total weight");
    double u = uniform() * total;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (u < weights[i]) return i;
        u -= weights[i];
    }
    for (std::size_t i = weights.size(); i-- > 0;)
        if (weights[i] > 0.0) return i;
    return weights.size() - 1;
}

}  // namespace wclass
