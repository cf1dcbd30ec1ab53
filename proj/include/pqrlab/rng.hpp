#ifndef PQRLAB_RNG_HPP
#define PQRLAB_RNG_HPP

#include <cstdint>

namespace pqrlab {

/// Counter-based splittable generator (splitmix64 core). Streams derived
/// with `derive` are independent of each other and of draw order, so
/// parallel sweep cells stay deterministic regardless of scheduling.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0, 1) with 53 random bits; identical on every
    /// platform (no library distribution involved).
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

private:
    std::uint64_t state_;
};

/// Hash-combine two seeds into a new stream id.
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
    SplitMix64 g(a ^ (0x632BE59BD9B4E019ULL + (b << 1)));
    g.next_u64();
    return g.next_u64() ^ b;
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix_seed(mix_seed(a, b), c);
}

} // namespace pqrlab

#endif
