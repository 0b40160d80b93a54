#pragma once

#include <cstdint>

namespace ruelle {

// Counter-based generator ("splitmix-counter"): the i-th output is a pure
// function of (seed, i), so streams are reproducible across platforms and
// chains can be split by deriving independent seeds.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t seed, std::uint64_t counter = 0)
        : seed_(seed), counter_(counter) {}

    static std::uint64_t word(std::uint64_t seed, std::uint64_t counter) {
        std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (counter + 1);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t next_u64() { return word(seed_, counter_++); }

    // uniform in [0,1), 53 mantissa bits
    double next_double() { return (next_u64() >> 11) * 0x1.0p-53; }

    // independent stream for chain `index`
    static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
        return word(seed ^ 0xd1b54a32d192ed03ULL, index);
    }

    std::uint64_t seed() const { return seed_; }
    std::uint64_t counter() const { return counter_; }

    static const char* name() { return "splitmix-counter"; }

private:
    std::uint64_t seed_;
    std::uint64_t counter_;
};

} // namespace ruelle
