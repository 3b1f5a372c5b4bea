#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ffradon {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Derives an independent stream seed from a master seed and a stream tag
/// path. Work items seed themselves with (master, item tags...) so results
/// do not depend on thread count or scheduling.
inline std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> tags) {
    std::uint64_t s = master ^ 0xa0761d6478bd642fULL;
    std::uint64_t out = splitmix64(s);
    for (std::uint64_t t : tags) {
        s ^= t + 0xe7037ed1a0b428dbULL;
        out ^= splitmix64(s);
    }
    return out;
}

/// mt19937_64 wrapper with hand-rolled bounded sampling. std::uniform_*
/// distributions are not pinned by the standard, so they are avoided for
/// anything that must reproduce bit-for-bit.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next() { return eng_(); }

    // uniform in [0, n)
    std::uint64_t below(std::uint64_t n) {
        if (n <= 1) return 0;
        // multiply-shift; bias is irrelevant at desk scale and the result is
        // a pure function of the engine output
        return static_cast<std::uint64_t>(
            (static_cast<unsigned __int128>(next()) * n) >> 64);
    }

    // uniform in [lo, hi] inclusive
    std::uint64_t range(std::uint64_t lo, std::uint64_t hi) { return lo + below(hi - lo + 1); }

    // uniform double in [0, 1)
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    bool coin() { return (next() & 1) != 0; }

private:
    std::mt19937_64 eng_;
};

} // namespace ffradon
