#pragma once

#include <cstdint>
#include <numeric>
#include <vector>

namespace lotmatch {

// Counter-based generator: every draw is a pure function of (seed, stream, counter),
// so substreams can be evaluated independently and in any order. The mixer is
// SplitMix64's finalizer applied to a combined key.
class SubstreamRng {
public:
    SubstreamRng(std::uint64_t seed, std::uint64_t stream)
        : key_(mix(seed ^ 0x9e3779b97f4a7c15ull) ^ mix(stream + 0xbf58476d1ce4e5b9ull)), counter_(0) {}

    std::uint64_t next() { return mix(key_ + 0x9e3779b97f4a7c15ull * ++counter_); }

    /// Uniform integer in [0, n), rejection-sampled so the distribution is exact.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) return 0;
        std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t v = next();
        while (v >= limit) v = next();
        return v % n;
    }

    int int_in(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(below(static_cast<std::uint64_t>(hi - lo + 1)));
    }

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

    /// A uniform bijection student -> rank, ranks 1..n.
    std::vector<int> lottery(int n) {
        std::vector<int> ranks(n);
        std::iota(ranks.begin(), ranks.end(), 1);
        shuffle(ranks);
        return ranks;
    }

    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ull;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }

private:
    std::uint64_t key_;
    std::uint64_t counter_;
};

/// Stream id for per-(round, group) world draws; sessions and treatments share it.
inline std::uint64_t world_stream(int round, int group) {
    return (static_cast<std::uint64_t>(round) << 20) | static_cast<std::uint64_t>(group);
}

}  // namespace lotmatch
