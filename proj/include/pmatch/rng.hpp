#ifndef PMATCH_RNG_HPP
#define PMATCH_RNG_HPP

/*
 * Random number generation.
 *
 * Every random draw in the library goes through xoshiro256** (Blackman and
 * Vigna, 2018), seeded by expanding a 64-bit seed with SplitMix64. Streams
 * for independent trials are derived with derive_seed(base, index), which
 * runs the pair through the SplitMix64 finalizer; this keeps trial i's
 * stream the same no matter how many workers run the experiment.
 *
 * Bounded integers use Lemire's multiply-shift rejection method and doubles
 * take the top 53 bits, so no draw depends on the standard library's
 * implementation-defined distributions.
 */

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

namespace pmatch {

// SplitMix64 output function (Steele, Lea, Flood).
constexpr std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
    return mix64(mix64(base + 0x9e3779b97f4a7c15ULL) ^ (index * 0xd1b54a32d192ed03ULL + 0x632be59bd9b4e019ULL));
}

// Counter-based uniform in [0, 1): a pure function of (key, a, b).
constexpr double keyed_uniform(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
    std::uint64_t h = derive_seed(derive_seed(key, a), b);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
}

class Rng {
public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) {
        std::uint64_t sm = seed;
        for (auto& word : state_) {
            sm += 0x9e3779b97f4a7c15ULL;
            word = mix64(sm);
        }
    }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    result_type operator()() {
        const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    // Uniform integer in [0, bound). bound must be positive.
    std::uint64_t below(std::uint64_t bound) {
        __uint128_t product = static_cast<__uint128_t>((*this)()) * bound;
        auto low = static_cast<std::uint64_t>(product);
        if (low < bound) {
            const std::uint64_t threshold = (0 - bound) % bound;
            while (low < threshold) {
                product = static_cast<__uint128_t>((*this)()) * bound;
                low = static_cast<std::uint64_t>(product);
            }
        }
        return static_cast<std::uint64_t>(product >> 64);
    }

    // Uniform double in [0, 1).
    double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    bool bernoulli(double p) { return uniform() < p; }

    // Failures before the first success in Bernoulli(p) trials, p in (0, 1).
    // Saturates at `cap` so callers can stop scanning past a range.
    std::uint64_t geometric(double p, std::uint64_t cap) {
        const double u = 1.0 - uniform();  // (0, 1]
        const double g = std::floor(std::log(u) / std::log1p(-p));
        if (!(g < static_cast<double>(cap))) return cap;
        return static_cast<std::uint64_t>(g);
    }

    // Bin(trials, p) by geometric skipping; O(trials * p) expected work.
    std::uint64_t binomial(std::uint64_t trials, double p) {
        if (p <= 0.0 || trials == 0) return 0;
        if (p >= 1.0) return trials;
        std::uint64_t successes = 0;
        std::uint64_t pos = 0;
        while (true) {
            pos += geometric(p, trials);
            if (pos >= trials) break;
            ++successes;
            ++pos;
        }
        return successes;
    }

    template <class T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

private:
    static constexpr std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

    std::uint64_t state_[4];
};

// Indices of the successes among `range` Bernoulli(p) trials, ascending.
inline std::vector<std::uint32_t> bernoulli_positions(Rng& rng, std::uint32_t range, double p) {
    std::vector<std::uint32_t> out;
    if (p <= 0.0) return out;
    if (p >= 1.0) {
        out.resize(range);
        for (std::uint32_t i = 0; i < range; ++i) out[i] = i;
        return out;
    }
    std::uint64_t pos = 0;
    while (true) {
        pos += rng.geometric(p, range);
        if (pos >= range) break;
        out.push_back(static_cast<std::uint32_t>(pos));
        ++pos;
    }
    return out;
}

// Draws uniform no-repeat tuples from [0, range) by partial Fisher-Yates over a
// scratch permutation that is restored after each draw.
class TupleSampler {
public:
    explicit TupleSampler(std::uint32_t range) : perm_(range) {
        for (std::uint32_t i = 0; i < range; ++i) perm_[i] = i;
    }

    std::uint32_t range() const { return static_cast<std::uint32_t>(perm_.size()); }

    // Appends `length` distinct values in uniformly random order to `out`.
    void draw(Rng& rng, std::size_t length, std::vector<std::uint32_t>& out) {
        swaps_.clear();
        const std::size_t r = perm_.size();
        for (std::size_t k = 0; k < length; ++k) {
            const auto j = k + static_cast<std::size_t>(rng.below(r - k));
            std::swap(perm_[k], perm_[j]);
            swaps_.push_back(static_cast<std::uint32_t>(j));
            out.push_back(perm_[k]);
        }
        for (std::size_t k = swaps_.size(); k-- > 0;) std::swap(perm_[k], perm_[swaps_[k]]);
    }

private:
    std::vector<std::uint32_t> perm_;
    std::vector<std::uint32_t> swaps_;
};

}  // namespace pmatch

#endif  // PMATCH_RNG_HPP
