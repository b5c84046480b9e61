#ifndef HIDETIFY_RANDOM_HPP
#define HIDETIFY_RANDOM_HPP

#include <cstdint>
#include <initializer_list>
#include <random>
#include <vector>

namespace hidetify {

using Rng = std::mt19937_64;

/// Generator keyed by a base seed plus any number of stream labels.
inline Rng make_rng(std::uint64_t seed, std::initializer_list<std::uint64_t> keys = {}) {
    std::vector<std::uint32_t> words;
    words.reserve(2 + 2 * keys.size());
    auto push = [&](std::uint64_t v) {
        words.push_back(static_cast<std::uint32_t>(v));
        words.push_back(static_cast<std::uint32_t>(v >> 32));
    };
    push(seed);
    for (auto k : keys) {
        push(k);
    }
    std::seed_seq seq(words.begin(), words.end());
    return Rng(seq);
}

/// Child seed for stream `keys` under `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    auto rng = make_rng(seed, keys);
    return rng();
}

}  // namespace hidetify

#endif
