#pragma once

#include <cstdint>
#include <random>

namespace htbandit {

// Deterministic random stream. mt19937_64's output sequence is pinned by the
// standard and the uniform double below avoids the implementation-defined
// std::uniform_real_distribution, so streams are bit-identical across
// compilers and platforms.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    // Uniform in [0, 1), 53 random bits.
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

private:
    std::mt19937_64 gen_;
};

// SplitMix64 output function, used as the mixing step of the seed derivation.
inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Splittable counter construction: fold each label into the stream state.
// derive_seed(base, r) gives replicate streams; a further tag separates the
// policy stream from the environment stream inside one episode.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a) {
    return splitmix64(base ^ splitmix64(a));
}
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
    return derive_seed(derive_seed(base, a), b);
}

// Stream tags for the per-episode substreams.
inline constexpr std::uint64_t kPolicyStream = 0x706f6c696379ULL;  // "policy"
inline constexpr std::uint64_t kEnvStream = 0x656e76ULL;           // "env"

}  // namespace htbandit
