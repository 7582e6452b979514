#ifndef FACET_RNG_HPP
#define FACET_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace facet {

// splitmix64 step; used to derive independent sub-seeds from (seed, tags).
std::uint64_t mix64(std::uint64_t x);

// Deterministic seed derivation: derive(seed, a, b, ...) gives streams that
// do not depend on call order elsewhere in the program.
inline std::uint64_t derive_seed(std::uint64_t seed) { return mix64(seed); }
template <class... Tags>
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag, Tags... rest) {
    return derive_seed(mix64(seed + 0x9e3779b97f4a7c15ULL * (tag + 1)), rest...);
}

// Random stream with explicitly specified conversions so that generated
// sequences are identical across standard libraries (mt19937_64 itself is
// fully pinned by the standard; the distributions in <random> are not).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t bits() { return eng_(); }

    // Uniform in [0, 1).
    double uniform();
    // Uniform in (0, 1].
    double uniform_pos();
    // Uniform integer in [0, n).
    std::uint64_t uniform_int(std::uint64_t n);
    // Standard normal via Box-Muller (two uniforms per draw, no cache).
    double normal();
    // Zero-mean normal with the given std, rejection-sampled to |x| <= 2*std.
    double truncated_normal(double std_dev);

    // Fisher-Yates permutation of 0..n-1.
    std::vector<std::size_t> permutation(std::size_t n);

private:
    std::mt19937_64 eng_;
};

} // namespace facet

#endif
