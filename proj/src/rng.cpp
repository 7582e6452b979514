#include "facet/rng.hpp"

#include <cmath>
#include <numbers>

namespace facet {

std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double Rng::uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::uniform_pos() {
    return (static_cast<double>(eng_() >> 11) + 1.0) * 0x1.0p-53;
}

std::uint64_t Rng::uniform_int(std::uint64_t n) {
    // Rejection sampling to avoid modulo bias.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
        x = eng_();
    } while (x >= limit);
    return x % n;
}

double Rng::normal() {
    const double u1 = uniform_pos();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double Rng::truncated_normal(double std_dev) {
    double v;
    do {
        v = normal() * std_dev;
    } while (std::abs(v) > 2.0 * std_dev);
    return v;
}

std::vector<std::size_t> Rng::permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = i;
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(uniform_int(i));
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

} // namespace facet
