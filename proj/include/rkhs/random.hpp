#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace rkhs {

/// The single source of randomness: std::mt19937_64 seeded with the 64-bit
/// seed directly. Derived quantities use only raw engine output (no standard
/// distributions), so streams are identical across standard libraries.
class Rng {
public:
    static constexpr std::string_view kAlgorithm = "mt19937_64";

    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    [[nodiscard]] std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1) with 53 random bits.
    [[nodiscard]] double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    [[nodiscard]] double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer in [0, bound) by rejection.
    [[nodiscard]] std::uint64_t below(std::uint64_t bound);
    /// Fisher-Yates permutation of 0..n-1.
    [[nodiscard]] std::vector<std::size_t> permutation(std::size_t n);

private:
    std::mt19937_64 engine_;
};

inline std::uint64_t Rng::below(std::uint64_t bound) {
    const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} - bound + 1) % bound;
    std::uint64_t r = engine_();
    while (r < limit) { r = engine_(); }
    return r % bound;
}

inline std::vector<std::size_t> Rng::permutation(std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) { p[i] = i; }
    for (std::size_t i = n; i > 1; --i) {
        const auto j = static_cast<std::size_t>(below(i));
        std::swap(p[i - 1], p[j]);
    }
    return p;
}

}  // namespace rkhs
