#include "learnfbp/rng.hpp"

#include <cmath>
#include <numbers>

namespace learnfbp {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                          std::string_view role) {
    std::uint64_t tag = 0xCBF29CE484222325ULL;
    for (unsigned char c : role) {
        tag ^= c;
        tag *= 0x100000001B3ULL;
    }
    std::uint64_t h = splitmix64(master);
    h = splitmix64(h ^ index);
    return splitmix64(h ^ tag);
}

double Random::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t Random::uniform_int(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const auto span = static_cast<double>(hi - lo + 1);
    auto v = lo + static_cast<std::int64_t>(std::floor(uniform() * span));
    return v > hi ? hi : v;
}

double Random::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
}

} // namespace learnfbp
