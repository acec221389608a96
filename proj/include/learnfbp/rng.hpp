#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace learnfbp {

/**
 * Derives an independent stream seed from a master seed, a sample index and a
 * role tag ("phantom", "noise", "shuffle", ...). SplitMix64 finalizer over the
 * three inputs, with the tag folded in by FNV-1a. Stable across platforms.
 */
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index,
                          std::string_view role);

std::uint64_t splitmix64(std::uint64_t x);

/**
 * mt19937_64 with portable uniform/normal transforms (the std distributions
 * are implementation-defined, so they are not used for data generation).
 */
class Random {
  public:
    explicit Random(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    /// Uniform integer on the closed range [lo, hi].
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    /// Standard normal via Box-Muller; the second variate is cached.
    double normal();

    std::mt19937_64& engine() { return engine_; }

  private:
    std::mt19937_64 engine_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace learnfbp
