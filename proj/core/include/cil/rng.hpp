#pragma once

#include <cstdint>
#include <limits>

namespace cil {

/// SplitMix64 finalizer. Bijective on 64-bit words.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Folds a sequence of words into one stream key.
constexpr std::uint64_t derive_key(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) noexcept {
    std::uint64_t k = mix64(seed ^ 0x6a09e667f3bcc909ULL);
    k = mix64(k + 0x9e3779b97f4a7c15ULL * (a + 1));
    k = mix64(k + 0xd1b54a32d192ed03ULL * (b + 1));
    return k;
}

/// Seed of replication `rep` under a master seed.
constexpr std::uint64_t replication_seed(std::uint64_t master, std::uint64_t rep) noexcept {
    return derive_key(master, 0x5245504cULL, rep);
}

/// Counter-based random stream: the n-th output is mix64(key + n * golden).
///
/// Streams are cheap to create, so every site of a Harris system gets its own
/// stream keyed by (seed, site). Windows that overlap therefore share the
/// events on their common sites.
class Stream {
  public:
    using result_type = std::uint64_t;

    explicit constexpr Stream(std::uint64_t key) noexcept : key_(key) {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    constexpr result_type operator()() noexcept {
        ++counter_;
        return mix64(key_ + counter_ * 0x9e3779b97f4a7c15ULL);
    }

    /// Uniform on (0, 1], 53-bit resolution.
    double uniform_open0() noexcept {
        return static_cast<double>(((*this)() >> 11) + 1) * 0x1.0p-53;
    }

    /// Uniform on [0, 1).
    double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

    double exponential(double rate) noexcept;

    /// Standard normal via Box-Muller (one output per call, the sine branch is dropped).
    double normal() noexcept;

    /// Uniform integer on [0, n).
    std::uint64_t below(std::uint64_t n) noexcept;

    std::uint64_t counter() const noexcept { return counter_; }

  private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace cil
