#include "cil/rng.hpp"

#include <cmath>
#include <numbers>

namespace cil {

double Stream::exponential(double rate) noexcept { return -std::log(uniform_open0()) / rate; }

double Stream::normal() noexcept {
    const double u1 = uniform_open0();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Stream::below(std::uint64_t n) noexcept {
    // Lemire's multiply-shift with rejection.
    while (true) {
        const unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
        const auto low = static_cast<std::uint64_t>(m);
        if (low >= n || low >= (0 - n) % n) {
            return static_cast<std::uint64_t>(m >> 64);
        }
    }
}

} // namespace cil
