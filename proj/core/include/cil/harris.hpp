#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cil {

using Site = std::int32_t;

/// Birth rate per ordered pair and interaction radius. Death rate is 1.
struct Rates {
    double lambda = 2.0;
    int range = 1;

    static constexpr double death = 1.0;

    void validate() const;
    friend bool operator==(const Rates&, const Rates&) = default;
};

/// Finite space-time box [x_min, x_max] x [0, t_max].
struct Window {
    Site x_min = 0;
    Site x_max = 0;
    double t_max = 1.0;

    void validate() const;
    std::size_t sites() const noexcept { return static_cast<std::size_t>(x_max - x_min) + 1; }
    bool contains(Site x) const noexcept { return x >= x_min && x <= x_max; }
    friend bool operator==(const Window&, const Window&) = default;
};

/// Event times live on a dyadic grid so that reversal, restriction and shifts
/// are exact in double arithmetic. Horizons are bounded by kMaxHorizon.
inline constexpr double kTimeQuantum = 0x1.0p-40;
inline constexpr double kMaxHorizon = 4096.0;

/// Rounds a time to the nearest grid point.
double quantize_time(double t);

enum class EventKind : std::uint8_t { recovery = 0, arrow = 1 };

/// One Poisson arrival. For a recovery, target == source.
struct Event {
    double time = 0.0;
    Site source = 0;
    Site target = 0;
    EventKind kind = EventKind::recovery;

    static Event recovery(Site x, double t) { return {t, x, x, EventKind::recovery}; }
    static Event arrow(Site from, Site to, double t) { return {t, from, to, EventKind::arrow}; }

    bool is_recovery() const noexcept { return kind == EventKind::recovery; }
    friend bool operator==(const Event&, const Event&) = default;
};

/// A Harris system restricted to a finite window.
///
/// Recoveries are sampled at window sites. Arrows are sampled for every
/// ordered pair (x, y), 0 < |x - y| <= R, with at least one endpoint in the
/// window. Pairs with both endpoints inside are `arrows()`; pairs with one
/// endpoint outside are `boundary_arrows()` and only matter under a frozen
/// boundary. All events are kept in one time-sorted list with distinct times.
class HarrisWindow {
  public:
    HarrisWindow(Rates rates, Window window, std::vector<Event> events, std::uint64_t seed = 0);

    const Rates& rates() const noexcept { return rates_; }
    const Window& window() const noexcept { return window_; }
    std::uint64_t seed() const noexcept { return seed_; }

    /// Every event, ascending by time.
    std::span<const Event> events() const noexcept { return events_; }

    std::vector<Event> recoveries() const;
    std::vector<Event> arrows() const;
    std::vector<Event> boundary_arrows() const;

    /// Index of the first event with time > t.
    std::size_t first_after(double t) const;

    bool is_interior(const Event& e) const noexcept {
        return window_.contains(e.source) && window_.contains(e.target);
    }

    friend bool operator==(const HarrisWindow&, const HarrisWindow&) = default;

    /// Skips validation; for transforms of an already valid system.
    struct TrustedTag {};
    static constexpr TrustedTag trusted{};
    HarrisWindow(TrustedTag, Rates rates, Window window, std::vector<Event> events, std::uint64_t seed);

  private:
    Rates rates_;
    Window window_;
    std::vector<Event> events_;
    std::uint64_t seed_ = 0;
};

/// Samples independent Poisson processes: rate 1 recoveries per site, rate
/// lambda arrows per ordered pair. Deterministic in (rates, window, seed).
/// The processes attached to a site (its recoveries and its outgoing arrows)
/// are drawn as one marked Poisson stream keyed by (seed, site), so two
/// windows sampled with the same seed agree on every event they share.
HarrisWindow sample_window(const Rates& rates, const Window& window, std::uint64_t seed);

/// Events with time in [t0, t1], re-based so t0 becomes 0. Horizon t1 - t0.
HarrisWindow restrict(const HarrisWindow& h, double t0, double t1);

/// Events (x, s) with s >= t map to (x + z, s - t). The output window is the
/// translated input window, optionally intersected with `crop`.
HarrisWindow shift(const HarrisWindow& h, Site z, double t,
                   const std::optional<Window>& crop = std::nullopt);

/// Reverses time on [0, t] and the direction of every arrow.
HarrisWindow reverse(const HarrisWindow& h, double t);

// Serialization. Both formats carry a version and round-trip bit-exactly.
std::string to_json(const HarrisWindow& h);
HarrisWindow harris_from_json(const std::string& text);
void write_binary(std::ostream& out, const HarrisWindow& h);
HarrisWindow read_binary(std::istream& in);

} // namespace cil
