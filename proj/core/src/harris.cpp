#include "cil/harris.hpp"

#include "cil/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

namespace cil {

void Rates::validate() const {
    if (!(lambda > 0.0) || !std::isfinite(lambda)) {
        throw std::invalid_argument("lambda must be a positive finite number, got " + std::to_string(lambda));
    }
    if (range < 1) {
        throw std::invalid_argument("range must be >= 1, got " + std::to_string(range));
    }
}

void Window::validate() const {
    if (x_min > x_max) {
        throw std::invalid_argument("window requires x_min <= x_max");
    }
    if (!(t_max > 0.0) || t_max > kMaxHorizon) {
        throw std::invalid_argument("window horizon must lie in (0, " + std::to_string(kMaxHorizon) +
                                    "], got " + std::to_string(t_max));
    }
}

double quantize_time(double t) { return std::nearbyint(t / kTimeQuantum) * kTimeQuantum; }

namespace {

bool time_order(const Event& a, const Event& b) {
    if (a.time != b.time) return a.time < b.time;
    if (a.kind != b.kind) return a.kind < b.kind;
    if (a.source != b.source) return a.source < b.source;
    return a.target < b.target;
}

std::uint64_t site_word(Site x) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(x)); }

bool touches(const Window& w, const Event& e) { return w.contains(e.source) || w.contains(e.target); }

void check_event(const Rates& rates, const Window& w, const Event& e) {
    if (!(e.time >= 0.0) || e.time > w.t_max) {
        throw std::invalid_argument("event time " + std::to_string(e.time) + " outside [0, t_max]");
    }
    if (e.is_recovery()) {
        if (e.source != e.target || !w.contains(e.source)) {
            throw std::invalid_argument("recovery at site " + std::to_string(e.source) + " outside window");
        }
        return;
    }
    const auto gap = std::abs(static_cast<long>(e.source) - static_cast<long>(e.target));
    if (gap == 0 || gap > rates.range) {
        throw std::invalid_argument("arrow " + std::to_string(e.source) + "->" + std::to_string(e.target) +
                                    " violates 0 < |x-y| <= R");
    }
    if (!touches(w, e)) {
        throw std::invalid_argument("arrow with no endpoint in window");
    }
}

// Ties have probability zero in the continuum but can occur on the grid.
// The later event (in the deterministic tie order) moves up by one quantum.
void separate_ties(std::vector<Event>& events, double t_max) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < events.size(); ++i) {
        Event e = events[i];
        if (out > 0 && e.time <= events[out - 1].time) {
            e.time = events[out - 1].time + kTimeQuantum;
            if (e.time > t_max) continue;
        }
        events[out++] = e;
    }
    events.resize(out);
}

// All processes keyed at one site, superposed: recoveries at rate 1 when the
// site is in the window, arrows at rate lambda per offset. Marks are drawn from
// the same stream, so the events of a site do not depend on the window.
struct SiteClock {
    Stream stream;
    Site site;
    double next = 0.0;

    void advance(double total_rate) { next += stream.exponential(total_rate); }
};

// Counting sort on a fine time grid, then insertion sort to finish; the slab
// is almost sorted after the first pass.
void sort_slab(std::vector<Event>& events, std::size_t begin, double t0, double width, std::vector<Event>& scratch) {
    constexpr std::size_t kBuckets = 512;
    const std::size_t n = events.size() - begin;
    if (n < 2) return;
    std::array<std::uint32_t, kBuckets + 1> start{};
    auto bucket = [&](const Event& e) {
        const auto b = static_cast<std::ptrdiff_t>((e.time - t0) * (kBuckets / width));
        return static_cast<std::size_t>(std::clamp<std::ptrdiff_t>(b, 0, kBuckets - 1));
    };
    for (std::size_t i = begin; i < events.size(); ++i) ++start[bucket(events[i]) + 1];
    for (std::size_t b = 1; b <= kBuckets; ++b) start[b] += start[b - 1];
    scratch.resize(n);
    for (std::size_t i = begin; i < events.size(); ++i) scratch[start[bucket(events[i])]++] = events[i];
    for (std::size_t i = 1; i < n; ++i) {
        const Event e = scratch[i];
        std::size_t j = i;
        while (j > 0 && time_order(e, scratch[j - 1])) {
            scratch[j] = scratch[j - 1];
            --j;
        }
        scratch[j] = e;
    }
    std::copy(scratch.begin(), scratch.end(), events.begin() + static_cast<std::ptrdiff_t>(begin));
}

} // namespace

HarrisWindow::HarrisWindow(Rates rates, Window window, std::vector<Event> events, std::uint64_t seed)
    : rates_(rates), window_(window), events_(std::move(events)), seed_(seed) {
    rates_.validate();
    window_.validate();
    window_.t_max = quantize_time(window_.t_max);
    for (auto& e : events_) {
        e.time = quantize_time(e.time);
        check_event(rates_, window_, e);
    }
    if (!std::is_sorted(events_.begin(), events_.end(), time_order)) {
        std::sort(events_.begin(), events_.end(), time_order);
    }
    for (std::size_t i = 1; i < events_.size(); ++i) {
        if (events_[i].time == events_[i - 1].time) {
            throw std::invalid_argument("event times must be pairwise distinct (tie at " +
                                        std::to_string(events_[i].time) + ")");
        }
    }
}

HarrisWindow::HarrisWindow(TrustedTag, Rates rates, Window window, std::vector<Event> events, std::uint64_t seed)
    : rates_(rates), window_(window), events_(std::move(events)), seed_(seed) {}

std::vector<Event> HarrisWindow::recoveries() const {
    std::vector<Event> out;
    std::copy_if(events_.begin(), events_.end(), std::back_inserter(out),
                 [](const Event& e) { return e.is_recovery(); });
    return out;
}

std::vector<Event> HarrisWindow::arrows() const {
    std::vector<Event> out;
    std::copy_if(events_.begin(), events_.end(), std::back_inserter(out),
                 [this](const Event& e) { return !e.is_recovery() && is_interior(e); });
    return out;
}

std::vector<Event> HarrisWindow::boundary_arrows() const {
    std::vector<Event> out;
    std::copy_if(events_.begin(), events_.end(), std::back_inserter(out),
                 [this](const Event& e) { return !e.is_recovery() && !is_interior(e); });
    return out;
}

std::size_t HarrisWindow::first_after(double t) const {
    const auto it = std::upper_bound(events_.begin(), events_.end(), t,
                                     [](double value, const Event& e) { return value < e.time; });
    return static_cast<std::size_t>(it - events_.begin());
}

HarrisWindow sample_window(const Rates& rates, const Window& window, std::uint64_t seed) {
    rates.validate();
    window.validate();
    const double t_max = quantize_time(window.t_max);
    const int offsets = 2 * rates.range;
    const double total_rate = Rates::death + offsets * rates.lambda;
    const double p_recovery = Rates::death / total_rate;
    const double offset_scale = offsets / (1.0 - p_recovery);

    std::vector<SiteClock> clocks;
    for (Site x = window.x_min - rates.range; x <= window.x_max + rates.range; ++x) {
        SiteClock c{Stream(derive_key(seed, site_word(x))), x};
        c.advance(total_rate);
        clocks.push_back(c);
    }

    std::vector<Event> events;
    events.reserve(static_cast<std::size_t>(total_rate * t_max * static_cast<double>(window.sites()) * 1.05) + 64);

    std::vector<Event> scratch;
    // Emit in slabs of kSlab time units, each sorted in place while hot in cache.
    constexpr double kSlab = 0.25;
    for (double slab_end = kSlab; slab_end - kSlab < t_max; slab_end += kSlab) {
        const std::size_t slab_begin = events.size();
        for (auto& c : clocks) {
            while (c.next < slab_end && c.next <= t_max) {
                const double t = std::max(quantize_time(c.next), kTimeQuantum);
                const double u = c.stream.uniform();
                if (u < p_recovery) {
                    if (window.contains(c.site)) events.push_back(Event::recovery(c.site, t));
                } else {
                    // Reuse u: given u >= p_recovery it is uniform on [p_recovery, 1).
                    const int k = std::min(offsets - 1, static_cast<int>((u - p_recovery) * offset_scale));
                    const int d = k < rates.range ? k - rates.range : k - rates.range + 1;
                    const Event e = Event::arrow(c.site, c.site + d, t);
                    if (touches(window, e)) events.push_back(e);
                }
                c.advance(total_rate);
            }
        }
        sort_slab(events, slab_begin, slab_end - kSlab, kSlab, scratch);
    }
    separate_ties(events, t_max);
    return HarrisWindow(HarrisWindow::trusted, rates, Window{window.x_min, window.x_max, t_max}, std::move(events),
                        seed);
}

HarrisWindow restrict(const HarrisWindow& h, double t0, double t1) {
    t0 = quantize_time(t0);
    t1 = quantize_time(t1);
    if (!(t0 >= 0.0) || !(t1 > t0) || t1 > h.window().t_max) {
        throw std::out_of_range("restrict requires 0 <= t0 < t1 <= t_max");
    }
    std::vector<Event> out;
    const auto all = h.events();
    auto it = std::lower_bound(all.begin(), all.end(), t0,
                               [](const Event& e, double value) { return e.time < value; });
    for (; it != all.end() && it->time <= t1; ++it) {
        Event e = *it;
        e.time -= t0;
        out.push_back(e);
    }
    Window w = h.window();
    w.t_max = t1 - t0;
    return HarrisWindow(HarrisWindow::trusted, h.rates(), w, std::move(out), h.seed());
}

HarrisWindow shift(const HarrisWindow& h, Site z, double t, const std::optional<Window>& crop) {
    t = quantize_time(t);
    if (!(t >= 0.0) || t >= h.window().t_max) {
        throw std::out_of_range("shift requires 0 <= t < t_max");
    }
    Window w{h.window().x_min + z, h.window().x_max + z, h.window().t_max - t};
    if (crop) {
        w.x_min = std::max(w.x_min, crop->x_min);
        w.x_max = std::min(w.x_max, crop->x_max);
        if (w.x_min > w.x_max) {
            throw std::invalid_argument("shift leaves an empty spatial window");
        }
    }
    std::vector<Event> out;
    const auto all = h.events();
    auto it = std::lower_bound(all.begin(), all.end(), t,
                               [](const Event& e, double value) { return e.time < value; });
    for (; it != all.end(); ++it) {
        Event e = *it;
        e.time -= t;
        e.source += z;
        e.target += z;
        if (touches(w, e)) out.push_back(e);
    }
    return HarrisWindow(HarrisWindow::trusted, h.rates(), w, std::move(out), h.seed());
}

HarrisWindow reverse(const HarrisWindow& h, double t) {
    t = quantize_time(t);
    if (!(t > 0.0) || t > h.window().t_max) {
        throw std::out_of_range("reverse requires 0 < t <= t_max");
    }
    const auto all = h.events();
    const std::size_t end = h.first_after(t);
    std::vector<Event> out;
    out.reserve(end);
    for (std::size_t i = end; i-- > 0;) {
        Event e = all[i];
        e.time = t - e.time;
        std::swap(e.source, e.target);
        out.push_back(e);
    }
    Window w = h.window();
    w.t_max = t;
    return HarrisWindow(HarrisWindow::trusted, h.rates(), w, std::move(out), h.seed());
}

} // namespace cil
