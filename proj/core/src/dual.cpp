#include "cil/dual.hpp"

#include "cil/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace cil {

namespace {

std::size_t index_of(const Window& w, Site x) { return static_cast<std::size_t>(x - w.x_min); }

void check_grid(std::span<const double> grid, double t_max) {
    if (grid.empty()) throw std::invalid_argument("time grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!(grid[i] >= 0.0) || grid[i] > t_max) throw std::invalid_argument("grid time outside [0, t_max]");
        if (i > 0 && !(grid[i] > grid[i - 1])) throw std::invalid_argument("time grid must be increasing");
    }
}

} // namespace

ReachTable::ReachTable(Window window, double horizon, std::vector<std::vector<double>> flips)
    : window_(window), horizon_(horizon), flips_(std::move(flips)) {
    if (flips_.size() != window_.sites()) throw std::invalid_argument("reach table: one flip list per site");
    for (const auto& f : flips_) {
        if (!std::is_sorted(f.begin(), f.end())) throw std::invalid_argument("reach table: flips must be sorted");
    }
}

bool ReachTable::contains(Site y, double s) const {
    if (!window_.contains(y)) return false;
    const auto& f = flips_[index_of(window_, y)];
    const auto later = f.end() - std::upper_bound(f.begin(), f.end(), s);
    return later % 2 == 0;
}

std::optional<double> ReachTable::next_flip(Site y, double s) const {
    if (!window_.contains(y)) return std::nullopt;
    const auto& f = flips_[index_of(window_, y)];
    const auto it = std::upper_bound(f.begin(), f.end(), s);
    if (it == f.end()) return std::nullopt;
    return *it;
}

std::span<const double> ReachTable::flips(Site y) const {
    if (!window_.contains(y)) throw std::out_of_range("reach table: site outside window");
    return flips_[index_of(window_, y)];
}

std::vector<Site> ReachTable::members(double s) const {
    std::vector<Site> out;
    for (Site y = window_.x_min; y <= window_.x_max; ++y) {
        if (contains(y, s)) out.push_back(y);
    }
    return out;
}

ReachTable reach_sweep(const HarrisWindow& h, double horizon) {
    horizon = quantize_time(horizon);
    if (!(horizon >= 0.0) || horizon > h.window().t_max) {
        throw std::out_of_range("reach_sweep: horizon outside [0, t_max]");
    }
    const Window& w = h.window();
    std::vector<std::uint8_t> in(w.sites(), 1);
    std::vector<std::vector<double>> flips(w.sites());
    const auto events = h.events();
    for (std::size_t i = h.first_after(horizon); i-- > 0;) {
        const Event& e = events[i];
        if (e.time <= 0.0) break;
        if (!h.is_interior(e)) continue;
        if (e.is_recovery()) {
            const auto z = index_of(w, e.target);
            if (in[z]) {
                in[z] = 0;
                flips[z].push_back(e.time);
            }
        } else {
            const auto a = index_of(w, e.source);
            if (in[index_of(w, e.target)] && !in[a]) {
                in[a] = 1;
                flips[a].push_back(e.time);
            }
        }
    }
    for (auto& f : flips) std::reverse(f.begin(), f.end());
    return ReachTable(w, horizon, std::move(flips));
}

std::optional<Site> AncestorPath::at(double s) const {
    if (s < origin.t) throw std::out_of_range("ancestor path queried before its origin");
    if (death && s >= *death) return std::nullopt;
    const auto k = std::upper_bound(jump_times.begin(), jump_times.end(), s) - jump_times.begin();
    return positions[static_cast<std::size_t>(k)];
}

void AncestorPath::write_csv(std::ostream& out) const {
    out << "s,position\n";
    out.precision(17);
    out << origin.t << ',' << positions.front() << '\n';
    for (std::size_t k = 0; k < jump_times.size(); ++k) out << jump_times[k] << ',' << positions[k + 1] << '\n';
    if (death) out << *death << ",dead\n";
}

namespace {

// Lazy trace of a reaching origin against reach.horizon().
AncestorPath trace(const HarrisWindow& h, const ReachTable& reach, Site x, double r) {
    AncestorPath path;
    path.origin = {x, r};
    path.horizon = reach.horizon();
    path.positions.push_back(x);
    Site c = x;
    const auto events = h.events();
    for (std::size_t i = h.first_after(r); i < events.size() && events[i].time <= reach.horizon(); ++i) {
        const Event& e = events[i];
        if (!h.is_interior(e)) continue;
        if (e.is_recovery()) {
            if (e.target == c) {
                path.death = e.time;
                break;
            }
        } else if (e.source == c && !reach.contains(c, e.time) && reach.contains(e.target, e.time)) {
            c = e.target;
            path.jump_times.push_back(e.time);
            path.positions.push_back(c);
        }
    }
    return path;
}

} // namespace

AncestorPath ancestor_path(const HarrisWindow& h, const ReachTable& reach, Site x, double r) {
    r = quantize_time(r);
    if (!h.window().contains(x)) throw std::out_of_range("ancestor_path: origin outside window");
    if (!(r >= 0.0) || !(r < reach.horizon())) throw std::out_of_range("ancestor_path: need 0 <= r < horizon");
    if (reach.contains(x, r)) return trace(h, reach, x, r);

    // No path reaches the horizon: trace against the last instant before death.
    const Site start[] = {x};
    const auto death = survival_time(h, start, r);
    if (!death || *death > reach.horizon()) throw std::logic_error("ancestor_path: reach table and sweep disagree");
    AncestorPath path = trace(h, reach_sweep(h, *death - kTimeQuantum), x, r);
    path.horizon = reach.horizon();
    path.death = *death;
    return path;
}

AncestorPath ancestor_path(const HarrisWindow& h, Site x, double r, double horizon) {
    return ancestor_path(h, reach_sweep(h, horizon), x, r);
}

AncestorProcess::AncestorProcess(const Window& window, Site x)
    : window_(window), prev_(window.sites(), -1), next_(window.sites(), -1), rank_(window.sites(), 0),
      live_mask_(window.sites(), 0) {
    if (!window.contains(x)) throw std::out_of_range("ancestor process: origin outside window");
    head_ = static_cast<std::int32_t>(index_of(window, x));
    live_mask_[static_cast<std::size_t>(head_)] = 1;
    rank_[static_cast<std::size_t>(head_)] = std::uint64_t{1} << 63;
    live_ = 1;
}

std::optional<Site> AncestorProcess::position() const noexcept {
    if (head_ < 0) return std::nullopt;
    return window_.x_min + head_;
}

void AncestorProcess::unlink(std::int32_t b) {
    const auto ub = static_cast<std::size_t>(b);
    const std::int32_t p = prev_[ub];
    const std::int32_t n = next_[ub];
    if (p >= 0) {
        next_[static_cast<std::size_t>(p)] = n;
    } else {
        head_ = n;
    }
    if (n >= 0) prev_[static_cast<std::size_t>(n)] = p;
    prev_[ub] = -1;
    next_[ub] = -1;
}

void AncestorProcess::relabel() {
    std::size_t count = 0;
    for (std::int32_t i = head_; i >= 0; i = next_[static_cast<std::size_t>(i)]) ++count;
    const std::uint64_t step = std::numeric_limits<std::uint64_t>::max() / (count + 2);
    std::uint64_t label = step;
    for (std::int32_t i = head_; i >= 0; i = next_[static_cast<std::size_t>(i)]) {
        rank_[static_cast<std::size_t>(i)] = label;
        label += step;
    }
}

void AncestorProcess::link_after(std::int32_t a, std::int32_t b) {
    const auto ua = static_cast<std::size_t>(a);
    auto gap_ends = [&] {
        const std::int32_t n = next_[ua];
        const std::uint64_t hi = n >= 0 ? rank_[static_cast<std::size_t>(n)] : std::numeric_limits<std::uint64_t>::max();
        return std::pair{rank_[ua], hi};
    };
    auto [lo, hi] = gap_ends();
    if (hi - lo < 2) {
        relabel();
        std::tie(lo, hi) = gap_ends();
    }
    const auto ub = static_cast<std::size_t>(b);
    const std::int32_t n = next_[ua];
    rank_[ub] = lo + (hi - lo) / 2;
    prev_[ub] = a;
    next_[ub] = n;
    next_[ua] = b;
    if (n >= 0) prev_[static_cast<std::size_t>(n)] = b;
}

bool AncestorProcess::apply(const Event& e) {
    if (head_ < 0 || !window_.contains(e.source) || !window_.contains(e.target)) return false;
    const auto b = static_cast<std::int32_t>(index_of(window_, e.target));
    const auto ub = static_cast<std::size_t>(b);
    if (e.is_recovery()) {
        if (!live_mask_[ub]) return false;
        const std::int32_t old_head = head_;
        unlink(b);
        live_mask_[ub] = 0;
        --live_;
        return head_ != old_head;
    }
    const auto a = static_cast<std::int32_t>(index_of(window_, e.source));
    if (!live_mask_[static_cast<std::size_t>(a)]) return false;
    if (live_mask_[ub]) {
        if (rank_[static_cast<std::size_t>(a)] < rank_[ub]) {
            unlink(b);
            link_after(a, b);
        }
    } else {
        live_mask_[ub] = 1;
        ++live_;
        link_after(a, b);
    }
    return false;
}

AncestorPath ancestor_process(const HarrisWindow& h, Site x, double r, double horizon) {
    r = quantize_time(r);
    horizon = quantize_time(horizon);
    if (!(r >= 0.0) || !(r < horizon) || horizon > h.window().t_max) {
        throw std::out_of_range("ancestor_process: need 0 <= r < horizon <= t_max");
    }
    AncestorProcess proc(h.window(), x);
    AncestorPath path;
    path.origin = {x, r};
    path.horizon = horizon;
    path.positions.push_back(x);
    const auto events = h.events();
    for (std::size_t i = h.first_after(r); i < events.size() && events[i].time <= horizon; ++i) {
        if (!proc.apply(events[i])) continue;
        const auto pos = proc.position();
        if (!pos) {
            path.death = events[i].time;
            break;
        }
        path.jump_times.push_back(events[i].time);
        path.positions.push_back(*pos);
    }
    return path;
}

AncestorMap::AncestorMap(Site x_min, std::vector<std::optional<Site>> values)
    : x_min_(x_min), values_(std::move(values)) {}

std::optional<Site> AncestorMap::at(Site x) const {
    if (x < x_min_ || x >= x_min_ + static_cast<Site>(values_.size())) {
        throw std::out_of_range("ancestor map: site outside window");
    }
    return values_[static_cast<std::size_t>(x - x_min_)];
}

AncestorMap ancestor_map(const HarrisWindow& h, double t) {
    const Window& w = h.window();
    if (!(t >= 0.0) || t > w.t_max) throw std::out_of_range("ancestor_map: t outside [0, t_max]");
    std::vector<std::optional<Site>> out(w.sites());
    if (quantize_time(t) == 0.0) {
        for (Site x = w.x_min; x <= w.x_max; ++x) out[index_of(w, x)] = x;
        return AncestorMap(w.x_min, std::move(out));
    }
    const auto labels = Configuration::fully_labeled(w.x_min, w.x_max);
    const auto final = evolve_labeled(reverse(h, t), labels);
    for (Site x = w.x_min; x <= w.x_max; ++x) {
        const State v = final[x];
        if (v != 0) out[index_of(w, x)] = labels.site_of_label(v);
    }
    return AncestorMap(w.x_min, std::move(out));
}

std::vector<std::pair<double, double>> RenewalRecord::increments(std::size_t first_block) const {
    std::vector<std::pair<double, double>> out;
    for (std::size_t k = first_block; k + 1 < tau.size(); ++k) {
        out.emplace_back(tau[k + 1] - tau[k], static_cast<double>(position[k + 1] - position[k]));
    }
    return out;
}

RenewalRecord renewal_times(const AncestorPath& path, const ReachTable& reach, double guard) {
    if (!(guard >= 0.0)) throw std::invalid_argument("renewal_times: guard must be nonnegative");
    const double limit = reach.horizon() - guard;
    if (path.death && *path.death < limit) {
        throw std::invalid_argument("renewal_times: path dies before horizon - guard");
    }
    RenewalRecord rec;
    rec.guard = guard;
    rec.tau.push_back(path.origin.t);
    rec.position.push_back(path.positions.front());
    constexpr double kNever = std::numeric_limits<double>::infinity();
    double s = path.origin.t + 1.0;
    while (s <= limit) {
        const auto pos = path.at(s);
        if (!pos) break;
        if (reach.contains(*pos, s)) {
            if (s - rec.tau.back() < 1.0) throw std::logic_error("renewal spacing below 1");
            rec.tau.push_back(s);
            rec.position.push_back(*pos);
            s += 1.0;
            continue;
        }
        // Membership can only change at the next jump of the path or the next flip of its site.
        const auto jump = std::upper_bound(path.jump_times.begin(), path.jump_times.end(), s);
        const double next_jump = jump == path.jump_times.end() ? kNever : *jump;
        const double next_flip = reach.next_flip(*pos, s).value_or(kNever);
        s = std::min(next_jump, next_flip);
    }
    return rec;
}

SigmaEstimate estimate_sigma(const std::vector<RenewalRecord>& records, int resamples, std::uint64_t seed) {
    struct Sums {
        double n = 0, dtau = 0, deta = 0, deta2 = 0;
    };
    std::vector<Sums> per(records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        for (const auto& [dt, de] : records[i].increments()) {
            if (dt < 1.0) throw std::logic_error("renewal spacing below 1");
            per[i].n += 1;
            per[i].dtau += dt;
            per[i].deta += de;
            per[i].deta2 += de * de;
        }
    }
    auto sigma_of = [&](auto&& indices) {
        Sums s;
        for (std::size_t i : indices) {
            s.n += per[i].n;
            s.dtau += per[i].dtau;
            s.deta += per[i].deta;
            s.deta2 += per[i].deta2;
        }
        if (s.n < 2) return 0.0;
        const double var = std::max(0.0, (s.deta2 - s.deta * s.deta / s.n) / (s.n - 1));
        return std::sqrt(var / (s.dtau / s.n));
    };

    std::vector<std::size_t> all(records.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    SigmaEstimate est;
    for (const auto& p : per) {
        est.n_increments += static_cast<std::size_t>(p.n);
        est.mean_dtau += p.dtau;
    }
    if (est.n_increments < 100) throw std::invalid_argument("estimate_sigma: need at least 100 increments");
    est.mean_dtau /= static_cast<double>(est.n_increments);
    est.mu_hat = 1.0 / est.mean_dtau;
    est.sigma_hat = sigma_of(all);
    const auto [lo, hi] = bootstrap_indices(
        records.size(), [&](std::span<const std::size_t> idx) { return sigma_of(idx); }, 0.95, resamples, seed);
    // A percentile interval need not contain the plug-in value; widen if so.
    est.ci_low = std::min(lo, est.sigma_hat);
    est.ci_high = std::max(hi, est.sigma_hat);
    return est;
}

int DualWindow::half_width(double horizon) const {
    return floor + static_cast<int>(std::ceil(c_sqrt * std::sqrt(std::max(horizon, 0.0))));
}

std::vector<bool> pair_distinct(const HarrisWindow& h, Site x, Site y, std::span<const double> t_grid) {
    check_grid(t_grid, h.window().t_max);
    std::vector<bool> out(t_grid.size(), false);
    if (x == y) return out;
    AncestorProcess px(h.window(), x);
    AncestorProcess py(h.window(), y);
    const auto events = h.events();
    std::size_t i = h.first_after(0.0);
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        for (; i < events.size() && events[i].time <= t_grid[k]; ++i) {
            px.apply(events[i]);
            py.apply(events[i]);
        }
        const auto a = px.position();
        const auto b = py.position();
        out[k] = a && b && *a != *b;
    }
    return out;
}

std::vector<bool> probe_survives(const HarrisWindow& p, std::span<const Site> probe, std::span<const double> t_grid) {
    check_grid(t_grid, p.window().t_max);
    if (probe.empty()) throw std::invalid_argument("probe_survives: empty probe");
    const Window& w = p.window();
    std::vector<State> states(w.sites(), 2);
    for (Site x : probe) {
        if (!w.contains(x)) throw std::out_of_range("probe_survives: probe outside window");
        states[index_of(w, x)] = 1;
    }
    Evolver ev(p, Configuration(w.x_min, std::move(states), Alphabet::multitype), BoundaryPolicy::vacant);
    std::vector<bool> out(t_grid.size());
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        ev.advance_to(t_grid[k]);
        const auto s = ev.state().states();
        out[k] = std::find(s.begin(), s.end(), 1) != s.end();
    }
    return out;
}

bool crossed(const HarrisWindow& h, Site x, Site y, double gap, double t) {
    if (!(t >= 0.0) || t > h.window().t_max) throw std::out_of_range("crossed: t outside [0, t_max]");
    AncestorProcess px(h.window(), x);
    AncestorProcess py(h.window(), y);
    auto apart = [&] {
        const auto a = px.position();
        const auto b = py.position();
        return a && b && static_cast<double>(*a) > static_cast<double>(*b) + gap;
    };
    if (apart()) return true;
    const auto events = h.events();
    for (std::size_t i = h.first_after(0.0); i < events.size() && events[i].time <= t; ++i) {
        const bool moved_x = px.apply(events[i]);
        const bool moved_y = py.apply(events[i]);
        if ((moved_x || moved_y) && apart()) return true;
        if (!px.position() || !py.position()) return false;
    }
    return false;
}

namespace {

void check_reps(int reps) {
    if (reps < 100) throw std::invalid_argument("Monte Carlo statistics need reps >= 100");
}

Window dual_window(Site lo, Site hi, double horizon, const DualWindow& dw) {
    const int half = dw.half_width(horizon);
    return Window{lo - half, hi + half, horizon};
}

Series proportions(std::span<const double> t_grid, const std::vector<std::size_t>& hits, std::size_t n) {
    Series out;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
        const auto [lo, hi] = clopper_pearson(hits[k], n);
        out.push_back({t_grid[k], static_cast<double>(hits[k]) / static_cast<double>(n), lo, hi, n});
    }
    return out;
}

} // namespace

Series pair_coalescence_stat(const Rates& rates, Site x, Site y, std::span<const double> t_grid, int reps,
                             std::uint64_t seed, const DualWindow& window) {
    check_reps(reps);
    const Window w = dual_window(std::min(x, y), std::max(x, y), t_grid.empty() ? 0.0 : t_grid.back(), window);
    check_grid(t_grid, w.t_max);
    std::vector<std::size_t> hits(t_grid.size(), 0);
    for (int rep = 0; rep < reps; ++rep) {
        const auto h = sample_window(rates, w, replication_seed(seed, static_cast<std::uint64_t>(rep)));
        const auto d = pair_distinct(h, x, y, t_grid);
        for (std::size_t k = 0; k < d.size(); ++k) hits[k] += d[k];
    }
    return proportions(t_grid, hits, static_cast<std::size_t>(reps));
}

Series density_stat(const Rates& rates, std::span<const double> t_grid, std::span<const Site> probe, int reps,
                    std::uint64_t seed, const DualWindow& window) {
    check_reps(reps);
    if (probe.empty()) throw std::invalid_argument("density_stat: empty probe");
    const auto [lo, hi] = std::minmax_element(probe.begin(), probe.end());
    const Window w = dual_window(*lo, *hi, t_grid.empty() ? 0.0 : t_grid.back(), window);
    check_grid(t_grid, w.t_max);
    std::vector<std::size_t> hits(t_grid.size(), 0);
    for (int rep = 0; rep < reps; ++rep) {
        const auto p = sample_window(rates, w, replication_seed(seed, static_cast<std::uint64_t>(rep)));
        const auto d = probe_survives(p, probe, t_grid);
        for (std::size_t k = 0; k < d.size(); ++k) hits[k] += d[k];
    }
    return proportions(t_grid, hits, static_cast<std::size_t>(reps));
}

SeriesPoint crossing_stat(const Rates& rates, Site x, Site y, double u, double t, int reps, std::uint64_t seed,
                          const DualWindow& window) {
    check_reps(reps);
    if (!(x < y)) throw std::invalid_argument("crossing_stat: need x < y");
    if (!(u > 0.0)) throw std::invalid_argument("crossing_stat: need u > 0");
    if (!(t > 0.0)) throw std::invalid_argument("crossing_stat: need t > 0");
    const Window w = dual_window(x, y, t, window);
    const double gap = u * std::sqrt(t);
    std::size_t hits = 0;
    for (int rep = 0; rep < reps; ++rep) {
        const auto h = sample_window(rates, w, replication_seed(seed, static_cast<std::uint64_t>(rep)));
        hits += crossed(h, x, y, gap, t);
    }
    const auto n = static_cast<std::size_t>(reps);
    const auto [lo, hi] = clopper_pearson(hits, n);
    return {t, static_cast<double>(hits) / static_cast<double>(n), lo, hi, n};
}

} // namespace cil
