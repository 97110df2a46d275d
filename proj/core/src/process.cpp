#include "cil/process.hpp"

#include "cil/rng.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <queue>
#include <unordered_map>
#include <unordered_set>

namespace cil {

std::string to_string(Alphabet a) {
    switch (a) {
    case Alphabet::one_type: return "one_type";
    case Alphabet::multitype: return "multitype";
    case Alphabet::labeled: return "labeled";
    }
    return "?";
}

Alphabet alphabet_from_string(const std::string& s) {
    if (s == "one_type") return Alphabet::one_type;
    if (s == "multitype") return Alphabet::multitype;
    if (s == "labeled") return Alphabet::labeled;
    throw std::invalid_argument("unknown alphabet '" + s + "'");
}

Configuration::Configuration(Site x_min, std::vector<State> states, Alphabet alphabet, State outside_left,
                             State outside_right)
    : x_min_(x_min), states_(std::move(states)), alphabet_(alphabet), outside_left_(outside_left),
      outside_right_(outside_right) {
    if (states_.empty()) {
        throw std::invalid_argument("configuration needs at least one site");
    }
    validate();
}

Configuration Configuration::heaviside(Site x_min, Site x_max, Site center) {
    if (x_min > x_max) throw std::invalid_argument("heaviside: x_min > x_max");
    std::vector<State> s(static_cast<std::size_t>(x_max - x_min) + 1);
    for (Site x = x_min; x <= x_max; ++x) {
        s[static_cast<std::size_t>(x - x_min)] = x <= center ? 1 : 2;
    }
    return Configuration(x_min, std::move(s), Alphabet::multitype, 1, 2);
}

Configuration Configuration::filled(Site x_min, Site x_max, State value, Alphabet alphabet) {
    if (x_min > x_max) throw std::invalid_argument("filled: x_min > x_max");
    return Configuration(x_min, std::vector<State>(static_cast<std::size_t>(x_max - x_min) + 1, value), alphabet,
                         value, value);
}

Configuration Configuration::fully_labeled(Site x_min, Site x_max) {
    if (x_min > x_max) throw std::invalid_argument("fully_labeled: x_min > x_max");
    std::vector<State> s(static_cast<std::size_t>(x_max - x_min) + 1);
    for (std::size_t i = 0; i < s.size(); ++i) s[i] = static_cast<State>(i + 1);
    return Configuration(x_min, std::move(s), Alphabet::labeled, 0, 0);
}

Configuration Configuration::occupancy() const {
    std::vector<State> s(states_.size());
    std::transform(states_.begin(), states_.end(), s.begin(), [](State v) { return v != 0 ? 1 : 0; });
    return Configuration(x_min_, std::move(s), Alphabet::one_type, outside_left_ != 0, outside_right_ != 0);
}

void Configuration::validate() const {
    auto ok = [this](State v) {
        switch (alphabet_) {
        case Alphabet::one_type: return v == 0 || v == 1;
        case Alphabet::multitype: return v >= 0 && v <= 2;
        case Alphabet::labeled: return v >= 0;
        }
        return false;
    };
    for (State v : states_) {
        if (!ok(v)) {
            throw std::invalid_argument("state " + std::to_string(v) + " outside the " + to_string(alphabet_) +
                                        " alphabet");
        }
    }
    if (!ok(outside_left_) || !ok(outside_right_)) {
        throw std::invalid_argument("boundary fill outside the " + to_string(alphabet_) + " alphabet");
    }
}

Trajectory::Trajectory(Configuration initial, std::vector<Delta> deltas, double horizon)
    : initial_(std::move(initial)), deltas_(std::move(deltas)), horizon_(horizon) {
    for (std::size_t i = 1; i < deltas_.size(); ++i) {
        if (!(deltas_[i].time > deltas_[i - 1].time)) {
            throw std::invalid_argument("trajectory deltas must have strictly increasing times");
        }
    }
}

Configuration Trajectory::state_at(double t) const {
    Configuration c = initial_;
    for (const auto& d : deltas_) {
        if (d.time > t) break;
        c.set(d.site, d.state);
    }
    return c;
}

void Trajectory::write_csv(std::ostream& out) const {
    out << "time,site,new_state\n";
    out.precision(17);
    for (const auto& d : deltas_) {
        out << d.time << ',' << d.site << ',' << d.state << '\n';
    }
}

Evolver::Evolver(const HarrisWindow& h, Configuration initial, BoundaryPolicy boundary)
    : h_(&h), state_(std::move(initial)), boundary_(boundary) {
    if (state_.x_min() != h.window().x_min || state_.x_max() != h.window().x_max) {
        throw std::invalid_argument("configuration does not cover the Harris window");
    }
    next_ = h.first_after(0.0);
}

void Evolver::advance_to(double t, std::vector<Delta>* log) {
    if (t < now_) throw std::invalid_argument("Evolver cannot move backwards in time");
    const auto events = h_->events();
    const Site lo = state_.x_min();
    const Site hi = state_.x_max();
    const bool frozen = boundary_ == BoundaryPolicy::frozen;
    const State fill_left = frozen ? state_.outside_left() : 0;
    const State fill_right = frozen ? state_.outside_right() : 0;
    while (next_ < events.size() && events[next_].time <= t) {
        const Event& e = events[next_++];
        if (e.target < lo || e.target > hi) continue;
        const State cur = state_[e.target];
        State updated = cur;
        if (e.is_recovery()) {
            updated = 0;
        } else if (cur == 0) {
            updated = e.source < lo ? fill_left : e.source > hi ? fill_right : state_[e.source];
        }
        if (updated != cur) {
            state_.set(e.target, updated);
            if (log) log->push_back({e.time, e.target, updated});
        }
    }
    now_ = t;
}

namespace {

Trajectory run(const HarrisWindow& h, const Configuration& start, BoundaryPolicy boundary) {
    Evolver ev(h, start, boundary);
    std::vector<Delta> log;
    ev.advance_to(h.window().t_max, &log);
    return Trajectory(start, std::move(log), h.window().t_max);
}

void require_alphabet(const Configuration& c, Alphabet a, const char* op) {
    if (c.alphabet() != a) {
        throw std::invalid_argument(std::string(op) + " expects a " + to_string(a) + " configuration, got " +
                                    to_string(c.alphabet()));
    }
}

} // namespace

Trajectory evolve_onetype(const HarrisWindow& h, const Configuration& zeta0, BoundaryPolicy boundary) {
    require_alphabet(zeta0, Alphabet::one_type, "evolve_onetype");
    return run(h, zeta0, boundary);
}

Trajectory evolve_multitype(const HarrisWindow& h, const Configuration& xi0, BoundaryPolicy boundary) {
    require_alphabet(xi0, Alphabet::multitype, "evolve_multitype");
    return run(h, xi0, boundary);
}

Configuration evolve_labeled(const HarrisWindow& h, const Configuration& labels0) {
    require_alphabet(labels0, Alphabet::labeled, "evolve_labeled");
    std::unordered_set<State> seen;
    for (State v : labels0.states()) {
        if (v == 0) continue;
        if (!seen.insert(v).second) {
            throw std::invalid_argument("evolve_labeled: duplicate label " + std::to_string(v));
        }
    }
    Evolver ev(h, labels0, BoundaryPolicy::vacant);
    ev.advance_to(h.window().t_max);
    return ev.state();
}

std::vector<std::uint8_t> reachable_set(const HarrisWindow& h, std::span<const Site> from, double t0, double t1) {
    const Window& w = h.window();
    if (!(t0 >= 0.0) || t1 < t0 || t1 > w.t_max) {
        throw std::invalid_argument("reachable: need 0 <= from-time <= to-time <= t_max");
    }
    std::vector<std::uint8_t> live(w.sites(), 0);
    std::size_t alive = 0;
    for (Site x : from) {
        if (!w.contains(x)) throw std::out_of_range("reachable: start site outside window");
        auto& slot = live[static_cast<std::size_t>(x - w.x_min)];
        alive += slot == 0;
        slot = 1;
    }
    const auto events = h.events();
    for (std::size_t i = h.first_after(t0); i < events.size() && alive > 0; ++i) {
        const Event& e = events[i];
        if (e.time > t1) break;
        if (!h.is_interior(e)) continue;
        auto& tgt = live[static_cast<std::size_t>(e.target - w.x_min)];
        if (e.is_recovery()) {
            alive -= tgt;
            tgt = 0;
        } else if (live[static_cast<std::size_t>(e.source - w.x_min)] && !tgt) {
            tgt = 1;
            ++alive;
        }
    }
    return live;
}

bool reachable(const HarrisWindow& h, SpacePoint from, std::span<const Site> to, double t1) {
    if (t1 < from.t) throw std::invalid_argument("reachable: from-time after to-time");
    const Site start[] = {from.x};
    const auto live = reachable_set(h, start, from.t, t1);
    const Window& w = h.window();
    return std::any_of(to.begin(), to.end(), [&](Site y) {
        return w.contains(y) && live[static_cast<std::size_t>(y - w.x_min)] != 0;
    });
}

bool reachable(const HarrisWindow& h, SpacePoint from, SpacePoint to) {
    const Site target[] = {to.x};
    return reachable(h, from, target, to.t);
}

std::optional<double> survival_time(const HarrisWindow& h, std::span<const Site> A, double from) {
    if (A.empty()) throw std::invalid_argument("survival_time: empty initial set");
    const Window& w = h.window();
    std::vector<std::uint8_t> live(w.sites(), 0);
    std::size_t alive = 0;
    for (Site x : A) {
        if (!w.contains(x)) throw std::out_of_range("survival_time: site outside window");
        auto& slot = live[static_cast<std::size_t>(x - w.x_min)];
        alive += slot == 0;
        slot = 1;
    }
    const auto events = h.events();
    for (std::size_t i = h.first_after(from); i < events.size(); ++i) {
        const Event& e = events[i];
        if (!h.is_interior(e)) continue;
        auto& tgt = live[static_cast<std::size_t>(e.target - w.x_min)];
        if (e.is_recovery()) {
            if (tgt) {
                tgt = 0;
                if (--alive == 0) return e.time;
            }
        } else if (live[static_cast<std::size_t>(e.source - w.x_min)] && !tgt) {
            tgt = 1;
            ++alive;
        }
    }
    return std::nullopt;
}

LazySurvival lazy_survival(const Rates& rates, std::span<const Site> A, double horizon, std::uint64_t seed,
                           std::size_t cap) {
    rates.validate();
    if (A.empty()) throw std::invalid_argument("lazy_survival: empty initial set");
    if (!(horizon > 0.0)) throw std::invalid_argument("lazy_survival: horizon must be positive");
    const int offsets = 2 * rates.range;
    const double total_rate = Rates::death + offsets * rates.lambda;
    const double p_recovery = Rates::death / total_rate;
    const double offset_scale = offsets / (1.0 - p_recovery);

    struct Clock {
        Stream stream{0};
        double next = 0.0;
        std::uint64_t epoch = 0;
    };
    std::unordered_map<Site, Clock> clocks;
    std::unordered_map<Site, std::uint64_t> activations;
    using Entry = std::pair<double, Site>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;

    auto occupy = [&](Site x, double t) {
        const std::uint64_t n = activations[x]++;
        Clock c{Stream(derive_key(seed, static_cast<std::uint64_t>(static_cast<std::int64_t>(x)), n))};
        c.next = t + c.stream.exponential(total_rate);
        c.epoch = n;
        queue.emplace(c.next, x);
        clocks[x] = c;
    };

    LazySurvival out;
    for (Site x : A) {
        if (!clocks.count(x)) occupy(x, 0.0);
    }
    out.max_alive = clocks.size();
    while (!queue.empty()) {
        const auto [t, x] = queue.top();
        queue.pop();
        const auto it = clocks.find(x);
        if (it == clocks.end() || it->second.next != t) continue;
        if (t > horizon) break;
        Clock& c = it->second;
        const double u = c.stream.uniform();
        if (u < p_recovery) {
            clocks.erase(it);
            if (clocks.empty()) {
                out.death = t;
                out.stop_time = t;
                return out;
            }
            continue;
        }
        const int k = std::min(offsets - 1, static_cast<int>((u - p_recovery) * offset_scale));
        const Site y = x + (k < rates.range ? k - rates.range : k - rates.range + 1);
        c.next = t + c.stream.exponential(total_rate);
        queue.emplace(c.next, x);
        if (!clocks.count(y)) {
            occupy(y, t);
            out.max_alive = std::max(out.max_alive, clocks.size());
            if (cap > 0 && clocks.size() >= cap) {
                out.capped = true;
                out.stop_time = t;
                for (const auto& kv : clocks) out.alive.push_back(kv.first);
                std::sort(out.alive.begin(), out.alive.end());
                return out;
            }
        }
    }
    out.stop_time = horizon;
    for (const auto& kv : clocks) out.alive.push_back(kv.first);
    std::sort(out.alive.begin(), out.alive.end());
    return out;
}

double SplitSurvival::tail(double t) const {
    double sum = 0.0;
    for (const auto& [T, w] : deaths) {
        if (T > t) sum += w;
    }
    return sum;
}

SplitSurvival split_survival(const Rates& rates, double horizon, std::uint64_t seed, const SplittingPlan& plan) {
    if (!(plan.level_step > 0.0) || plan.cap < 2) throw std::invalid_argument("split_survival: bad plan");
    struct Node {
        std::vector<Site> alive;
        double t0;
        double weight;
        std::uint64_t key;
    };
    auto importance = [&plan](std::size_t n, double t) {
        return std::exp(plan.gamma * std::min(t, plan.gamma_until) - plan.beta * (static_cast<double>(n) - 1.0));
    };
    SplitSurvival out;
    std::vector<Node> stack{{{0}, 0.0, 1.0, seed}};
    while (!stack.empty()) {
        Node node = std::move(stack.back());
        stack.pop_back();
        if (++out.runs > plan.max_runs) throw std::runtime_error("split_survival: tree exceeded max_runs");
        const double t1 = std::min(horizon, node.t0 + plan.level_step);
        auto r = lazy_survival(rates, node.alive, t1 - node.t0, node.key, plan.cap);
        if (r.capped) {
            ++out.capped;
            continue;
        }
        if (r.death) {
            out.deaths.emplace_back(node.t0 + *r.death, node.weight);
            continue;
        }
        if (t1 >= horizon) continue;
        // Expected copies; integer part plus a Bernoulli remainder.
        const double ratio = node.weight * importance(r.alive.size(), t1);
        Stream u(derive_key(node.key, 0x53504c54));
        auto copies = static_cast<std::uint64_t>(std::floor(ratio));
        if (u.uniform() < ratio - static_cast<double>(copies)) ++copies;
        for (std::uint64_t c = 0; c < copies; ++c) {
            stack.push_back({r.alive, t1, node.weight / ratio, derive_key(node.key, 0x434c4f4e, c)});
        }
    }
    std::sort(out.deaths.begin(), out.deaths.end());
    return out;
}

WindowPolicy WindowPolicy::for_rates(const Rates& rates) {
    return WindowPolicy{0.25 * rates.range * rates.lambda, 0};
}

int WindowPolicy::half_width(double horizon, int span) const {
    return span + std::max(floor, static_cast<int>(std::ceil(c_speed * horizon)));
}

} // namespace cil
