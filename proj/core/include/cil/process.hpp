#pragma once

#include "cil/harris.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cil {

using State = std::int32_t;

/// Alphabet of a configuration: {0,1}, {0,1,2}, or positive labels with 0 vacant.
enum class Alphabet : std::uint8_t { one_type, multitype, labeled };

std::string to_string(Alphabet a);
Alphabet alphabet_from_string(const std::string& s);

/// Site states over [x_min, x_max]. Sites outside the window read as
/// `outside_left` / `outside_right`; those values are used only by a frozen
/// boundary.
class Configuration {
  public:
    Configuration(Site x_min, std::vector<State> states, Alphabet alphabet, State outside_left = 0,
                  State outside_right = 0);

    /// 1 on x <= center, 2 on x > center, frozen fill 1 on the left and 2 on the right.
    static Configuration heaviside(Site x_min, Site x_max, Site center = 0);
    static Configuration filled(Site x_min, Site x_max, State value, Alphabet alphabet);
    /// Every site occupied by its own label; see label_of / site_of_label.
    static Configuration fully_labeled(Site x_min, Site x_max);

    Site x_min() const noexcept { return x_min_; }
    Site x_max() const noexcept { return x_min_ + static_cast<Site>(states_.size()) - 1; }
    std::size_t size() const noexcept { return states_.size(); }
    bool contains(Site x) const noexcept { return x >= x_min() && x <= x_max(); }
    Alphabet alphabet() const noexcept { return alphabet_; }
    State outside_left() const noexcept { return outside_left_; }
    State outside_right() const noexcept { return outside_right_; }

    /// State at x; outside the window returns the fill value on that side.
    State at(Site x) const noexcept {
        if (x < x_min_) return outside_left_;
        if (x > x_max()) return outside_right_;
        return states_[static_cast<std::size_t>(x - x_min_)];
    }
    State operator[](Site x) const noexcept { return states_[static_cast<std::size_t>(x - x_min_)]; }
    void set(Site x, State value) { states_.at(static_cast<std::size_t>(x - x_min_)) = value; }

    std::span<const State> states() const noexcept { return states_; }

    /// Label carried by site x in a fully labeled start, and its inverse.
    State label_of(Site x) const noexcept { return x - x_min_ + 1; }
    Site site_of_label(State label) const noexcept { return x_min_ + label - 1; }

    /// Indicator of nonzero, as a one-type configuration.
    Configuration occupancy() const;

    void validate() const;

    friend bool operator==(const Configuration&, const Configuration&) = default;

  private:
    Site x_min_;
    std::vector<State> states_;
    Alphabet alphabet_;
    State outside_left_;
    State outside_right_;
};

/// What lies beyond the window: `frozen` keeps the configuration's fill values
/// forever and lets them send arrows in; `vacant` is permanently empty.
enum class BoundaryPolicy : std::uint8_t { frozen, vacant };

struct Delta {
    double time;
    Site site;
    State state;
    friend bool operator==(const Delta&, const Delta&) = default;
};

/// Initial configuration plus every state change, at strictly increasing times.
class Trajectory {
  public:
    Trajectory(Configuration initial, std::vector<Delta> deltas, double horizon);

    const Configuration& initial() const noexcept { return initial_; }
    std::span<const Delta> deltas() const noexcept { return deltas_; }
    double horizon() const noexcept { return horizon_; }

    /// Right-continuous: includes changes at exactly t.
    Configuration state_at(double t) const;
    Configuration final_state() const { return state_at(horizon_); }

    void write_csv(std::ostream& out) const;

  private:
    Configuration initial_;
    std::vector<Delta> deltas_;
    double horizon_;
};

/// Incremental sweep over a Harris system. Events at time 0 precede the start
/// and are not applied; events at the target time are.
class Evolver {
  public:
    Evolver(const HarrisWindow& h, Configuration initial, BoundaryPolicy boundary);

    /// Apply every event with time in (now, t]. Changes are appended to `log` when given.
    void advance_to(double t, std::vector<Delta>* log = nullptr);

    double now() const noexcept { return now_; }
    const Configuration& state() const noexcept { return state_; }

  private:
    const HarrisWindow* h_;
    Configuration state_;
    BoundaryPolicy boundary_;
    std::size_t next_ = 0;
    double now_ = 0.0;
};

Trajectory evolve_onetype(const HarrisWindow& h, const Configuration& zeta0, BoundaryPolicy boundary);
Trajectory evolve_multitype(const HarrisWindow& h, const Configuration& xi0, BoundaryPolicy boundary);
/// Labels at the horizon under the multitype rules with a vacant boundary.
Configuration evolve_labeled(const HarrisWindow& h, const Configuration& labels0);

struct SpacePoint {
    Site x;
    double t;
};

/// Sites y in the window with A x {t0} <-> (y, t1), using events in (t0, t1]
/// and paths that stay inside the window. Returned as a 0/1 mask over the window.
std::vector<std::uint8_t> reachable_set(const HarrisWindow& h, std::span<const Site> from, double t0, double t1);

/// Whether an infection path runs from `from` to some site of `to` at time t1.
bool reachable(const HarrisWindow& h, SpacePoint from, std::span<const Site> to, double t1);
bool reachable(const HarrisWindow& h, SpacePoint from, SpacePoint to);

/// Last time the set reachable from A x {from} is nonempty, or nullopt when it
/// is still alive at the horizon.
std::optional<double> survival_time(const HarrisWindow& h, std::span<const Site> A, double from = 0.0);

/// One-type run from A on all of Z with the Harris system revealed lazily:
/// only the clocks of occupied sites are drawn, and a site's clock restarts
/// from a fresh stream whenever it becomes occupied. Events at vacant sites
/// cannot act, so this has the law of the full construction.
struct LazySurvival {
    /// Extinction time, or nullopt if alive at the stop time.
    std::optional<double> death;
    double stop_time = 0.0;
    /// True when the run stopped because `cap` sites were occupied at once.
    bool capped = false;
    std::size_t max_alive = 0;
    /// Occupied sites at the stop time, ascending. Empty after extinction.
    std::vector<Site> alive;
};

/// Stops at extinction, at the horizon, or (when cap > 0) once cap sites are occupied.
LazySurvival lazy_survival(const Rates& rates, std::span<const Site> A, double horizon, std::uint64_t seed,
                           std::size_t cap = 0);

/// Importance splitting for rare late extinctions. A replication is a tree
/// of lazy runs: at every level time a run in state A is replaced by a random
/// number of copies with mean w * I(|A|, t), each carrying weight 1 / I, where
/// I(n, t) = exp(gamma * min(t, gamma_until) - beta * (n - 1)). Small states
/// are split and large ones culled, and the weights keep every estimate unbiased.
struct SplittingPlan {
    double level_step = 5.0;
    double beta = 0.2;
    double gamma = 0.1;
    double gamma_until = 100.0;
    /// Runs reaching this many occupied sites stop and count as survivors.
    std::size_t cap = 100;
    /// Hard limit on lazy runs per tree; exceeding it throws.
    std::size_t max_runs = 1'000'000;
};

struct SplitSurvival {
    /// (extinction time, weight) of every leaf that died before the horizon.
    std::vector<std::pair<double, double>> deaths;
    std::size_t runs = 0;
    std::size_t capped = 0;

    /// Weighted estimate of P[t < T < horizon] from this tree.
    double tail(double t) const;
};

/// One replication tree started from a single occupied site at 0.
SplitSurvival split_survival(const Rates& rates, double horizon, std::uint64_t seed, const SplittingPlan& plan = {});

/// Half-width of a simulation window: span + ceil(c_speed * horizon).
struct WindowPolicy {
    double c_speed = 0.0;
    int floor = 0;

    /// Default speed R * lambda / 4. Boundary effects of a frozen heaviside
    /// start travel inward at roughly 0.35 sites per unit time at lambda = 2,
    /// R = 1, so this leaves a margin at the default rates.
    static WindowPolicy for_rates(const Rates& rates);
    int half_width(double horizon, int span = 1) const;
};

// Run-length-encoded JSON for configurations.
std::string to_rle_json(const Configuration& c);
Configuration configuration_from_rle_json(const std::string& text);

} // namespace cil
