#pragma once

#include "cil/harris.hpp"
#include "cil/process.hpp"
#include "cil/stats.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

namespace cil {

/// R(s) = {y : (y, s) <-> Z x {horizon}} for s in [0, horizon], using interior
/// events only (vacant outside the window). Stored per site as the sorted
/// times at which membership flips; R(horizon) is the whole window.
class ReachTable {
  public:
    ReachTable(Window window, double horizon, std::vector<std::vector<double>> flips);

    const Window& window() const noexcept { return window_; }
    double horizon() const noexcept { return horizon_; }

    /// y in R(s). Right-continuous in s; false outside the window.
    bool contains(Site y, double s) const;
    /// First flip time of y strictly after s, if any.
    std::optional<double> next_flip(Site y, double s) const;
    std::span<const double> flips(Site y) const;
    std::vector<Site> members(double s) const;

  private:
    Window window_;
    double horizon_;
    std::vector<std::vector<double>> flips_;
};

/// Backward sweep over events in (0, horizon].
ReachTable reach_sweep(const HarrisWindow& h, double horizon);

/// A piecewise-constant path from (x, r), right-continuous, ending either at
/// the horizon or at its death time.
struct AncestorPath {
    SpacePoint origin{};
    double horizon = 0.0;
    std::vector<double> jump_times;
    /// positions[k] holds on [jump_times[k-1], jump_times[k]); positions[0] = x.
    std::vector<Site> positions;
    std::optional<double> death;

    bool alive_at_horizon() const noexcept { return !death.has_value(); }
    /// Position at s in [r, horizon], nullopt once dead.
    std::optional<Site> at(double s) const;
    std::optional<Site> terminal() const { return at(horizon); }

    /// Rows s,position; a final row s,dead when the path dies.
    void write_csv(std::ostream& out) const;
};

/// Lazy trace against a fixed horizon: stay at c, and at an arrow c -> b at u
/// jump iff c is not in R(u) and b is. If (x, r) does not reach the horizon the
/// trace runs against the last time T its reachable set is alive and dies at T.
AncestorPath ancestor_path(const HarrisWindow& h, Site x, double r, double horizon);
/// Same, reusing a reach table built on h at the desired horizon.
AncestorPath ancestor_path(const HarrisWindow& h, const ReachTable& reach, Site x, double r);

/// The running ancestor eta_t: for every t, the endpoint of the lazy path from
/// (x, r) to horizon t. Maintains the sites reachable from (x, r) in rank order;
/// eta_t is the top of the ranking. Arrows a -> b from a live a place b right
/// below a when b is not live or ranks below a; a recovery drops its site.
class AncestorProcess {
  public:
    AncestorProcess(const Window& window, Site x);

    /// Applies one event; returns true if the position changed.
    bool apply(const Event& e);
    std::optional<Site> position() const noexcept;
    std::size_t live_count() const noexcept { return live_; }

  private:
    void link_after(std::int32_t a, std::int32_t b);
    void unlink(std::int32_t b);
    void relabel();

    Window window_;
    std::vector<std::int32_t> prev_;
    std::vector<std::int32_t> next_;
    std::vector<std::uint64_t> rank_;
    std::vector<std::uint8_t> live_mask_;
    std::int32_t head_ = -1;
    std::size_t live_ = 0;
};

/// Full path of the running ancestor on (r, horizon].
AncestorPath ancestor_process(const HarrisWindow& h, Site x, double r, double horizon);

/// Ancestor positions eta^x_t of the system h, per window site. Computed as the
/// labeled process on reverse(h, t). For a primal system p, the ancestors that
/// satisfy xi_t(x) = xi_0(eta^x_t) are ancestor_map(reverse(p, t), t).
class AncestorMap {
  public:
    AncestorMap(Site x_min, std::vector<std::optional<Site>> values);
    Site x_min() const noexcept { return x_min_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::optional<Site> at(Site x) const;
    friend bool operator==(const AncestorMap&, const AncestorMap&) = default;

  private:
    Site x_min_;
    std::vector<std::optional<Site>> values_;
};

AncestorMap ancestor_map(const HarrisWindow& h, double t);

/// tau_0 = r < tau_1 < ... with tau_{k+1} the first t >= tau_k + 1 where
/// eta_t is in R(t); enumeration stops at horizon - guard.
struct RenewalRecord {
    std::vector<double> tau;
    std::vector<Site> position;
    double guard = 0.0;

    /// (dtau, deta) for blocks k >= first_block.
    std::vector<std::pair<double, double>> increments(std::size_t first_block = 1) const;
};

RenewalRecord renewal_times(const AncestorPath& path, const ReachTable& reach, double guard);

struct SigmaEstimate {
    double sigma_hat = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    std::size_t n_increments = 0;
    double mean_dtau = 0.0;
    /// 1 / mean_dtau, the renewal rate.
    double mu_hat = 0.0;
};

/// sigma^2 = var(deta) / mean(dtau) over blocks k >= 1 of every record, with
/// a percentile bootstrap over records.
SigmaEstimate estimate_sigma(const std::vector<RenewalRecord>& records, int resamples = 2000,
                             std::uint64_t seed = 0);

/// Window for the dual statistics: half-width floor + ceil(c_sqrt * sqrt(t)).
/// Ancestor paths are diffusive, so a square-root window suffices.
struct DualWindow {
    double c_sqrt = 6.0;
    int floor = 10;
    int half_width(double horizon) const;
};

// Per-replication observables on one system. The Monte Carlo drivers below
// sample a fresh system per replication and aggregate.

/// For each t of the grid, whether eta^x_t and eta^y_t are both alive and differ.
std::vector<bool> pair_distinct(const HarrisWindow& h, Site x, Site y, std::span<const double> t_grid);

/// For a primal system p: whether the types started on `probe` survive to t.
/// Equals [some eta^x_t lies in probe] for the dual system reverse(p, t).
std::vector<bool> probe_survives(const HarrisWindow& p, std::span<const Site> probe,
                                 std::span<const double> t_grid);

/// Whether both running ancestors are alive at some s <= t with
/// eta^x_s > eta^y_s + gap.
bool crossed(const HarrisWindow& h, Site x, Site y, double gap, double t);

Series pair_coalescence_stat(const Rates& rates, Site x, Site y, std::span<const double> t_grid, int reps,
                             std::uint64_t seed, const DualWindow& window = {});
Series density_stat(const Rates& rates, std::span<const double> t_grid, std::span<const Site> probe, int reps,
                    std::uint64_t seed, const DualWindow& window = {});
SeriesPoint crossing_stat(const Rates& rates, Site x, Site y, double u, double t, int reps, std::uint64_t seed,
                          const DualWindow& window = {});

} // namespace cil
