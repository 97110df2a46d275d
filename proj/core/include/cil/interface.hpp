#pragma once

#include "cil/harris.hpp"
#include "cil/process.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace cil {

/// Interface of a configuration with 1's to the left and 2's to the right:
/// r is the rightmost 1, l the leftmost 2, i = (r + l) / 2 kept exactly as 2i.
struct InterfaceState {
    Site r = 0;
    Site l = 1;
    std::int64_t twice_i = 1;

    Site m() const noexcept { return r < l ? r : l; }
    Site M() const noexcept { return r < l ? l : r; }
    double i() const noexcept { return static_cast<double>(twice_i) / 2.0; }
    /// floor(i) computed on the exact representation.
    Site floor_i() const noexcept;
    friend bool operator==(const InterfaceState&, const InterfaceState&) = default;
};

/// A configuration whose 1's (2's) all sit in the frozen fill has r = x_min - 1
/// (l = x_max + 1). Throws when no 1 or no 2 exists at all.
InterfaceState edges(const Configuration& xi);

/// X^(0) = m, then the next k occupied sites to its right.
std::vector<Site> gap_positions(const Configuration& xi, int k);

/// Whether there are a < b with b - a <= L, r and l in (a, b), xi = 1 on
/// [a - S, a] and xi = 2 on [b, b + S].
bool in_gamma(const Configuration& xi, int S, int L);

/// At least k 1's in [m - L, m), at least k 2's in (M, M + L], and M - m <= L.
bool in_pi(const Configuration& xi, int k, int L);

/// Interface observed on a time grid. omega_ok is false where a stray has
/// reached the window edge (l at the left edge or r at the right edge) or an
/// edge has retreated into the frozen fill.
struct InterfaceTrace {
    std::vector<double> times;
    std::vector<InterfaceState> states;
    std::vector<std::uint8_t> omega_ok;

    /// Index of an exact sample time; throws if absent.
    std::size_t index_of(double t) const;
    bool all_ok() const;
    /// Rows rep,seed,t,r,l,twice_i,omega_ok.
    void write_csv(std::ostream& out, std::size_t rep, std::uint64_t seed, bool header) const;
};

/// Heaviside start, frozen boundary. The window must cover the policy's
/// half-width for the last sample time on both sides of the origin.
InterfaceTrace run_heaviside(const HarrisWindow& h, std::span<const double> sample_times,
                             const WindowPolicy& policy);
InterfaceTrace run_heaviside(const HarrisWindow& h, std::span<const double> sample_times);

struct CouplingResult {
    double s = 0.0;
    /// Center floor(i_s) of the restarted heaviside.
    Site center = 0;
    std::vector<double> times;
    /// 2 |i^s_t - i_t| at each sample time t >= s.
    std::vector<std::int64_t> twice_distance;

    double sup_distance() const;
    double initial_distance() const;
};

/// Restarts a heaviside at floor(i_s) at time s on the same system and
/// compares interfaces on the trace's grid from s on.
CouplingResult regenerate(const HarrisWindow& h, double s, const InterfaceTrace& trace);

struct DisplacementTable {
    double length = 0.0;
    std::vector<double> starts;
    std::vector<double> thresholds;
    /// tail[j][k]: fraction of traces with sup over [starts[j], starts[j] + length]
    /// of |i_t - i_start| above thresholds[k].
    std::vector<std::vector<double>> tail;
    std::size_t n = 0;
};

/// Traces must share one grid with spacing <= 1 on every window used.
DisplacementTable displacement_stat(const std::vector<InterfaceTrace>& traces, double length,
                                    std::span<const double> starts, std::span<const double> thresholds);

} // namespace cil
