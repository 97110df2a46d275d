#include "cil/interface.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace cil {

Site InterfaceState::floor_i() const noexcept {
    // Floor division by 2 that rounds toward -infinity.
    const std::int64_t q = twice_i >= 0 ? twice_i / 2 : -((-twice_i + 1) / 2);
    return static_cast<Site>(q);
}

InterfaceState edges(const Configuration& xi) {
    if (xi.alphabet() != Alphabet::multitype) throw std::invalid_argument("edges expects a multitype configuration");
    std::optional<Site> r;
    std::optional<Site> l;
    for (Site x = xi.x_max(); x >= xi.x_min(); --x) {
        if (xi[x] == 1) {
            r = x;
            break;
        }
    }
    for (Site x = xi.x_min(); x <= xi.x_max(); ++x) {
        if (xi[x] == 2) {
            l = x;
            break;
        }
    }
    // Frozen fill counts: a 1 just past the left edge is still the rightmost 1.
    if (!r && xi.outside_left() == 1) r = xi.x_min() - 1;
    if (!l && xi.outside_right() == 2) l = xi.x_max() + 1;
    if (!r || !l) throw std::invalid_argument("edges: the window holds no 1 or no 2");
    return InterfaceState{*r, *l, static_cast<std::int64_t>(*r) + *l};
}

std::vector<Site> gap_positions(const Configuration& xi, int k) {
    if (k < 0) throw std::invalid_argument("gap_positions: k must be nonnegative");
    const auto st = edges(xi);
    std::vector<Site> out{st.m()};
    for (Site x = st.m() + 1; x <= xi.x_max() && static_cast<int>(out.size()) <= k; ++x) {
        if (xi[x] != 0) out.push_back(x);
    }
    if (static_cast<int>(out.size()) <= k) {
        throw std::out_of_range("gap_positions: fewer than k occupied sites right of m in the window");
    }
    return out;
}

bool in_gamma(const Configuration& xi, int S, int L) {
    if (S < 0 || L < 1) throw std::invalid_argument("in_gamma: need S >= 0 and L >= 1");
    const auto st = edges(xi);
    const Site a_lo = st.M() + 1 - L;
    const Site a_hi = st.m() - 1;
    if (a_lo > a_hi) return false;
    if (a_lo - S < xi.x_min() || a_hi + L + S > xi.x_max()) {
        throw std::out_of_range("in_gamma: window too small to check the isolation segments");
    }
    // ones[x]: length of the run of 1's ending at x; twos[x]: run of 2's starting at x.
    const Site lo = a_lo - S;
    const Site hi = a_hi + L + S;
    const auto n = static_cast<std::size_t>(hi - lo) + 1;
    std::vector<int> ones(n, 0);
    std::vector<int> twos(n, 0);
    for (std::size_t j = 0; j < n; ++j) {
        if (xi[lo + static_cast<Site>(j)] == 1) ones[j] = 1 + (j > 0 ? ones[j - 1] : 0);
    }
    for (std::size_t j = n; j-- > 0;) {
        if (xi[lo + static_cast<Site>(j)] == 2) twos[j] = 1 + (j + 1 < n ? twos[j + 1] : 0);
    }
    auto at = [lo](const std::vector<int>& v, Site x) { return v[static_cast<std::size_t>(x - lo)]; };
    for (Site a = a_lo; a <= a_hi; ++a) {
        if (at(ones, a) < S + 1) continue;
        for (Site b = st.M() + 1; b <= a + L; ++b) {
            if (at(twos, b) >= S + 1) return true;
        }
    }
    return false;
}

bool in_pi(const Configuration& xi, int k, int L) {
    if (L < k) throw std::invalid_argument("in_pi: need L >= k");
    if (k < 0) throw std::invalid_argument("in_pi: need k >= 0");
    const auto st = edges(xi);
    if (st.M() - st.m() > L) return false;
    if (st.m() - L < xi.x_min() || st.M() + L > xi.x_max()) {
        throw std::out_of_range("in_pi: window too small for the flanks");
    }
    int ones = 0;
    for (Site x = st.m() - L; x < st.m(); ++x) ones += xi[x] == 1;
    int twos = 0;
    for (Site x = st.M() + 1; x <= st.M() + L; ++x) twos += xi[x] == 2;
    return ones >= k && twos >= k;
}

std::size_t InterfaceTrace::index_of(double t) const {
    const auto it = std::lower_bound(times.begin(), times.end(), t);
    if (it == times.end() || *it != t) throw std::invalid_argument("time is not a sample time of the trace");
    return static_cast<std::size_t>(it - times.begin());
}

bool InterfaceTrace::all_ok() const {
    return std::all_of(omega_ok.begin(), omega_ok.end(), [](std::uint8_t v) { return v != 0; });
}

void InterfaceTrace::write_csv(std::ostream& out, std::size_t rep, std::uint64_t seed, bool header) const {
    if (header) out << "rep,seed,t,r,l,twice_i,omega_ok\n";
    out.precision(17);
    for (std::size_t k = 0; k < times.size(); ++k) {
        out << rep << ',' << seed << ',' << times[k] << ',' << states[k].r << ',' << states[k].l << ','
            << states[k].twice_i << ',' << int(omega_ok[k]) << '\n';
    }
}

namespace {

void check_times(std::span<const double> times, double t_max) {
    if (times.empty()) throw std::invalid_argument("sample grid is empty");
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (!(times[k] >= 0.0) || times[k] > t_max) throw std::invalid_argument("sample time outside [0, t_max]");
        if (k > 0 && !(times[k] > times[k - 1])) throw std::invalid_argument("sample times must increase");
    }
}

InterfaceTrace trace_from(const HarrisWindow& h, Configuration start, std::span<const double> times) {
    InterfaceTrace tr;
    Evolver ev(h, std::move(start), BoundaryPolicy::frozen);
    const Window& w = h.window();
    for (double t : times) {
        ev.advance_to(t);
        const auto st = edges(ev.state());
        tr.times.push_back(t);
        tr.states.push_back(st);
        tr.omega_ok.push_back(st.l > w.x_min && st.r < w.x_max && st.r >= w.x_min && st.l <= w.x_max);
    }
    return tr;
}

} // namespace

InterfaceTrace run_heaviside(const HarrisWindow& h, std::span<const double> sample_times, const WindowPolicy& policy) {
    const Window& w = h.window();
    check_times(sample_times, w.t_max);
    const int need = policy.half_width(sample_times.back());
    if (-w.x_min < need || w.x_max < need) {
        throw std::invalid_argument("run_heaviside: window narrower than the policy half-width " +
                                    std::to_string(need));
    }
    return trace_from(h, Configuration::heaviside(w.x_min, w.x_max), sample_times);
}

InterfaceTrace run_heaviside(const HarrisWindow& h, std::span<const double> sample_times) {
    return run_heaviside(h, sample_times, WindowPolicy::for_rates(h.rates()));
}

double CouplingResult::sup_distance() const {
    if (twice_distance.empty()) return 0.0;
    return static_cast<double>(*std::max_element(twice_distance.begin(), twice_distance.end())) / 2.0;
}

double CouplingResult::initial_distance() const {
    return twice_distance.empty() ? 0.0 : static_cast<double>(twice_distance.front()) / 2.0;
}

CouplingResult regenerate(const HarrisWindow& h, double s, const InterfaceTrace& trace) {
    const std::size_t k0 = trace.index_of(s);
    if (!trace.omega_ok[k0]) throw std::domain_error("regenerate: i_s undefined, a stray touches the window edge");
    const Site x = trace.states[k0].floor_i();
    CouplingResult out;
    out.s = s;
    out.center = x;

    // i^s_t = x + i_{t-s} of the system seen from (x, s).
    if (s >= h.window().t_max) {
        out.times.push_back(s);
        out.twice_distance.push_back(std::abs(2 * static_cast<std::int64_t>(x) + 1 - trace.states[k0].twice_i));
        return out;
    }
    const auto view = shift(h, -x, s);
    std::vector<double> local;
    for (std::size_t k = k0; k < trace.times.size(); ++k) local.push_back(trace.times[k] - s);
    const Window& vw = view.window();
    const auto tr = trace_from(view, Configuration::heaviside(vw.x_min, vw.x_max), local);
    for (std::size_t j = 0; j < tr.times.size(); ++j) {
        const std::int64_t twice_regen = tr.states[j].twice_i + 2 * static_cast<std::int64_t>(x);
        out.times.push_back(trace.times[k0 + j]);
        out.twice_distance.push_back(std::abs(twice_regen - trace.states[k0 + j].twice_i));
    }
    return out;
}

DisplacementTable displacement_stat(const std::vector<InterfaceTrace>& traces, double length,
                                    std::span<const double> starts, std::span<const double> thresholds) {
    if (traces.empty()) throw std::invalid_argument("displacement_stat: no traces");
    if (!(length > 0.0)) throw std::invalid_argument("displacement_stat: length must be positive");
    const auto& grid = traces.front().times;
    for (const auto& tr : traces) {
        if (tr.times != grid) throw std::invalid_argument("displacement_stat: traces must share one grid");
    }
    DisplacementTable out;
    out.length = length;
    out.starts.assign(starts.begin(), starts.end());
    out.thresholds.assign(thresholds.begin(), thresholds.end());
    out.n = traces.size();
    for (double s0 : starts) {
        const std::size_t a = traces.front().index_of(s0);
        std::size_t b = a;
        while (b + 1 < grid.size() && grid[b + 1] <= s0 + length) ++b;
        if (grid[b] < s0 + length) throw std::invalid_argument("displacement_stat: grid ends before the window");
        for (std::size_t k = a; k < b; ++k) {
            if (grid[k + 1] - grid[k] > 1.0) throw std::invalid_argument("displacement_stat: grid spacing above 1");
        }
        std::vector<std::int64_t> sup(traces.size(), 0);
        for (std::size_t j = 0; j < traces.size(); ++j) {
            const auto base = traces[j].states[a].twice_i;
            for (std::size_t k = a; k <= b; ++k) {
                sup[j] = std::max(sup[j], std::abs(traces[j].states[k].twice_i - base));
            }
        }
        std::vector<double> row;
        for (double K : thresholds) {
            const auto over = std::count_if(sup.begin(), sup.end(),
                                            [K](std::int64_t v) { return static_cast<double>(v) / 2.0 > K; });
            row.push_back(static_cast<double>(over) / static_cast<double>(traces.size()));
        }
        out.tail.push_back(std::move(row));
    }
    return out;
}

} // namespace cil
