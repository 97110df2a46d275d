#include "cil/interface.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace cil;
using cil::testkit::make;
using cil::testkit::multitype;

namespace {

// 1's padded on the left, 2's on the right, random middle.
Configuration padded_random(Stream& g, int pad, int middle) {
    std::vector<State> s(static_cast<std::size_t>(pad), 1);
    for (int k = 0; k < middle; ++k) {
        const double u = g.uniform();
        s.push_back(u < 0.3 ? 0 : (u < 0.65 ? 1 : 2));
    }
    s.insert(s.end(), static_cast<std::size_t>(pad), 2);
    return multitype(-static_cast<Site>(g.below(20)), s);
}

bool gamma_brute(const Configuration& xi, int S, int L) {
    const auto st = edges(xi);
    for (Site a = xi.x_min() + S; a <= xi.x_max(); ++a) {
        for (Site b = a + 1; b <= a + L && b + S <= xi.x_max(); ++b) {
            if (!(a < st.r && st.r < b && a < st.l && st.l < b)) continue;
            bool ok = true;
            for (Site x = a - S; x <= a; ++x) ok = ok && xi[x] == 1;
            for (Site x = b; x <= b + S; ++x) ok = ok && xi[x] == 2;
            if (ok) return true;
        }
    }
    return false;
}

bool pi_brute(const Configuration& xi, int k, int L) {
    const auto st = edges(xi);
    int ones = 0;
    int twos = 0;
    for (Site x = st.m() - L; x < st.m(); ++x) ones += xi[x] == 1;
    for (Site x = st.M() + 1; x <= st.M() + L; ++x) twos += xi[x] == 2;
    return ones >= k && twos >= k && st.M() - st.m() <= L;
}

HarrisWindow reflect(const HarrisWindow& h) {
    // x -> 1 - x maps the heaviside start onto itself once types are swapped.
    std::vector<Event> ev;
    for (const auto& e : h.events()) ev.push_back(Event{e.time, 1 - e.source, 1 - e.target, e.kind});
    const Window& w = h.window();
    return HarrisWindow(h.rates(), Window{1 - w.x_max, 1 - w.x_min, w.t_max}, std::move(ev));
}

std::vector<double> unit_grid(int n) {
    std::vector<double> t;
    for (int k = 0; k <= n; ++k) t.push_back(k);
    return t;
}

} // namespace

TEST(Edges, Ordered) {
    const auto st = edges(multitype(0, {1, 1, 0, 2, 2}));
    EXPECT_EQ(st.r, 1);
    EXPECT_EQ(st.l, 3);
    EXPECT_EQ(st.twice_i, 4);
    EXPECT_DOUBLE_EQ(st.i(), 2.0);
    EXPECT_EQ(st.m(), 1);
    EXPECT_EQ(st.M(), 3);
}

TEST(Edges, Overlapping) {
    const auto st = edges(multitype(0, {1, 2, 1, 2}));
    EXPECT_EQ(st.r, 2);
    EXPECT_EQ(st.l, 1);
    EXPECT_EQ(st.m(), 1);
    EXPECT_EQ(st.M(), 2);
    EXPECT_DOUBLE_EQ(st.i(), 1.5);
    EXPECT_EQ(st.floor_i(), 1);
}

TEST(Edges, FloorRoundsDown) {
    EXPECT_EQ((InterfaceState{-2, -1, -3}).floor_i(), -2);
    EXPECT_EQ((InterfaceState{0, 1, 1}).floor_i(), 0);
    EXPECT_EQ((InterfaceState{-1, -1, -2}).floor_i(), -1);
}

TEST(Edges, NeedsBothTypes) {
    EXPECT_THROW(edges(multitype(0, {1, 1, 0})), std::invalid_argument);
    EXPECT_THROW(edges(multitype(0, {0, 2})), std::invalid_argument);
    EXPECT_THROW(edges(testkit::onetype(0, {1, 1})), std::invalid_argument);
}

TEST(Edges, FrozenFillCounts) {
    const Configuration xi(0, {0, 0, 2}, Alphabet::multitype, 1, 2);
    const auto st = edges(xi);
    EXPECT_EQ(st.r, -1);
    EXPECT_EQ(st.l, 2);
    const Configuration empty(0, {0, 0}, Alphabet::multitype, 1, 2);
    EXPECT_EQ(edges(empty), (InterfaceState{-1, 2, 1}));
}

TEST(GapPositions, Example) {
    const auto xi = multitype(0, {1, 0, 1, 2, 0, 2});
    EXPECT_EQ(gap_positions(xi, 2), (std::vector<Site>{2, 3, 5}));
    EXPECT_EQ(gap_positions(xi, 0), (std::vector<Site>{2}));
    EXPECT_THROW(gap_positions(xi, 3), std::out_of_range);
}

TEST(InGamma, Example) {
    const auto xi = multitype(0, {1, 1, 1, 0, 2, 2, 2});
    EXPECT_TRUE(in_gamma(xi, 1, 4));
    EXPECT_FALSE(in_gamma(xi, 1, 3));
    EXPECT_THROW(in_gamma(xi, 3, 4), std::out_of_range);
}

TEST(InGamma, MatchesBruteForce) {
    Stream g(77);
    int hits = 0;
    for (int n = 0; n < 3000; ++n) {
        const int S = static_cast<int>(g.below(3));
        const int L = 1 + static_cast<int>(g.below(8));
        const auto xi = padded_random(g, L + S + 2, static_cast<int>(g.below(10)));
        const bool got = in_gamma(xi, S, L);
        ASSERT_EQ(got, gamma_brute(xi, S, L)) << n;
        hits += got;
    }
    EXPECT_GT(hits, 100);
    EXPECT_LT(hits, 2900);
}

TEST(InPi, Example) {
    EXPECT_TRUE(in_pi(multitype(0, {1, 1, 1, 1, 2, 2, 2, 2}), 3, 3));
    EXPECT_FALSE(in_pi(multitype(0, {1, 0, 1, 1, 2, 2, 2, 2}), 3, 3));
    EXPECT_TRUE(in_pi(multitype(0, {1, 0, 1, 1, 2, 2, 2, 2}), 2, 3));
    EXPECT_THROW(in_pi(multitype(0, {1, 2}), 1, 1), std::out_of_range);
    EXPECT_THROW(in_pi(multitype(0, {1, 2}), 2, 1), std::invalid_argument);
}

TEST(InPi, MatchesBruteForce) {
    Stream g(78);
    int hits = 0;
    for (int n = 0; n < 3000; ++n) {
        const int L = 1 + static_cast<int>(g.below(8));
        const int k = static_cast<int>(g.below(static_cast<std::uint64_t>(L) + 1));
        const auto xi = padded_random(g, L + 2, static_cast<int>(g.below(10)));
        const bool got = in_pi(xi, k, L);
        ASSERT_EQ(got, pi_brute(xi, k, L)) << n;
        hits += got;
    }
    EXPECT_GT(hits, 100);
    EXPECT_LT(hits, 2900);
}

TEST(RunHeaviside, EventFreeStaysAtHalf) {
    const auto h = make(Window{-20, 20, 10.0}, {});
    const auto grid = unit_grid(10);
    const auto tr = run_heaviside(h, grid);
    for (const auto& st : tr.states) EXPECT_EQ(st, (InterfaceState{0, 1, 1}));
    EXPECT_TRUE(tr.all_ok());
    EXPECT_EQ(tr.index_of(3.0), 3u);
    EXPECT_THROW(tr.index_of(3.5), std::invalid_argument);
}

TEST(RunHeaviside, RejectsNarrowWindow) {
    const auto h = make(Window{-3, 3, 10.0}, {});
    const double grid[] = {10.0};
    EXPECT_THROW(run_heaviside(h, grid), std::invalid_argument);
}

TEST(RunHeaviside, CsvRows) {
    const auto h = make(Window{-20, 20, 2.0}, {});
    const double grid[] = {0.0, 2.0};
    std::ostringstream out;
    run_heaviside(h, grid).write_csv(out, 4, 9, true);
    EXPECT_EQ(out.str(), "rep,seed,t,r,l,twice_i,omega_ok\n4,9,0,0,1,1,1\n4,9,2,0,1,1,1\n");
}

TEST(RunHeaviside, ReflectionSymmetry) {
    const auto grid = unit_grid(20);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto h = sample_window(Rates{}, Window{-30, 31, 20.0}, seed);
        const auto a = run_heaviside(h, grid);
        const auto b = run_heaviside(reflect(h), grid);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            EXPECT_EQ(b.states[k].r, 1 - a.states[k].l);
            EXPECT_EQ(b.states[k].l, 1 - a.states[k].r);
            EXPECT_EQ(b.states[k].twice_i, 2 - a.states[k].twice_i);
        }
    }
}

TEST(Regenerate, AtZeroIsIdentical) {
    const auto grid = unit_grid(20);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto h = sample_window(Rates{}, Window{-30, 30, 20.0}, seed);
        const auto c = regenerate(h, 0.0, run_heaviside(h, grid));
        EXPECT_EQ(c.center, 0);
        EXPECT_EQ(c.sup_distance(), 0.0);
        EXPECT_EQ(c.times.size(), grid.size());
    }
}

TEST(Regenerate, StartsWithinHalfAndIsDeterministic) {
    const auto grid = unit_grid(20);
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        const auto h = sample_window(Rates{}, Window{-30, 30, 20.0}, seed);
        const auto tr = run_heaviside(h, grid);
        const auto c = regenerate(h, 8.0, tr);
        const double d0 = c.initial_distance();
        EXPECT_TRUE(d0 == 0.0 || d0 == 0.5) << d0;
        EXPECT_EQ(c.center, tr.states[8].floor_i());
        EXPECT_EQ(c.times.front(), 8.0);
        EXPECT_EQ(c.times.back(), 20.0);
        const auto again = regenerate(h, 8.0, tr);
        EXPECT_EQ(again.twice_distance, c.twice_distance);
    }
}

TEST(Regenerate, AtHorizonIsOnePoint) {
    const auto h = make(Window{-20, 20, 4.0}, {});
    const auto grid = unit_grid(4);
    const auto c = regenerate(h, 4.0, run_heaviside(h, grid));
    ASSERT_EQ(c.times.size(), 1u);
    EXPECT_EQ(c.initial_distance(), 0.0);
}

namespace {

InterfaceTrace synthetic(std::vector<std::int64_t> twice) {
    InterfaceTrace tr;
    for (std::size_t k = 0; k < twice.size(); ++k) {
        tr.times.push_back(static_cast<double>(k));
        tr.states.push_back(InterfaceState{0, 1, twice[k]});
        tr.omega_ok.push_back(1);
    }
    return tr;
}

} // namespace

TEST(Displacement, HandComputedTails) {
    const std::vector<InterfaceTrace> traces{synthetic({1, 3, 7, 1, 1}), synthetic({1, 1, 1, 1, -9})};
    const double starts[] = {0.0, 1.0};
    const double thresholds[] = {1.0, 2.5};
    const auto t = displacement_stat(traces, 3.0, starts, thresholds);
    // start 0: sups 3 and 0; start 1: sups 2 and 5.
    EXPECT_EQ(t.n, 2u);
    EXPECT_EQ(t.tail[0], (std::vector<double>{0.5, 0.5}));
    EXPECT_EQ(t.tail[1], (std::vector<double>{1.0, 0.5}));
}

TEST(Displacement, Preconditions) {
    const std::vector<InterfaceTrace> traces{synthetic({1, 1, 1})};
    const double s0[] = {0.0};
    const double k[] = {1.0};
    EXPECT_THROW(displacement_stat({}, 1.0, s0, k), std::invalid_argument);
    EXPECT_THROW(displacement_stat(traces, 0.0, s0, k), std::invalid_argument);
    EXPECT_THROW(displacement_stat(traces, 5.0, s0, k), std::invalid_argument);
    EXPECT_THROW(displacement_stat({synthetic({1, 1, 1}), synthetic({1, 1})}, 1.0, s0, k), std::invalid_argument);
    auto sparse = synthetic({1, 1, 1});
    sparse.times = {0.0, 2.0, 3.0};
    EXPECT_THROW(displacement_stat({sparse}, 3.0, s0, k), std::invalid_argument);
}

TEST(Displacement, TrivialCases) {
    const auto h = make(Window{-20, 20, 12.0}, {});
    const auto grid = unit_grid(12);
    const std::vector<InterfaceTrace> still{run_heaviside(h, grid)};
    const double s0[] = {0.0, 2.0};
    const double k[] = {0.0, 1.0};
    for (const auto& row : displacement_stat(still, 10.0, s0, k).tail) EXPECT_EQ(row, (std::vector<double>{0.0, 0.0}));
    const std::vector<InterfaceTrace> moving{synthetic({1, 2, 1})};
    const double zero[] = {0.0};
    EXPECT_EQ(displacement_stat(moving, 2.0, zero, zero).tail[0][0], 1.0);
}

TEST(Displacement, TailFallsAtLeastLikeInverseSquare) {
    // Tail at K = U sqrt(r), U in {2, 4, 8}: U^2 * tail(U) stays within a factor 3 of its U = 2 value.
    const double horizon = 70.0;
    const double length = 36.0;
    const auto grid = unit_grid(70);
    std::vector<InterfaceTrace> traces;
    const auto policy = WindowPolicy::for_rates(Rates{});
    for (std::uint64_t k = 0; k < 400; ++k) {
        const int half = policy.half_width(horizon);
        const auto h = sample_window(Rates{}, Window{-half, half, horizon}, replication_seed(8, k));
        traces.push_back(run_heaviside(h, grid, policy));
    }
    const double starts[] = {10.0, 30.0};
    const double U[] = {2.0, 4.0, 8.0};
    std::vector<double> K;
    for (double u : U) K.push_back(u * std::sqrt(length));
    const auto t = displacement_stat(traces, length, starts, K);
    for (const auto& row : t.tail) {
        EXPECT_GT(row[0], 0.0);
        for (std::size_t j = 1; j < 3; ++j) EXPECT_LE(U[j] * U[j] * row[j], 3.0 * U[0] * U[0] * row[0]);
    }
}

TEST(Edges, MidpointInvariants) {
    Stream g(91);
    for (int n = 0; n < 2000; ++n) {
        const auto xi = padded_random(g, 1, static_cast<int>(g.below(20)));
        const auto st = edges(xi);
        EXPECT_EQ(st.twice_i, static_cast<std::int64_t>(st.r) + st.l);
        EXPECT_LE(st.m(), st.i());
        EXPECT_GE(st.M(), st.i());
        EXPECT_EQ(xi[st.r], 1);
        EXPECT_EQ(xi[st.l], 2);
    }
}
