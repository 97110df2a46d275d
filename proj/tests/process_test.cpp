#include "cil/process.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

using namespace cil;
using cil::testkit::make;
using cil::testkit::multitype;
using cil::testkit::onetype;

TEST(Configuration, HeavisideShape) {
    const auto c = Configuration::heaviside(-3, 4);
    for (Site x = -3; x <= 4; ++x) EXPECT_EQ(c[x], x <= 0 ? 1 : 2);
    EXPECT_EQ(c.at(-10), 1);
    EXPECT_EQ(c.at(10), 2);
}

TEST(Configuration, RejectsStatesOutsideAlphabet) {
    EXPECT_THROW(onetype(0, {0, 2}), std::invalid_argument);
    EXPECT_THROW(multitype(0, {3}), std::invalid_argument);
    EXPECT_THROW(Configuration(0, {}, Alphabet::one_type), std::invalid_argument);
}

TEST(Configuration, RleJsonRoundTrip) {
    const auto h = testkit::small_window(3);
    const auto c = testkit::random_types(h, 4);
    EXPECT_EQ(configuration_from_rle_json(to_rle_json(c)), c);
    const auto heav = Configuration::heaviside(-50, 50);
    EXPECT_EQ(configuration_from_rle_json(to_rle_json(heav)), heav);
}

TEST(EvolveOnetype, NoEventsKeepsState) {
    const auto h = make(Window{0, 3, 1.0}, {});
    const auto z = onetype(0, {1, 0, 1, 1});
    const auto tr = evolve_onetype(h, z, BoundaryPolicy::vacant);
    EXPECT_EQ(tr.final_state(), z);
    EXPECT_EQ(tr.state_at(0.5), z);
}

TEST(EvolveOnetype, ArrowInfectsNeighbor) {
    const auto h = make(Window{0, 1, 1.0}, {Event::arrow(0, 1, 0.5)});
    const auto tr = evolve_onetype(h, onetype(0, {1, 0}), BoundaryPolicy::vacant);
    EXPECT_EQ(tr.final_state(), onetype(0, {1, 1}));
}

TEST(EvolveOnetype, RecoveryThenReinfection) {
    const auto h = make(Window{0, 1, 1.0}, {Event::recovery(0, 0.2), Event::arrow(1, 0, 0.4)});
    const auto tr = evolve_onetype(h, onetype(0, {1, 1}), BoundaryPolicy::vacant);
    EXPECT_EQ(tr.state_at(0.1)[0], 1);
    EXPECT_EQ(tr.state_at(0.2)[0], 0);  // right-continuous
    EXPECT_EQ(tr.state_at(0.3)[0], 0);
    EXPECT_EQ(tr.state_at(0.4)[0], 1);
    EXPECT_EQ(tr.final_state()[0], 1);
}

TEST(EvolveOnetype, AlphabetMismatchThrows) {
    const auto h = make(Window{0, 1, 1.0}, {});
    EXPECT_THROW(evolve_onetype(h, multitype(0, {1, 2}), BoundaryPolicy::vacant), std::invalid_argument);
    EXPECT_THROW(evolve_multitype(h, onetype(0, {1, 0}), BoundaryPolicy::vacant), std::invalid_argument);
}

TEST(EvolveMultitype, OccupiedTargetBlocksBirth) {
    const auto h = make(Window{0, 1, 1.0}, {Event::arrow(0, 1, 0.5)});
    const auto tr = evolve_multitype(h, multitype(0, {1, 2}), BoundaryPolicy::vacant);
    EXPECT_EQ(tr.final_state(), multitype(0, {1, 2}));
    EXPECT_TRUE(tr.deltas().empty());
}

TEST(EvolveMultitype, VacatedSiteTakesInvader) {
    const auto h = make(Window{0, 1, 1.0}, {Event::recovery(1, 0.3), Event::arrow(0, 1, 0.6)});
    const auto tr = evolve_multitype(h, multitype(0, {1, 2}), BoundaryPolicy::vacant);
    EXPECT_EQ(tr.final_state(), multitype(0, {1, 1}));
}

TEST(EvolveMultitype, NoEventsIsIdentity) {
    const auto h = make(Window{-2, 2, 1.0}, {});
    const auto xi = multitype(-2, {1, 0, 2, 1, 0});
    EXPECT_EQ(evolve_multitype(h, xi, BoundaryPolicy::frozen).final_state(), xi);
}

TEST(EvolveMultitype, FrozenBoundarySendsArrowsIn) {
    // Site -1 lies outside the window and holds 1 forever.
    const auto h = make(Window{0, 1, 1.0}, {Event::recovery(0, 0.2), Event::arrow(-1, 0, 0.5)});
    const auto start = Configuration::heaviside(0, 1);
    EXPECT_EQ(evolve_multitype(h, start, BoundaryPolicy::frozen).final_state()[0], 1);
    EXPECT_EQ(evolve_multitype(h, start, BoundaryPolicy::vacant).final_state()[0], 0);
}

TEST(EvolveLabeled, NoEventsKeepsLabels) {
    const auto h = make(Window{-2, 2, 1.0}, {});
    const auto l0 = Configuration::fully_labeled(-2, 2);
    const auto l1 = evolve_labeled(h, l0);
    for (Site x = -2; x <= 2; ++x) EXPECT_EQ(l0.site_of_label(l1[x]), x);
}

TEST(EvolveLabeled, RecoveryLeavesVacancy) {
    const auto h = make(Window{0, 1, 1.0}, {Event::recovery(0, 0.5)});
    EXPECT_EQ(evolve_labeled(h, Configuration::fully_labeled(0, 1))[0], 0);
}

TEST(EvolveLabeled, InvaderCarriesItsLabel) {
    const auto h = make(Window{0, 1, 1.0}, {Event::recovery(0, 0.3), Event::arrow(1, 0, 0.6)});
    const auto l0 = Configuration::fully_labeled(0, 1);
    const auto l1 = evolve_labeled(h, l0);
    EXPECT_EQ(l0.site_of_label(l1[0]), 1);
}

TEST(EvolveLabeled, DuplicateLabelsRejected) {
    const auto h = make(Window{0, 1, 1.0}, {});
    EXPECT_THROW(evolve_labeled(h, Configuration(0, {3, 3}, Alphabet::labeled)), std::invalid_argument);
}

TEST(EvolveLabeled, OccupancyMatchesOnetype) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto h = testkit::small_window(seed);
        const auto& w = h.window();
        const auto labels = evolve_labeled(h, Configuration::fully_labeled(w.x_min, w.x_max));
        const auto ones = evolve_onetype(h, Configuration::filled(w.x_min, w.x_max, 1, Alphabet::one_type),
                                         BoundaryPolicy::vacant);
        const auto a = labels.occupancy().states();
        const auto b = ones.final_state().states();
        EXPECT_TRUE(std::equal(a.begin(), a.end(), b.begin(), b.end())) << seed;
    }
}

TEST(Reachable, PointReachesItself) {
    const auto h = make(Window{0, 2, 1.0}, {Event::recovery(1, 0.5)});
    EXPECT_TRUE(reachable(h, SpacePoint{1, 0.5}, SpacePoint{1, 0.5}));
}

TEST(Reachable, NoEvents) {
    const auto h = make(Window{0, 2, 1.0}, {});
    EXPECT_TRUE(reachable(h, SpacePoint{0, 0.0}, SpacePoint{0, 1.0}));
    EXPECT_FALSE(reachable(h, SpacePoint{0, 0.0}, SpacePoint{1, 1.0}));
}

TEST(Reachable, RecoveryBlocks) {
    const auto h = make(Window{0, 2, 1.0}, {Event::recovery(0, 0.5)});
    EXPECT_FALSE(reachable(h, SpacePoint{0, 0.0}, SpacePoint{0, 1.0}));
}

TEST(Reachable, TimeOrderEnforced) {
    const auto h = make(Window{0, 2, 1.0}, {});
    EXPECT_THROW(reachable(h, SpacePoint{0, 0.8}, SpacePoint{0, 0.2}), std::invalid_argument);
}

TEST(Reachable, AdditiveOverStartSets) {
    for (std::uint64_t seed = 0; seed < 300; ++seed) {
        const auto h = testkit::small_window(seed);
        const auto& w = h.window();
        Stream g(seed);
        std::vector<Site> a;
        std::vector<Site> b;
        for (Site x = w.x_min; x <= w.x_max; ++x) {
            if (g.uniform() < 0.3) a.push_back(x);
            if (g.uniform() < 0.3) b.push_back(x);
        }
        std::vector<Site> ab = a;
        ab.insert(ab.end(), b.begin(), b.end());
        const double t = w.t_max;
        const auto ra = reachable_set(h, a, 0.0, t);
        const auto rb = reachable_set(h, b, 0.0, t);
        const auto rab = reachable_set(h, ab, 0.0, t);
        for (std::size_t i = 0; i < rab.size(); ++i) EXPECT_EQ(rab[i], ra[i] | rb[i]);
    }
}

TEST(SurvivalTime, NoEventsAlive) {
    const auto h = make(Window{0, 2, 1.0}, {});
    const Site A[] = {0};
    EXPECT_FALSE(survival_time(h, A).has_value());
}

TEST(SurvivalTime, SingleRecovery) {
    const auto h = make(Window{0, 2, 1.0}, {Event::recovery(0, 0.7)});
    const Site A[] = {0};
    ASSERT_TRUE(survival_time(h, A).has_value());
    EXPECT_DOUBLE_EQ(*survival_time(h, A), quantize_time(0.7));
    const Site none[] = {0};
    EXPECT_THROW(survival_time(h, std::span<const Site>(none, 0)), std::invalid_argument);
}

TEST(SurvivalTime, DefaultRatesAreSupercritical) {
    // Law-equivalent lazy construction on all of Z. A run that reaches 100
    // occupied sites counts as alive; that can only lower the count of
    // extinctions the test is guarding against by a negligible amount.
    const Site A[] = {0};
    int alive = 0;
    const int n = 10000;
    for (int k = 0; k < n; ++k) {
        const auto r = lazy_survival(Rates{2.0, 1}, A, 200.0, replication_seed(77, k), 100);
        alive += !r.death.has_value();
    }
    EXPECT_GT(static_cast<double>(alive) / n, 0.3);
}

TEST(LazySurvival, MatchesWindowedConstruction) {
    // Over a short horizon a wide vacant window is effectively Z.
    const Site A[] = {0};
    const int n = 3000;
    int lazy = 0;
    int windowed = 0;
    for (int k = 0; k < n; ++k) {
        lazy += !lazy_survival(Rates{2.0, 1}, A, 3.0, replication_seed(5, k)).death.has_value();
        const auto h = sample_window(Rates{2.0, 1}, Window{-40, 40, 3.0}, replication_seed(6, k));
        windowed += !survival_time(h, A).has_value();
    }
    const double p1 = static_cast<double>(lazy) / n;
    const double p2 = static_cast<double>(windowed) / n;
    const double se = std::sqrt(p1 * (1 - p1) / n + p2 * (1 - p2) / n);
    EXPECT_LT(std::abs(p1 - p2), 4.0 * se);
}

TEST(SplitSurvival, AgreesWithPlainMonteCarlo) {
    const double horizon = 60.0;
    SplittingPlan plan;
    plan.cap = 40;
    const Site A[] = {0};
    const int n_plain = 20000;
    int plain = 0;
    for (int k = 0; k < n_plain; ++k) {
        const auto r = lazy_survival(Rates{2.0, 1}, A, horizon, replication_seed(8, k), plan.cap);
        plain += r.death && *r.death > 5.0;
    }
    const int n_split = 5000;
    double sum = 0.0;
    double sum2 = 0.0;
    for (int k = 0; k < n_split; ++k) {
        const double v = split_survival(Rates{2.0, 1}, horizon, replication_seed(9, k), plan).tail(5.0);
        sum += v;
        sum2 += v * v;
    }
    const double p1 = static_cast<double>(plain) / n_plain;
    const double p2 = sum / n_split;
    const double var2 = (sum2 / n_split - p2 * p2) / n_split;
    const double se = std::sqrt(p1 * (1 - p1) / n_plain + var2);
    EXPECT_LT(std::abs(p1 - p2), 4.0 * se) << p1 << " vs " << p2;
}

TEST(MonotoneCoupling, InclusionsHoldAtEveryEvent) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto h = testkit::small_window(seed);
        const auto xi = testkit::random_types(h, seed);
        // xi' has more 2's and fewer 1's.
        Stream g(derive_key(seed, 1));
        std::vector<State> s(xi.states().begin(), xi.states().end());
        for (auto& v : s) {
            if (v == 1 && g.uniform() < 0.3) v = g.uniform() < 0.5 ? 0 : 2;
            else if (v == 0 && g.uniform() < 0.3) v = 2;
        }
        const auto xi2 = multitype(xi.x_min(), s);
        for (auto policy : {BoundaryPolicy::vacant, BoundaryPolicy::frozen}) {
            Evolver a(h, xi, policy);
            Evolver b(h, xi2, policy);
            for (const auto& e : h.events()) {
                a.advance_to(e.time);
                b.advance_to(e.time);
                for (Site x = xi.x_min(); x <= xi.x_max(); ++x) {
                    if (a.state()[x] == 2) EXPECT_EQ(b.state()[x], 2);
                    if (b.state()[x] == 1) EXPECT_EQ(a.state()[x], 1);
                }
            }
        }
    }
}

TEST(Colorblind, OccupancyOfMultitypeIsOnetype) {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        const auto h = testkit::small_window(seed);
        const auto xi = testkit::random_types(h, seed);
        const auto multi = evolve_multitype(h, xi, BoundaryPolicy::vacant);
        const auto one = evolve_onetype(h, xi.occupancy(), BoundaryPolicy::vacant);
        for (const auto& e : h.events()) EXPECT_EQ(multi.state_at(e.time).occupancy(), one.state_at(e.time));
    }
}

TEST(Trajectory, StartsAtInitialAndIsRightContinuous) {
    const auto h = testkit::small_window(41);
    const auto xi = testkit::random_types(h, 41, 0.0);
    const auto tr = evolve_multitype(h, xi, BoundaryPolicy::vacant);
    EXPECT_EQ(tr.state_at(0.0), xi);
    for (std::size_t i = 1; i < tr.deltas().size(); ++i) EXPECT_LT(tr.deltas()[i - 1].time, tr.deltas()[i].time);
    for (const auto& d : tr.deltas()) EXPECT_EQ(tr.state_at(d.time)[d.site], d.state);
    std::ostringstream out;
    tr.write_csv(out);
    EXPECT_EQ(out.str().rfind("time,site,new_state\n", 0), 0u);
}

TEST(Evolver, CannotRunBackwards) {
    const auto h = make(Window{0, 1, 1.0}, {});
    Evolver ev(h, onetype(0, {1, 1}), BoundaryPolicy::vacant);
    ev.advance_to(0.5);
    EXPECT_THROW(ev.advance_to(0.25), std::invalid_argument);
}

TEST(WindowPolicy, DefaultScalesWithRates) {
    const auto p = WindowPolicy::for_rates(Rates{2.0, 1});
    EXPECT_DOUBLE_EQ(p.c_speed, 0.5);
    EXPECT_EQ(p.half_width(200.0), 101);
    EXPECT_EQ(p.half_width(0.0), 1);
}
