#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "cpmes/pareto.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <set>

using namespace cpmes;

namespace {

std::vector<ScoredDesign> random_population(Rng& rng, int n, int m) {
    std::vector<ScoredDesign> pop;
    for (int i = 0; i < n; ++i) {
        std::vector<double> objs;
        for (int k = 0; k < m; ++k) objs.push_back(rng.uniform(-1.0, 1.0));
        pop.push_back({DesignPoint{rng.uniform(), rng.uniform_int(0, 3)}, objs});
    }
    return pop;
}

std::set<std::size_t> front_as_index_set(const ParetoFront& f, const DesignLattice& lat) {
    std::set<std::size_t> s;
    for (const auto& m : f.members) s.insert(lat.index_of(m.design));
    return s;
}

} // namespace

TEST_CASE("dominance definition") {
    CHECK(dominates(std::vector<double>{1.0, 2.0}, std::vector<double>{1.0, 1.0}));
    CHECK_FALSE(dominates(std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 1.0}));
    CHECK_FALSE(dominates(std::vector<double>{2.0, 0.0}, std::vector<double>{1.0, 1.0}));
}

TEST_CASE("non-dominated sort on tiny populations") {
    std::vector<ScoredDesign> one{{DesignPoint{0.1, 0}, {1.0, 2.0}}};
    auto f1 = non_dominated_sort(one);
    CHECK(f1.size() == 1);
    CHECK(f1[0] == std::vector<int>{0});

    std::vector<ScoredDesign> two{{DesignPoint{0.1, 0}, {1.0, 1.0}}, {DesignPoint{0.2, 1}, {2.0, 2.0}}};
    auto f2 = non_dominated_sort(two);
    REQUIRE(f2.size() == 2);
    CHECK(f2[0] == std::vector<int>{1});
    CHECK(f2[1] == std::vector<int>{0});
}

TEST_CASE("front zero equals the brute-force non-dominated set") {
    Rng rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        auto pop = random_population(rng, 50, 3);
        auto fronts = non_dominated_sort(pop);
        auto expect = oracle::brute_force_front(pop);
        auto got = fronts[0];
        std::sort(got.begin(), got.end());
        CHECK(got == expect);

        // every individual appears in exactly one front
        std::vector<int> seen(pop.size(), 0);
        for (const auto& f : fronts)
            for (int i : f) seen[static_cast<std::size_t>(i)] += 1;
        CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
    }
}

TEST_CASE("crowding distance boundary and spacing rules") {
    std::vector<ScoredDesign> two{{DesignPoint{0, 0}, {1.0, 0.0}}, {DesignPoint{0, 1}, {0.0, 1.0}}};
    for (double d : crowding_distance(two)) CHECK(d == std::numeric_limits<double>::infinity());

    // three collinear points, evenly spaced in objective 0, constant elsewhere
    std::vector<ScoredDesign> line{{DesignPoint{0, 0}, {0.0, 5.0, 5.0}},
                                   {DesignPoint{0, 1}, {0.5, 5.0, 5.0}},
                                   {DesignPoint{0, 2}, {1.0, 5.0, 5.0}}};
    auto cd = crowding_distance(line);
    CHECK(cd[0] == std::numeric_limits<double>::infinity());
    CHECK(cd[2] == std::numeric_limits<double>::infinity());
    CHECK(cd[1] == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("crowding distances are permutation invariant") {
    Rng rng(23);
    auto front = random_population(rng, 12, 3);
    auto base = crowding_distance(front);
    std::sort(base.begin(), base.end());
    for (int trial = 0; trial < 5; ++trial) {
        auto perm = front;
        rng.shuffle(perm);
        auto cd = crowding_distance(perm);
        std::sort(cd.begin(), cd.end());
        CHECK(cd == base);
    }
}

TEST_CASE("nsga2 on a single-point design space returns that point") {
    DesignLattice lat;
    lat.alpha_values = {0.5};
    lat.max_added = 0;
    Nsga2Config cfg;
    cfg.population = 8;
    cfg.generations = 3;
    cfg.seed = 1;
    auto front = nsga2([](const DesignPoint&) { return std::vector<double>{1.0, 2.0}; }, lat, cfg);
    REQUIRE(front.size() == 1);
    CHECK(front.members[0].design == DesignPoint{0.5, 0});
}

TEST_CASE("nsga2 finds a globally dominant lattice point quickly") {
    auto lat = DesignLattice::regular(101, 3);
    auto evaluate = [](const DesignPoint& d) {
        double v = -std::abs(d.alpha - 0.37) - 0.25 * std::abs(d.n_added - 2);
        return std::vector<double>{v, 2.0 * v};
    };
    Nsga2Config cfg;
    cfg.population = 60;
    cfg.generations = 20;
    cfg.seed = 5;
    auto front = nsga2(evaluate, lat, cfg);
    REQUIRE(front.size() == 1);
    CHECK(front.members[0].design == DesignPoint{0.37, 2});
}

TEST_CASE("nsga2 front is a high-coverage subset of the exhaustive front") {
    auto lat = DesignLattice::regular(41, 3);
    Rng field_rng(404);
    double c1 = field_rng.uniform(2.0, 5.0), c2 = field_rng.uniform(2.0, 5.0);
    auto evaluate = [&](const DesignPoint& d) {
        double a = d.alpha, n = d.n_added / 3.0;
        return std::vector<double>{std::sin(c1 * a) + 0.4 * n, std::cos(c2 * a) - 0.2 * n,
                                   -std::abs(a - 0.6) - 0.1 * n};
    };
    auto truth = front_as_index_set(exhaustive_front(evaluate, lat), lat);

    for (std::uint64_t seed : {1ull, 2ull, 3ull}) {
        Nsga2Config cfg;
        cfg.seed = seed;
        auto got = front_as_index_set(nsga2(evaluate, lat, cfg), lat);
        std::size_t covered = 0;
        for (auto i : got) {
            CHECK(truth.count(i) == 1); // subset of the true front
            covered += truth.count(i);
        }
        CHECK(static_cast<double>(covered) >= 0.9 * static_cast<double>(truth.size()));
    }
}

TEST_CASE("nsga2 output front is mutually non-dominated and reproducible") {
    auto lat = DesignLattice::regular(21, 2);
    auto evaluate = [](const DesignPoint& d) {
        return std::vector<double>{d.alpha, -d.alpha + 0.1 * d.n_added};
    };
    Nsga2Config cfg;
    cfg.seed = 42;
    cfg.population = 24;
    cfg.generations = 10;
    auto f1 = nsga2(evaluate, lat, cfg);
    auto f2 = nsga2(evaluate, lat, cfg);
    REQUIRE(f1.size() == f2.size());
    for (std::size_t i = 0; i < f1.size(); ++i) {
        CHECK(f1.members[i].design == f2.members[i].design);
        CHECK(f1.members[i].objectives == f2.members[i].objectives);
    }
    for (const auto& a : f1.members)
        for (const auto& b : f1.members)
            CHECK_FALSE(dominates(a.objectives, b.objectives));
}

TEST_CASE("exhaustive mode flag swaps in full enumeration") {
    auto lat = DesignLattice::regular(11, 1);
    auto evaluate = [](const DesignPoint& d) { return std::vector<double>{d.alpha, -d.alpha}; };
    Nsga2Config cfg;
    cfg.exhaustive = true;
    auto front = nsga2(evaluate, lat, cfg);
    CHECK(front.size() == lat.alpha_values.size() * 2); // all points mutually non-dominated
}

TEST_CASE("non-finite objectives are an evaluation error") {
    auto lat = DesignLattice::regular(5, 1);
    auto evaluate = [](const DesignPoint& d) {
        return std::vector<double>{d.alpha, d.alpha > 0.6 ? std::nan("") : 0.0};
    };
    Nsga2Config cfg;
    cfg.population = 8;
    cfg.generations = 2;
    CHECK_THROWS_AS(nsga2(evaluate, lat, cfg), EvaluationError);
}
